# experiment_pipeline.py
from __future__ import annotations

import time
from pathlib import Path
from typing import Any, Callable, Dict, List

from analysis.bias import bias_report
from analysis.bootstrap import bootstrap_uncertainty
from analysis.efficiency import sample_efficiency_curve
from analysis.leaderboard import build_leaderboard
from features.types import FeatureDef
from fitting.cv import resolve_cv_sigmas
from fitting.engine import fit_map
from fitting.types import FitOptions
from games.simulate import FeatureSampler, make_truth, simulate_games
from games.split import filter_games, split
from games.tags import parse_tag_expr
from rating.types import CV, ModifierTerm, RatingSpec, SharedTerm
from utils.seeds import derive_seed

PIPELINE_LOG_PATH = "./pipelines/experiment.txt"


# =========================
# CONFIGURACIÓN PIPELINE
# =========================
CONFIG: Dict[str, Any] = {
    "seed": 0,

    # Verdad sintética
    "n_models": 20,
    "n_games": 40000,
    "base_mean": 1200.0,
    "base_spread": 100.0,
    "length_alpha": 130.0,
    "modifier_sigma": 50.0,
    "tasks": ["code", "chinese"],
    "task_share": 0.2,          # fracción de partidas por tarea

    # Ajuste
    "modifier_prior_sigma": CV,  # número fijo o "cv"
    "cv_grid": [10.0, 20.0, 40.0, 80.0, 160.0],
    "cv_folds": 3,
    "resamples": 10,
    "threads": 1,

    # Curva de eficiencia (tarea = primera de "tasks")
    "test_fraction": 0.2,
    "budgets": [250, 500, 1000, 2000],

    "log_path": PIPELINE_LOG_PATH,
}


# =========================
# HELPERS
# =========================
def _spec(cfg: Dict[str, Any], modifier_sigma: Any) -> RatingSpec:
    return RatingSpec(
        shared=(SharedTerm(FeatureDef("length"), prior_sigma=400.0),),
        modifiers=tuple(ModifierTerm(t, parse_tag_expr(f"tag('{t}')"), modifier_sigma) for t in cfg["tasks"]),
    )


def _tag_mix(cfg: Dict[str, Any]) -> List:
    share = float(cfg["task_share"])
    mix = [(frozenset([t]), share) for t in cfg["tasks"]]
    mix.append((frozenset(), max(0.0, 1.0 - share * len(cfg["tasks"]))))
    return mix


def _flush_pipeline_log(lines: List[str], path: str) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


# =========================
# PIPELINE
# =========================
def run_pipeline(cfg: Dict[str, Any], log: Callable[[str], None] = print) -> Dict[str, Any]:
    """simulate -> fit -> bootstrap -> leaderboard -> sesgos -> curva de eficiencia."""
    seed = int(cfg["seed"])
    timings: Dict[str, float] = {}
    roster = [f"model_{i:02d}" for i in range(int(cfg["n_models"]))]

    # --- 1) Verdad y partidas sintéticas ---
    t0 = time.perf_counter()
    truth = make_truth(
        _spec(cfg, float(cfg["modifier_sigma"])), roster,
        base_mean=cfg["base_mean"], base_spread=cfg["base_spread"],
        alphas={"length": cfg["length_alpha"]}, modifier_sigma=cfg["modifier_sigma"],
        seed=derive_seed("pipeline:truth", seed),
    )
    games = simulate_games(
        truth, roster, _tag_mix(cfg), {"length": FeatureSampler("normal", 6.5, 0.5)},
        n=int(cfg["n_games"]), seed=derive_seed("pipeline:games", seed),
    )
    train, test = split(games, [1.0 - cfg["test_fraction"], cfg["test_fraction"]], seed=seed)
    timings["simulate"] = time.perf_counter() - t0
    log(f"Partidas: {len(games)} (train={len(train)}, test={len(test)}) | modelos={len(roster)}")

    # --- 2) σ de los modificadores + ajuste MAP ---
    t0 = time.perf_counter()
    spec = _spec(cfg, cfg["modifier_prior_sigma"])
    options = FitOptions()
    if spec.pending_cv():
        spec = resolve_cv_sigmas(train, spec, grid=cfg["cv_grid"], folds=int(cfg["cv_folds"]),
                                 seed=seed, options=options, max_workers=int(cfg["threads"]))
    log("σ modificadores: " + ", ".join(f"{t.name}={t.prior_sigma:g}" for t in spec.modifiers))
    fit = fit_map(train, spec, options)
    timings["fit"] = time.perf_counter() - t0
    log(f"Ajuste: objetivo={fit.objective:.4f} | iteraciones={fit.iterations} | convergido={fit.converged}")
    log(f"α(length): verdad={cfg['length_alpha']:.2f} | estimado={fit.params.alpha('length'):.2f}")

    # --- 3) Bootstrap + informes ---
    t0 = time.perf_counter()
    stds = bootstrap_uncertainty(train, spec, options, int(cfg["resamples"]), seed,
                                 max_workers=int(cfg["threads"]))
    timings["bootstrap"] = time.perf_counter() - t0
    board = build_leaderboard(fit, stds)
    report = bias_report(fit, train, stds)
    log("\n=== LEADERBOARD ===")
    log(board.to_markdown())
    log("=== SESGOS ===")
    log(report.to_markdown())

    # --- 4) Curva de eficiencia sobre la primera tarea ---
    t0 = time.perf_counter()
    task = cfg["tasks"][0]
    in_task = parse_tag_expr(f"tag('{task}')")
    spec_multi = RatingSpec(
        shared=spec.shared,
        modifiers=tuple(t for t in spec.modifiers if t.name == task),
    )
    curve = sample_efficiency_curve(
        task_games=filter_games(train, in_task),
        background_games=filter_games(train, lambda g: not in_task.evaluate(g)),
        spec_multi=spec_multi,
        spec_uni=RatingSpec(shared=spec.shared),
        budgets=cfg["budgets"],
        test=filter_games(test, in_task),
        seed=seed,
        options=options,
    )
    timings["curve"] = time.perf_counter() - t0
    log(f"=== CURVA ({task}) ===")
    for p in curve.points:
        log(f"b={p.budget:>6} | multi={p.normalized_loss_multivariate:.5f} | "
            f"uni={p.normalized_loss_univariate:.5f} | ganancia={p.gain:.1%}")

    log("\n=== TIEMPOS PIPELINE ===")
    for stage, seconds in timings.items():
        log(f"{stage + ':':<12} {seconds:.3f} s")

    return {"fit": fit, "bootstrap": stds, "leaderboard": board, "bias": report, "curve": curve,
            "timings": timings}


# =========================
# MAIN
# =========================
def main() -> None:
    cfg = CONFIG
    log_lines: List[str] = []

    def log(msg: str) -> None:
        log_lines.append(str(msg))

    log("=== PIPELINE: simulate → fit → bootstrap → informes → curva ===")
    log(f"seed={cfg['seed']} | modelos={cfg['n_models']} | partidas={cfg['n_games']}")
    try:
        run_pipeline(cfg, log)
    finally:
        _flush_pipeline_log(log_lines, cfg.get("log_path", PIPELINE_LOG_PATH))


if __name__ == "__main__":
    main()
