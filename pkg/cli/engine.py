# cli/engine.py
from __future__ import annotations
import json
import os
import sqlite3
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from loguru import logger

from analysis.bias import bias_report
from analysis.bootstrap import bootstrap_uncertainty
from analysis.efficiency import sample_efficiency_curve
from analysis.leaderboard import build_leaderboard, univariate_task_leaderboard
from analysis.render import as_markdown_table, write_frame, write_text
from features.engine import extract_features
from fitting.cv import resolve_cv_sigmas_with_reports
from fitting.engine import fit_map
from fitting.io import load_fit_result, save_fit_result
from fitting.types import FitOptions, FitResult
from games.benchmark import convert_benchmark
from games.io import load_benchmark_csv, load_games, save_games
from games.simulate import FeatureSampler, make_truth, simulate_games
from games.types import GameDataset
from rating.spec_io import load_rating_spec, rating_spec_to_dict, save_rating_spec
from rating.types import RatingSpec
from utils.errors import DataError, FeatureError, GameValidationError, RatingSpecError
from utils.seeds import derive_seed
from utils.sql_log import clear_log, end_run, ensure_sql_log_table, insert_skipped_log, log_event, start_run
from utils.sqlite_client import SqliteClient
from .types import EXIT_IO, EXIT_NOT_CONVERGED, EXIT_OK, EXIT_VALIDATION, RunConfig, RunResult

VALIDATION_ERRORS = (GameValidationError, RatingSpecError, FeatureError, DataError)


class _Run:
    """Contexto de una ejecución: configuración + conexión al log + run_id."""

    def __init__(self, cfg: RunConfig, conn, run_id: str):
        self.cfg = cfg
        self.conn = conn
        self.run_id = run_id

    @property
    def seed(self) -> int:
        return derive_seed(self.cfg.command, self.cfg.seed)

    def path(self, key: str, required: bool = True) -> Optional[str]:
        value = self.cfg.paths.get(key)
        if required and not value:
            raise DataError(f"falta la ruta '--{key.replace('_', '-')}'")
        return value

    def opt(self, key: str, default: Any = None) -> Any:
        value = self.cfg.options.get(key)
        return default if value is None else value

    def warn(self, message: str, stage: str, **metadata: Any) -> None:
        log_event(self.conn, level="WARN", message=message, run_id=self.run_id, stage=stage, metadata=metadata)

    # --------------------------------------------------------------
    def load_games(self, key: str = "games") -> GameDataset:
        dataset = load_games(self.path(key), skip_invalid=self.cfg.skip_invalid)
        if dataset.skipped:
            insert_skipped_log(self.conn, list(dataset.skipped), run_id=self.run_id, stage=f"load_{key}")
            logger.warning(f"[cli] {len(dataset.skipped)} línea(s) inválida(s) descartada(s) en {self.path(key)}")
        return dataset

    def with_features(self, dataset: GameDataset, spec: RatingSpec) -> GameDataset:
        defs = [t.feature for t in spec.shared]
        return extract_features(dataset, defs, max_workers=self.cfg.threads) if defs else dataset

    def fit_options(self) -> FitOptions:
        init = self.opt("init_from")
        return FitOptions(
            max_iterations=self.opt("max_iter", FitOptions.max_iterations),
            gradient_tolerance=self.opt("tol", FitOptions.gradient_tolerance),
            optimizer=self.opt("optimizer", FitOptions.optimizer),
            initial_params=load_fit_result(init).params if init else None,
        )

    def note_fit(self, fit: FitResult, stage: str) -> None:
        if fit.clamp_count:
            self.warn("probabilidades recortadas", stage, clamp_count=fit.clamp_count)
        if not fit.converged:
            self.warn("sin convergencia", stage, iterations=fit.iterations, max_gradient=fit.max_gradient)

    def write_table(self, frame, markdown: Optional[str] = None) -> str:
        out = self.cfg.out
        if self.cfg.fmt == "md":
            text = markdown if markdown is not None else as_markdown_table(
                list(frame.columns), frame.astype(str).values.tolist()
            )
            return str(write_text(text, out))
        return str(write_frame(frame, out))


def _parse_pair(text: str, what: str) -> Tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key or not value:
        raise DataError(f"{what} debe tener la forma NOMBRE=VALOR (recibido '{text}')")
    return key, value


def _parse_float(text: str, what: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataError(f"{what}: '{text}' no es un número") from None


# ======================================================
# Comandos
# ======================================================
def _cmd_fit(run: _Run) -> Tuple[List[str], str, int]:
    spec = load_rating_spec(run.path("spec"))
    dataset = run.with_features(run.load_games(), spec)
    options = run.fit_options()
    if spec.pending_cv():
        spec, _ = resolve_cv_sigmas_with_reports(dataset, spec, seed=run.seed, options=options,
                                                 max_workers=run.cfg.threads)
    fit = fit_map(dataset, spec, options)
    run.note_fit(fit, "fit_map")
    out = save_fit_result(fit, run.cfg.out)
    code = EXIT_OK if fit.converged else EXIT_NOT_CONVERGED
    summary = (f"objetivo={fit.objective:.6f} | iteraciones={fit.iterations} | "
               f"convergido={'sí' if fit.converged else 'no'} | modelos={len(fit.roster)}")
    return [str(out)], summary, code


def _cmd_leaderboard(run: _Run) -> Tuple[List[str], str, int]:
    fit = load_fit_result(run.path("fit"))
    anchor = None
    if run.opt("anchor"):
        model, value = _parse_pair(run.opt("anchor"), "--anchor")
        anchor = (model, _parse_float(value, "--anchor"))

    tasks = run.opt("univariate_tasks") or []
    if tasks:
        if anchor is None:
            raise DataError("--univariate-tasks necesita --anchor MODELO=VALOR")
        dataset = run.load_games()
        board = univariate_task_leaderboard(
            dataset, dict(_parse_pair(t, "--univariate-tasks") for t in tasks), anchor, run.fit_options()
        )
    else:
        stds = None
        resamples = int(run.opt("resamples", 0))
        if resamples:
            dataset = run.with_features(run.load_games(), fit.spec)
            stds = bootstrap_uncertainty(
                dataset, fit.spec, run.fit_options(), resamples, run.seed,
                max_workers=run.cfg.threads, roster=fit.roster, progress=run.cfg.progress,
            )
            if stds.fallbacks:
                run.warn("modelos ausentes en remuestras", "bootstrap", fallbacks=stds.fallbacks)
        board = build_leaderboard(fit, stds, anchor)

    out = run.write_table(board.to_frame(), board.to_markdown())
    top = board.rows[0]
    return [out], f"modelos={len(board)} | primero={top.model} ({top.rating:.1f})", EXIT_OK


def _cmd_bias_report(run: _Run) -> Tuple[List[str], str, int]:
    fit = load_fit_result(run.path("fit"))
    dataset = run.with_features(run.load_games(), fit.spec)
    stds = None
    resamples = int(run.opt("resamples", 0))
    if resamples:
        stds = bootstrap_uncertainty(
            dataset, fit.spec, run.fit_options(), resamples, run.seed,
            max_workers=run.cfg.threads, roster=fit.roster, progress=run.cfg.progress,
        )
        if stds.fallbacks:
            run.warn("modelos ausentes en remuestras", "bootstrap", fallbacks=stds.fallbacks)
    report = bias_report(fit, dataset, stds)
    out = run.write_table(report.to_frame(), report.to_markdown())
    return [out], f"términos={len(report.rows)}", EXIT_OK


def _cmd_convert_benchmark(run: _Run) -> Tuple[List[str], str, int]:
    records = load_benchmark_csv(run.path("csv"))
    dataset = convert_benchmark(records, name=run.opt("name", "benchmark"),
                                pairing=run.opt("pairing", "all-pairs"), seed=run.seed)
    if dataset.skipped:
        insert_skipped_log(run.conn, list(dataset.skipped), run_id=run.run_id, stage="convert_benchmark")
    save_games(dataset, run.cfg.out)
    return [run.cfg.out], f"preguntas={len(records)} | partidas={len(dataset)} | descartadas={len(dataset.skipped)}", EXIT_OK


def _parse_sampler(text: str) -> FeatureSampler:
    # tipo[:loc[:scale]]
    parts = text.split(":")
    try:
        return FeatureSampler(parts[0], *[float(p) for p in parts[1:]])
    except (TypeError, ValueError):
        raise DataError(f"--feature: sampler inválido '{text}'") from None


def _cmd_simulate(run: _Run) -> Tuple[List[str], str, int]:
    n_models = int(run.opt("models", 10))
    if n_models < 2:
        raise DataError("--models debe ser >= 2")
    width = len(str(n_models - 1))
    roster = [f"model_{i:0{width}d}" for i in range(n_models)]
    spec_path = run.path("truth_spec", required=False)
    spec = load_rating_spec(spec_path) if spec_path else RatingSpec()

    alphas = {k: _parse_float(v, "--alpha") for k, v in (_parse_pair(a, "--alpha") for a in run.opt("alpha", []))}
    samplers = {k: _parse_sampler(v) for k, v in (_parse_pair(f, "--feature") for f in run.opt("feature", []))}
    for term in spec.shared:
        if term.name not in samplers:
            kind = term.feature.kind.value if term.feature.kind is not None else None
            samplers[term.name] = FeatureSampler("position" if kind == "position" else "normal")

    tag_mix = []
    for item in run.opt("tag_mix", []):
        tags, weight = _parse_pair(item, "--tag-mix")
        tag_set = frozenset(t for t in tags.split("+") if t and t != "none")
        tag_mix.append((tag_set, _parse_float(weight, "--tag-mix")))
    tag_mix = tag_mix or [(frozenset(), 1.0)]

    truth = make_truth(
        spec, roster,
        base_mean=float(run.opt("base_mean", 1200.0)),
        base_spread=float(run.opt("spread", 100.0)),
        alphas=alphas,
        modifier_sigma=float(run.opt("modifier_sigma", 50.0)),
        seed=derive_seed("simulate:truth", run.cfg.seed),
    )
    dataset = simulate_games(truth, roster, tag_mix, samplers, n=int(run.opt("n", 10000)),
                             seed=run.seed, draw_rate=float(run.opt("draw_rate", 0.0)))
    save_games(dataset, run.cfg.out)

    truth_path = Path(run.cfg.out).with_suffix(".truth.json")
    with open(truth_path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(
            {"spec": rating_spec_to_dict(spec), "roster": roster, "params": truth.params.as_dict()},
            f, ensure_ascii=False, indent=2,
        )
        f.write("\n")
    return [run.cfg.out, str(truth_path)], f"modelos={n_models} | partidas={len(dataset)}", EXIT_OK


def _cmd_tune_priors(run: _Run) -> Tuple[List[str], str, int]:
    spec = load_rating_spec(run.path("spec"))
    dataset = run.with_features(run.load_games(), spec)
    grid = [_parse_float(s, "--grid") for s in run.opt("grid", [])] or None
    kwargs = {"grid": grid} if grid else {}
    resolved, reports = resolve_cv_sigmas_with_reports(
        dataset, spec, folds=int(run.opt("folds", 5)), seed=run.seed,
        options=run.fit_options(), max_workers=run.cfg.threads, **kwargs,
    )
    if not reports:
        logger.info("[cli] el spec no tiene σ 'cv'; se copia sin cambios")
    save_rating_spec(resolved, run.cfg.out)
    outputs = [run.cfg.out]
    if reports:
        frame = pd.DataFrame.from_records([row for r in reports for row in r.rows()], columns=["term", "sigma", "loss"])
        outputs.append(str(write_frame(frame, Path(run.cfg.out).with_suffix(".cv.csv"))))
    chosen = ", ".join(f"{r.term}={r.best:g}" for r in reports) or "ninguna"
    return outputs, f"σ elegidas: {chosen}", EXIT_OK


def _cmd_curve(run: _Run) -> Tuple[List[str], str, int]:
    spec_multi = load_rating_spec(run.path("spec_multi"))
    spec_uni = load_rating_spec(run.path("spec_uni"))

    def prepared(key: str) -> GameDataset:
        ds = run.with_features(run.load_games(key), spec_multi)
        return run.with_features(ds, spec_uni)

    budgets = [int(b) for b in run.opt("budgets", [])]
    curve = sample_efficiency_curve(
        prepared("task_games"), prepared("background_games"), spec_multi, spec_uni,
        budgets, prepared("test"), seed=run.seed, options=run.fit_options(),
        max_workers=run.cfg.threads, progress=run.cfg.progress,
    )
    out = run.write_table(curve.to_frame())
    last = curve.points[-1]
    return [out], f"presupuestos={len(curve.points)} | ganancia(b={last.budget})={last.gain:.2%}", EXIT_OK


COMMANDS: Dict[str, Callable[[_Run], Tuple[List[str], str, int]]] = {
    "fit": _cmd_fit,
    "leaderboard": _cmd_leaderboard,
    "bias-report": _cmd_bias_report,
    "convert-benchmark": _cmd_convert_benchmark,
    "simulate": _cmd_simulate,
    "tune-priors": _cmd_tune_priors,
    "curve": _cmd_curve,
}


# ======================================================
# Ejecución con log
# ======================================================
def _forward_warnings(run: _Run):
    """Sink de loguru: los WARNING del proceso principal también van al log SQLite."""
    pid = os.getpid()

    def sink(message) -> None:
        record = message.record
        if record["process"].id != pid:
            return
        try:
            log_event(run.conn, level="WARN", message=record["message"], run_id=run.run_id,
                      stage=record["name"], reason="warning")
        except sqlite3.Error:
            pass  # un log caído no tumba el comando

    return logger.add(sink, level="WARNING", format="{message}")


def run_command(cfg: RunConfig) -> RunResult:
    if cfg.command not in COMMANDS:
        return RunResult(cfg.command, None, EXIT_VALIDATION, error=f"comando desconocido: {cfg.command}")

    log_sql = SqliteClient(cfg.log_db)
    ensure_sql_log_table(log_sql.conn)
    if cfg.reset_log:
        clear_log(log_sql.conn)
    run_id = start_run(log_sql.conn, metadata={"command": cfg.command, "seed": cfg.seed, "threads": cfg.threads})
    run = _Run(cfg, log_sql.conn, run_id)
    sink_id = _forward_warnings(run)

    result = RunResult(cfg.command, run_id, EXIT_OK)
    try:
        outputs, summary, code = COMMANDS[cfg.command](run)
        result.outputs, result.summary, result.exit_code = outputs, summary, code
    except VALIDATION_ERRORS as exc:
        result.exit_code, result.error = EXIT_VALIDATION, str(exc)
    except OSError as exc:
        result.exit_code, result.error = EXIT_IO, f"{type(exc).__name__}: {exc}"
    except Exception as exc:
        log_event(log_sql.conn, level="ERROR", message=str(exc), run_id=run_id,
                  stage=cfg.command, reason=type(exc).__name__)
        raise
    finally:
        logger.remove(sink_id)
        if result.error:
            log_event(log_sql.conn, level="ERROR", message=result.error, run_id=run_id,
                      stage=cfg.command, reason=f"exit {result.exit_code}")
        end_run(log_sql.conn, run_id, metadata={"exit_code": result.exit_code, "outputs": result.outputs})
        log_sql.close()
    return result
