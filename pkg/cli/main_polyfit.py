# cli/main_polyfit.py
from __future__ import annotations
import argparse
import sys
import time
from typing import List, Optional

from loguru import logger

from utils.config import settings
from utils.constants import DEFAULT_CV_FOLDS, DEFAULT_RESAMPLES
from .engine import run_command
from .types import RunConfig

# destino -> clave de RunConfig.paths
_PATH_ARGS = ("games", "spec", "fit", "csv", "truth_spec", "task_games", "background_games",
              "spec_multi", "spec_uni", "test")


def _common(with_games: bool = False, with_format: bool = False) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=settings.POLYFIT_SEED, help="Semilla global (por defecto 0)")
    p.add_argument("--threads", type=int, default=settings.POLYFIT_THREADS,
                   help="Máximo de procesos para CV y bootstrap (POLYFIT_THREADS)")
    p.add_argument("--log-db", default=settings.POLYFIT_LOG_DB, help="SQLite del log de ejecuciones")
    p.add_argument(
        "--no-reset-log",
        action="store_true",
        help="No limpiar los registros de la tabla de log al inicio (por defecto se limpian)",
    )
    p.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                   help="Nivel de los mensajes por consola")
    p.add_argument("--no-progress", action="store_true", help="Sin barras de progreso")
    if with_games:
        p.add_argument("--skip-invalid", action="store_true",
                       help="Descartar (y registrar) líneas JSONL inválidas en lugar de fallar")
    if with_format:
        p.add_argument("--format", dest="fmt", choices=["csv", "md"], default="csv")
    return p


def _fit_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-iter", type=int, dest="max_iter", help="Máximo de iteraciones del optimizador")
    p.add_argument("--tol", type=float, help="Tolerancia sobre max|∇| (por defecto 1e-7)")
    p.add_argument("--optimizer", choices=["lbfgs", "gd"], help="lbfgs (por defecto) o gd (depuración)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyfit", description="Ratings Bradley-Terry multivariantes (CLI)")
    sub = parser.add_subparsers(dest="command", required=True)

    # fit
    p = sub.add_parser("fit", parents=[_common(with_games=True)], help="Ajuste MAP")
    p.add_argument("--games", required=True, help="Partidas JSONL")
    p.add_argument("--spec", required=True, help="Spec del modelo (JSON)")
    p.add_argument("--out", required=True, help="FitResult JSON de salida")
    p.add_argument("--init-from", dest="init_from", help="FitResult JSON como punto inicial")
    _fit_flags(p)

    # leaderboard
    p = sub.add_parser("leaderboard", parents=[_common(with_games=True, with_format=True)], help="Leaderboard")
    p.add_argument("--fit", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--games", "--bootstrap-games", dest="games",
                   help="Partidas para el bootstrap o los ajustes univariantes por tarea")
    p.add_argument("--resamples", type=int, default=0, help=f"Remuestras bootstrap (0 = sin incertidumbre; típico {DEFAULT_RESAMPLES})")
    p.add_argument("--anchor", help="MODELO=VALOR: desplaza las bases para fijar ese modelo")
    p.add_argument("--univariate-tasks", dest="univariate_tasks", nargs="+", metavar="NOMBRE=EXPR",
                   help="Leaderboard univariante por tarea (expresión de tags)")
    _fit_flags(p)

    # bias-report
    p = sub.add_parser("bias-report", parents=[_common(with_games=True, with_format=True)], help="Influencia de sesgos")
    p.add_argument("--fit", required=True)
    p.add_argument("--games", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--resamples", type=int, default=0)
    _fit_flags(p)

    # convert-benchmark
    p = sub.add_parser("convert-benchmark", parents=[_common()], help="Benchmark CSV -> partidas JSONL")
    p.add_argument("--csv", required=True, help="CSV question_id,model,correct")
    p.add_argument("--name", default="benchmark")
    p.add_argument("--pairing", choices=["all-pairs", "random-pair"], default="all-pairs")
    p.add_argument("--out", required=True)

    # simulate
    p = sub.add_parser("simulate", parents=[_common()], help="Partidas sintéticas desde una verdad conocida")
    p.add_argument("--models", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--truth-spec", dest="truth_spec", help="Spec JSON de la verdad (por defecto solo base)")
    p.add_argument("--tag-mix", dest="tag_mix", nargs="+", metavar="TAG+TAG=PESO",
                   help="Mezcla de conjuntos de tags ('none' = sin tags)")
    p.add_argument("--feature", nargs="+", metavar="NOMBRE=TIPO:LOC:SCALE", help="Sampler por feature")
    p.add_argument("--alpha", nargs="+", metavar="NOMBRE=VALOR", help="α verdadero por término compartido")
    p.add_argument("--draw-rate", dest="draw_rate", type=float, default=0.0)
    p.add_argument("--spread", type=float, default=100.0, help="Desviación de las bases verdaderas")
    p.add_argument("--base-mean", dest="base_mean", type=float, default=1200.0)
    p.add_argument("--modifier-sigma", dest="modifier_sigma", type=float, default=50.0)

    # tune-priors
    p = sub.add_parser("tune-priors", parents=[_common(with_games=True)], help="σ por validación cruzada")
    p.add_argument("--games", required=True)
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True, help="Spec JSON con las σ resueltas")
    p.add_argument("--grid", nargs="+", help="Valores de σ (por defecto 10 20 40 80 160 320)")
    p.add_argument("--folds", type=int, default=DEFAULT_CV_FOLDS)
    _fit_flags(p)

    # curve
    p = sub.add_parser("curve", parents=[_common(with_games=True, with_format=True)], help="Curva de eficiencia muestral")
    p.add_argument("--task-games", dest="task_games", required=True)
    p.add_argument("--background-games", dest="background_games", required=True)
    p.add_argument("--spec-multi", dest="spec_multi", required=True)
    p.add_argument("--spec-uni", dest="spec_uni", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--budgets", type=int, nargs="+", required=True)
    p.add_argument("--out", required=True)
    _fit_flags(p)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = dict(vars(args))
    paths = {k: values.pop(k) for k in _PATH_ARGS if k in values}
    common = {k: values.pop(k) for k in ("command", "out", "seed", "threads", "log_db") if k in values}
    return RunConfig(
        paths=paths,
        fmt=values.pop("fmt", "csv"),
        skip_invalid=values.pop("skip_invalid", False),
        reset_log=not values.pop("no_reset_log", False),
        progress=not values.pop("no_progress", False),
        options={k: v for k, v in values.items() if k != "log_level"},
        **common,
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # --help (0) o error de uso (2)
        return int(exc.code or 0)

    logger.remove()
    logger.add(sys.stderr, level=args.log_level, format="<level>{level: <8}</level> {message}")

    cfg = config_from_args(args)
    start = time.perf_counter()
    res = run_command(cfg)
    elapsed = time.perf_counter() - start

    if res.error:
        print(f"[polyfit] ERROR ({res.exit_code}): {res.error}", file=sys.stderr)
    else:
        print(
            f"[polyfit] {res.command} | {res.summary} | salida={', '.join(res.outputs)} | "
            f"run_id={res.run_id} | tiempo={elapsed:.2f}s"
        )
    return res.exit_code


if __name__ == "__main__":
    sys.exit(main())
