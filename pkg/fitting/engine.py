# fitting/engine.py
from __future__ import annotations
from typing import Callable, Iterable, List, Optional, Tuple

import numpy as np
from loguru import logger
from scipy.optimize import minimize

from games.types import GameDataset
from rating.design import GameDesign, compile_design
from rating.engine import build_index, prior_means, prior_vectors
from rating.types import ParamIndex, Params, RatingSpec
from utils.errors import DataError, RatingSpecError
from .objective import ObjectiveFunction
from .types import FitOptions, FitResult, Optimizer

# Reinicios de L-BFGS-B cuando se detiene antes de alcanzar la tolerancia (p. ej. por
# pérdida de precisión en la búsqueda lineal); cada reinicio descarta la memoria.
MAX_RESTARTS = 3


def _initial_values(index: ParamIndex, spec: RatingSpec, given: Optional[Params]) -> np.ndarray:
    x0 = prior_means(spec, index)
    if given is None:
        return x0
    copied = 0
    for pos, name in enumerate(index.names):
        try:
            x0[pos] = given[name]
            copied += 1
        except KeyError:
            continue
    logger.debug(f"[fitting] punto inicial dado: {copied}/{len(index)} parámetros copiados")
    return x0


# ======================================================
# Optimizadores (en unidades escaladas u: θ = x0 + scale·u)
# ======================================================
def _run_lbfgs(fg, n: int, tol_u: float, max_iterations: int, on_iter) -> Tuple[np.ndarray, int]:
    u = np.zeros(n)
    used = 0
    for attempt in range(MAX_RESTARTS + 1):
        remaining = max_iterations - used
        if remaining <= 0:
            break
        res = minimize(
            fg,
            u,
            jac=True,
            method="L-BFGS-B",
            callback=on_iter,
            options={
                "maxiter": remaining,
                "maxfun": max(15000, 20 * remaining),
                "gtol": tol_u,
                "ftol": 0.0,
                "maxcor": 20,
                "maxls": 50,
            },
        )
        u = res.x
        used += int(res.nit)
        _, g = fg(u)
        if np.max(np.abs(g), initial=0.0) <= tol_u:
            break
        if res.nit == 0:
            break  # sin progreso posible
        logger.debug(f"[fitting] L-BFGS-B parado ({res.message}); reinicio {attempt + 1}")
    return u, used


def _armijo_backtracking(fg, x, p, f0, g0, alpha0=1.0, c1=1e-4, tau=0.5, max_bt=40) -> Optional[float]:
    """Paso que cumple f(x + αp) <= f(x) + c1·α·gᵀp, o None si no se encuentra."""
    gtp = float(np.dot(g0, p))
    alpha = float(alpha0)
    for _ in range(max_bt):
        f_try, _ = fg(x + alpha * p)
        if f_try <= f0 + c1 * alpha * gtp:
            return alpha
        alpha *= tau
    return None


def _run_gradient_descent(fg, n: int, tol_u: float, max_iterations: int, on_iter) -> Tuple[np.ndarray, int]:
    u = np.zeros(n)
    alpha = 1.0
    f, g = fg(u)
    for k in range(max_iterations):
        if np.max(np.abs(g), initial=0.0) <= tol_u:
            return u, k
        step = _armijo_backtracking(fg, u, -g, f, g, alpha0=min(2.0 * alpha, 1e6))
        if step is None:
            return u, k
        alpha = step
        u = u - alpha * g
        f, g = fg(u)
        on_iter(u)
    return u, max_iterations


# ======================================================
# Ajuste MAP
# ======================================================
def fit_design(
    design: GameDesign,
    spec: RatingSpec,
    options: Optional[FitOptions] = None,
) -> FitResult:
    """Minimiza la pérdida penalizada sobre un dataset ya compilado."""
    options = options or FitOptions()
    index = design.index
    means, inv_var = prior_vectors(spec, index)
    fn = ObjectiveFunction(design, means, inv_var)

    scale = spec.scale
    x0 = _initial_values(index, spec, options.initial_params)
    tol = options.gradient_tolerance

    def fg(u: np.ndarray) -> Tuple[float, np.ndarray]:
        f, g = fn.value_and_grad(x0 + scale * u)
        return f, scale * g

    trace: List[float] = [fn.value_and_grad(x0)[0]]

    def on_iter(u: np.ndarray) -> None:
        trace.append(fn.value(x0 + scale * u))

    n = len(index)
    if options.optimizer is Optimizer.LBFGS:
        u, iterations = _run_lbfgs(fg, n, tol * scale, int(options.max_iterations), on_iter)
    else:
        u, iterations = _run_gradient_descent(fg, n, tol * scale, int(options.max_iterations), on_iter)

    values = x0 + scale * u
    f, g = fn.value_and_grad(values)
    max_grad = float(np.max(np.abs(g), initial=0.0))
    converged = max_grad <= tol
    if fn.clamp_count:
        logger.warning(f"[fitting] {fn.clamp_count} partida(s) con probabilidad recortada a [1e-15, 1−1e-15]")
    if not converged:
        logger.warning(f"[fitting] sin convergencia tras {iterations} iteraciones (max|∇| = {max_grad:.3g})")

    return FitResult(
        params=Params(values, index),
        index=index,
        objective=f,
        iterations=iterations,
        converged=converged,
        spec=spec,
        max_gradient=max_grad,
        clamp_count=fn.clamp_count,
        trace=trace,
    )


def fit_map(
    dataset: GameDataset,
    spec: RatingSpec,
    options: Optional[FitOptions] = None,
    roster: Optional[Iterable[str]] = None,
) -> FitResult:
    """
    Ajuste MAP: argmin pérdida logística + prior gaussiano.
    `roster` amplía el conjunto de modelos (los que no juegan quedan en su prior);
    con roster se admite un dataset vacío y el resultado son las medias del prior.
    """
    pending = spec.pending_cv()
    if pending:
        raise RatingSpecError(
            f"resolver antes las σ por validación cruzada: {', '.join(pending)}", field="prior_sigma"
        )
    models = set(dataset.model_roster)
    if roster is not None:
        models |= set(roster)
    if not models:
        raise DataError("no hay partidas que ajustar")
    index = build_index(spec, models)
    return fit_design(compile_design(dataset, spec, index), spec, options)
