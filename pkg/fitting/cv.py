# fitting/cv.py
from __future__ import annotations
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from games.split import kfold
from games.types import GameDataset
from rating.design import compile_design
from rating.engine import extend_params
from rating.types import CV, RatingSpec
from utils.constants import DEFAULT_CV_FOLDS, DEFAULT_SIGMA_GRID
from utils.errors import DataError, RatingSpecError
from .engine import fit_map
from .objective import ObjectiveFunction
from .types import FitOptions, FitResult


def held_out_loss(fit: FitResult, test: GameDataset) -> float:
    """
    Pérdida logística media (solo verosimilitud, ponderada por peso) sobre `test`.
    Los modelos que el ajuste no ha visto se evalúan con las medias del prior.
    """
    if len(test) == 0:
        raise DataError("el conjunto de test está vacío")
    params = extend_params(fit.params, test.model_roster, fit.spec)
    design = compile_design(test, fit.spec, params.index)
    fn = ObjectiveFunction(design, np.zeros(len(params.index)), np.zeros(len(params.index)))
    return fn.likelihood(np.array(params.values)) / math.fsum(design.weights)


@dataclass(frozen=True)
class CvReport:
    term: str
    grid: Tuple[float, ...]
    losses: Tuple[float, ...]   # pérdida media held-out por σ del grid
    best: float

    def rows(self) -> List[Dict[str, float]]:
        return [{"term": self.term, "sigma": s, "loss": l} for s, l in zip(self.grid, self.losses)]


def _fold_loss(job: Tuple[GameDataset, GameDataset, RatingSpec], options: Optional[FitOptions]) -> float:
    train, test, spec = job
    fit = fit_map(train, spec, options)
    return held_out_loss(fit, test)


def _check_grid(grid: Sequence[float]) -> Tuple[float, ...]:
    grid = tuple(sorted(float(s) for s in grid))
    if not grid:
        raise RatingSpecError("el grid de σ está vacío", field="grid")
    if any(not (s > 0 and math.isfinite(s)) for s in grid):
        raise RatingSpecError("el grid solo admite σ > 0 finitas", field="grid")
    return grid


def cross_validate_sigma(
    dataset: GameDataset,
    spec: RatingSpec,
    term_name: str,
    grid: Sequence[float] = DEFAULT_SIGMA_GRID,
    folds: int = DEFAULT_CV_FOLDS,
    seed: int = 0,
    options: Optional[FitOptions] = None,
    max_workers: int = 1,
) -> CvReport:
    """
    k-fold sobre el grid para el término `term_name` (con σ 'cv').
    Los demás términos aún pendientes se fijan al máximo del grid mientras tanto.
    Empates -> la σ más pequeña.
    """
    if spec.term(term_name).prior_sigma != CV:
        raise RatingSpecError(f"el término '{term_name}' no tiene σ 'cv'", field="prior_sigma")
    grid = _check_grid(grid)
    partitions = kfold(dataset, folds, seed)

    base_spec = spec
    for other in spec.pending_cv():
        if other != term_name:
            base_spec = base_spec.with_sigma(other, grid[-1])

    jobs = [
        (train, test, base_spec.with_sigma(term_name, sigma))
        for sigma in grid
        for train, test in partitions
    ]
    run = partial(_fold_loss, options=options)
    if max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as executor:
            fold_losses = list(executor.map(run, jobs))
    else:
        fold_losses = [run(job) for job in jobs]

    k = len(partitions)
    losses = tuple(math.fsum(fold_losses[i * k:(i + 1) * k]) / k for i in range(len(grid)))
    best_i = 0
    for i, loss in enumerate(losses):
        if loss < losses[best_i]:
            best_i = i
    logger.info(f"[cv] {term_name}: σ = {grid[best_i]:g} (pérdida {losses[best_i]:.6f})")
    return CvReport(term=term_name, grid=grid, losses=losses, best=grid[best_i])


def tune_prior_sigma(
    dataset: GameDataset,
    spec: RatingSpec,
    term_name: str,
    grid: Sequence[float] = DEFAULT_SIGMA_GRID,
    folds: int = DEFAULT_CV_FOLDS,
    seed: int = 0,
    options: Optional[FitOptions] = None,
    max_workers: int = 1,
) -> float:
    return cross_validate_sigma(dataset, spec, term_name, grid, folds, seed, options, max_workers).best


def resolve_cv_sigmas_with_reports(
    dataset: GameDataset,
    spec: RatingSpec,
    grid: Sequence[float] = DEFAULT_SIGMA_GRID,
    folds: int = DEFAULT_CV_FOLDS,
    seed: int = 0,
    options: Optional[FitOptions] = None,
    max_workers: int = 1,
) -> Tuple[RatingSpec, List[CvReport]]:
    """Resuelve todas las σ 'cv' en orden de declaración (compartidos primero, luego modificadores)."""
    reports: List[CvReport] = []
    for name in spec.pending_cv():
        report = cross_validate_sigma(dataset, spec, name, grid, folds, seed, options, max_workers)
        spec = spec.with_sigma(name, report.best)
        reports.append(report)
    return spec, reports


def resolve_cv_sigmas(
    dataset: GameDataset,
    spec: RatingSpec,
    grid: Sequence[float] = DEFAULT_SIGMA_GRID,
    folds: int = DEFAULT_CV_FOLDS,
    seed: int = 0,
    options: Optional[FitOptions] = None,
    max_workers: int = 1,
) -> RatingSpec:
    return resolve_cv_sigmas_with_reports(dataset, spec, grid, folds, seed, options, max_workers)[0]
