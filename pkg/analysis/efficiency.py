# analysis/efficiency.py
from __future__ import annotations
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from tqdm import tqdm

from fitting.cv import held_out_loss, resolve_cv_sigmas
from fitting.engine import fit_map
from fitting.types import FitOptions
from games.split import concat
from games.types import GameDataset
from rating.types import RatingSpec
from utils.errors import DataError

_LOG_FLOOR = 1e-12


@dataclass(frozen=True)
class EfficiencyPoint:
    budget: int
    normalized_loss_multivariate: float
    normalized_loss_univariate: float
    gain: float = 0.0


@dataclass(frozen=True)
class EfficiencyCurve:
    points: Tuple[EfficiencyPoint, ...]
    oracle_loss_multivariate: float
    oracle_loss_univariate: float

    @property
    def budgets(self) -> List[int]:
        return [p.budget for p in self.points]

    def to_frame(self) -> pd.DataFrame:
        columns = ["budget", "normalized_loss_multivariate", "normalized_loss_univariate", "gain"]
        return pd.DataFrame.from_records([p.__dict__ for p in self.points], columns=columns)


def _check_budgets(budgets: Sequence[int], pool: int) -> List[int]:
    budgets = [int(b) for b in budgets]
    if not budgets:
        raise DataError("no hay presupuestos")
    if any(b < 0 for b in budgets):
        raise DataError("los presupuestos deben ser >= 0")
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise DataError("los presupuestos deben ser estrictamente crecientes")
    if budgets[-1] > pool:
        raise DataError(f"presupuesto {budgets[-1]} mayor que el pool de tarea ({pool})")
    return budgets


def efficiency_gain(curve: EfficiencyCurve, budget: int) -> float:
    """
    gain(b) = (b_uni(ℓ) − b) / b_uni(ℓ), con ℓ la pérdida multivariante en b y b_uni(ℓ)
    el presupuesto univariante que alcanza ℓ: interpolación log-log entre los puntos que
    lo rodean o, si la curva univariante no llega, extrapolación de la ley de potencia
    que pasa por sus dos últimos puntos. Recortado a [0, 1).
    """
    point = next((p for p in curve.points if p.budget == budget), None)
    if point is None:
        raise DataError(f"el presupuesto {budget} no está en la curva")
    if budget <= 0:
        return 0.0
    target = max(point.normalized_loss_multivariate, _LOG_FLOOR)
    uni = [(p.budget, max(p.normalized_loss_univariate, _LOG_FLOOR)) for p in curve.points if p.budget > 0]

    b_uni: Optional[float] = None
    for i, (b, loss) in enumerate(uni):
        if loss <= target:
            if i == 0:
                b_uni = float(b)
            else:
                b0, l0 = uni[i - 1]
                lb0, lb1 = math.log(b0), math.log(b)
                ll0, ll1 = math.log(l0), math.log(loss)
                t = 0.0 if ll1 == ll0 else (math.log(target) - ll0) / (ll1 - ll0)
                b_uni = math.exp(lb0 + t * (lb1 - lb0))
            break

    if b_uni is None and len(uni) >= 2:
        # ley de potencia de la cola, anclada en el último punto medido
        xs = np.log([b for b, _ in uni[-2:]])
        ys = np.log([l for _, l in uni[-2:]])
        slope, _ = np.polyfit(xs, ys, 1)
        if slope < 0:
            b_uni = math.exp(xs[-1] + (math.log(target) - ys[-1]) / slope)
    if b_uni is None or b_uni <= 0:
        return 0.0
    gain = (b_uni - budget) / b_uni
    return float(min(max(gain, 0.0), np.nextafter(1.0, 0.0)))


def sample_efficiency_curve(
    task_games: GameDataset,
    background_games: GameDataset,
    spec_multi: RatingSpec,
    spec_uni: RatingSpec,
    budgets: Sequence[int],
    test: GameDataset,
    seed: int = 0,
    options: Optional[FitOptions] = None,
    max_workers: int = 1,
    progress: bool = False,
) -> EfficiencyCurve:
    """
    Para cada presupuesto b (prefijos de una única permutación del pool de tarea):
      multivariante = fondo + primeras b partidas de tarea, con spec_multi
      univariante   = solo las primeras b, con spec_uni
    Cada curva se normaliza con su propio oráculo: la misma spec ajustada sobre el
    mayor conjunto de entrenamiento de esa curva más el propio test. Las σ 'cv' de
    spec_multi se resuelven en cada presupuesto; el oráculo multivariante reutiliza
    las del mayor presupuesto.
    """
    budgets = _check_budgets(budgets, len(task_games))
    if len(test) == 0:
        raise DataError("el conjunto de test está vacío")
    roster = sorted(task_games.model_roster | background_games.model_roster | test.model_roster)

    order = np.random.default_rng(seed).permutation(len(task_games))
    raw: List[Tuple[int, float, float]] = []
    for b in tqdm(budgets, disable=not progress, desc="curve"):
        task_part = task_games.subset(order[:b])
        multi_train = concat([background_games, task_part])
        spec_b = spec_multi
        if spec_b.pending_cv():
            spec_b = resolve_cv_sigmas(multi_train, spec_b, seed=seed, options=options, max_workers=max_workers)
        multi = fit_map(multi_train, spec_b, options, roster=roster)
        uni = fit_map(task_part, spec_uni, options, roster=roster)
        raw.append((b, held_out_loss(multi, test), held_out_loss(uni, test)))
        logger.debug(f"[curve] b={b}: multi={raw[-1][1]:.6f} uni={raw[-1][2]:.6f}")

    # el oráculo contiene todo lo que ve la curva en su último punto, así que no lo supera
    oracle_multi = held_out_loss(fit_map(concat([multi_train, test]), spec_b, options, roster=roster), test)
    oracle_uni = held_out_loss(fit_map(concat([task_part, test]), spec_uni, options, roster=roster), test)
    logger.info(f"[curve] pérdida del oráculo: multi={oracle_multi:.6f} uni={oracle_uni:.6f}")

    points = []
    for b, loss_multi, loss_uni in raw:
        point = EfficiencyPoint(
            budget=b,
            normalized_loss_multivariate=loss_multi - oracle_multi,
            normalized_loss_univariate=loss_uni - oracle_uni,
        )
        logger.info(
            f"[curve] b={b}: multi={point.normalized_loss_multivariate:.6f} "
            f"uni={point.normalized_loss_univariate:.6f}"
        )
        points.append(point)

    curve = EfficiencyCurve(tuple(points), oracle_multi, oracle_uni)
    with_gain = tuple(replace(p, gain=efficiency_gain(curve, p.budget)) for p in points)
    return EfficiencyCurve(with_gain, oracle_multi, oracle_uni)
