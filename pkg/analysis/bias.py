# analysis/bias.py
from __future__ import annotations
import math
from dataclasses import dataclass
from typing import List, Mapping, Optional, Tuple, Union

import pandas as pd

from features.engine import feature_gap
from fitting.types import FitResult
from games.types import GameDataset
from utils.errors import DataError
from .bootstrap import BootstrapResult
from .render import as_markdown_table, fmt_pm


def mean_abs_gap(fit: FitResult, dataset: GameDataset, term: str) -> Tuple[float, int]:
    """Media de |f(g, a) − f(g, b)| sobre las partidas donde aplica el término."""
    fdef = fit.spec.shared_term(term).feature
    gaps = [abs(feature_gap(g, fdef, i)) for i, g in enumerate(dataset) if fdef.applies_to(g)]
    if not gaps:
        raise DataError(f"ninguna partida aplica al término '{term}'")
    return math.fsum(gaps) / len(gaps), len(gaps)


def bias_influence(fit: FitResult, dataset: GameDataset, term: str) -> float:
    """
    E_g(α · |f(g, a) − f(g, b)|) sobre las partidas aplicables.
    Conserva el signo de α.
    """
    gap, _ = mean_abs_gap(fit, dataset, term)
    return fit.params.alpha(term) * gap


@dataclass(frozen=True)
class BiasRow:
    term: str
    coefficient: float
    coefficient_std: float
    influence: float
    influence_std: float
    games: int


@dataclass(frozen=True)
class BiasReport:
    rows: Tuple[BiasRow, ...]

    def to_frame(self) -> pd.DataFrame:
        columns = ["term", "coefficient", "coefficient_std", "influence", "influence_std", "games"]
        return pd.DataFrame.from_records([r.__dict__ for r in self.rows], columns=columns)

    def to_markdown(self) -> str:
        rows = [
            [r.term, fmt_pm(r.coefficient, r.coefficient_std, digits=2),
             fmt_pm(r.influence, r.influence_std, digits=2), r.games]
            for r in self.rows
        ]
        return as_markdown_table(["term", "coefficient", "influence", "games"], rows)


def bias_report(
    fit: FitResult,
    dataset: GameDataset,
    stds: Union[BootstrapResult, Mapping[str, float], None] = None,
) -> BiasReport:
    """Una fila por término compartido; influence_std = media|Δf| · std(α)."""
    if isinstance(stds, BootstrapResult):
        stds = stds.as_dict()
    stds = stds or {}
    rows: List[BiasRow] = []
    for term in fit.index.shared:
        gap, n = mean_abs_gap(fit, dataset, term)
        alpha = fit.params.alpha(term)
        alpha_std = abs(float(stds.get(f"alpha:{term}", 0.0)))
        rows.append(BiasRow(
            term=term,
            coefficient=alpha,
            coefficient_std=alpha_std,
            influence=alpha * gap,
            influence_std=gap * alpha_std,
            games=n,
        ))
    return BiasReport(rows=tuple(rows))
