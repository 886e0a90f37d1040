# analysis/leaderboard.py
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple, Union

import pandas as pd
from loguru import logger

from fitting.engine import fit_map
from fitting.types import FitOptions, FitResult
from games.split import filter_games
from games.tags import TagExpr, parse_tag_expr
from games.types import GameDataset
from rating.types import RatingSpec
from utils.constants import DEFAULT_ANCHOR_VALUE
from utils.errors import DataError
from .bootstrap import BootstrapResult
from .render import as_markdown_table, fmt_pm

Uncertainties = Union[BootstrapResult, Mapping[str, float], None]


@dataclass(frozen=True)
class LeaderboardRow:
    rank: int
    model: str
    rating: float
    rating_std: float
    modifiers: Dict[str, Tuple[float, float]] = field(default_factory=dict)  # nombre -> (valor, std)


@dataclass(frozen=True)
class Leaderboard:
    rows: Tuple[LeaderboardRow, ...]
    modifier_names: Tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.rows)

    def to_frame(self) -> pd.DataFrame:
        records = []
        for r in self.rows:
            rec = {"rank": r.rank, "model": r.model, "rating": r.rating, "rating_std": r.rating_std}
            for name in self.modifier_names:
                value, std = r.modifiers[name]
                rec[name] = value
                rec[f"{name}_std"] = std
            records.append(rec)
        columns = ["rank", "model", "rating", "rating_std"]
        for name in self.modifier_names:
            columns += [name, f"{name}_std"]
        return pd.DataFrame.from_records(records, columns=columns)

    def to_markdown(self) -> str:
        headers = ["rank", "model", "rating", *self.modifier_names]
        rows = [
            [r.rank, r.model, fmt_pm(r.rating, r.rating_std)]
            + [fmt_pm(*r.modifiers[name], signed=True) for name in self.modifier_names]
            for r in self.rows
        ]
        return as_markdown_table(headers, rows)


def _std_lookup(uncertainties: Uncertainties) -> Mapping[str, float]:
    if uncertainties is None:
        return {}
    if isinstance(uncertainties, BootstrapResult):
        return uncertainties.as_dict()
    return uncertainties


def build_leaderboard(
    fit: FitResult,
    uncertainties: Uncertainties = None,
    anchor: Optional[Tuple[str, float]] = None,
) -> Leaderboard:
    """
    Filas ordenadas por rating base descendente (empates por nombre), rangos 1..k.
    `anchor=(modelo, valor)` desplaza rígidamente todas las bases para que el modelo
    quede en `valor`; solo afecta al informe.
    """
    params = fit.params
    index = fit.index
    stds = _std_lookup(uncertainties)

    shift = 0.0
    if anchor is not None:
        model, value = anchor
        if not index.has_model(model):
            raise DataError(f"el modelo ancla '{model}' no está en el ajuste")
        shift = float(value) - params.base(model)

    ordered = sorted(index.models, key=lambda m: (-params.base(m), m))
    rows = []
    for rank, m in enumerate(ordered, start=1):
        mods = {
            t: (params.beta(m, t), abs(float(stds.get(f"beta:{m}:{t}", 0.0))))
            for t in index.modifiers
        }
        rows.append(LeaderboardRow(
            rank=rank,
            model=m,
            rating=params.base(m) + shift,
            rating_std=abs(float(stds.get(f"base:{m}", 0.0))),
            modifiers=mods,
        ))
    return Leaderboard(rows=tuple(rows), modifier_names=tuple(index.modifiers))


def univariate_task_leaderboard(
    dataset: GameDataset,
    tasks: Mapping[str, Union[str, TagExpr]],
    anchor: Tuple[str, float] = ("", DEFAULT_ANCHOR_VALUE),
    options: Optional[FitOptions] = None,
    spec: Optional[RatingSpec] = None,
) -> Leaderboard:
    """
    Línea base univariante: un ajuste solo-base sobre todo el dataset y otro por tarea,
    todos anclados en `anchor`. La columna de cada tarea es rating_tarea − rating_global.
    Sin incertidumbre (std 0).
    """
    spec = (spec or RatingSpec()).base_only()
    roster = dataset.sorted_roster()
    model, value = anchor
    if model not in roster:
        raise DataError(f"el modelo ancla '{model}' no está en el dataset")

    def anchored(ds: GameDataset) -> Dict[str, float]:
        fit = fit_map(ds, spec, options, roster=roster)
        shift = float(value) - fit.params.base(model)
        return {m: fit.params.base(m) + shift for m in roster}

    overall = anchored(dataset)
    per_task: Dict[str, Dict[str, float]] = {}
    for name, expr in tasks.items():
        expr = parse_tag_expr(expr) if isinstance(expr, str) else expr
        subset = filter_games(dataset, expr)
        if len(subset) == 0:
            logger.warning(f"[leaderboard] la tarea '{name}' no tiene partidas; modificadores a 0")
        elif model not in subset.model_roster:
            logger.warning(f"[leaderboard] el ancla '{model}' no juega en '{name}'; queda en su prior")
        per_task[name] = anchored(subset)

    ordered = sorted(roster, key=lambda m: (-overall[m], m))
    rows = tuple(
        LeaderboardRow(
            rank=rank,
            model=m,
            rating=overall[m],
            rating_std=0.0,
            modifiers={name: (per_task[name][m] - overall[m], 0.0) for name in tasks},
        )
        for rank, m in enumerate(ordered, start=1)
    )
    return Leaderboard(rows=rows, modifier_names=tuple(tasks))
