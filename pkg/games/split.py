# games/split.py
from __future__ import annotations
import math
from typing import Callable, Iterable, List, Sequence, Tuple, Union

import numpy as np

from utils.errors import DataError
from .types import Game, GameDataset
from .tags import TagExpr, parse_tag_expr


def split(dataset: GameDataset, fractions: Sequence[float], seed: int = 0) -> List[GameDataset]:
    """
    Partición barajada y disjunta. Los cortes se redondean sobre las fracciones acumuladas.
    """
    fractions = [float(f) for f in fractions]
    if not fractions or any(f <= 0 or not math.isfinite(f) for f in fractions):
        raise DataError("las fracciones deben ser positivas")
    if abs(math.fsum(fractions) - 1.0) > 1e-9:
        raise DataError(f"las fracciones deben sumar 1 (suman {math.fsum(fractions):.6g})")

    n = len(dataset)
    order = np.random.default_rng(seed).permutation(n)
    cuts = [int(round(c * n)) for c in np.cumsum(fractions)[:-1]] + [n]
    parts, start = [], 0
    for end in cuts:
        parts.append(dataset.subset(order[start:end]))
        start = end
    return parts


def kfold(dataset: GameDataset, folds: int, seed: int = 0) -> List[Tuple[GameDataset, GameDataset]]:
    """Devuelve (train, test) para cada fold; el orden de los folds es determinista."""
    if folds < 2:
        raise DataError("se necesitan al menos 2 folds")
    if len(dataset) < folds:
        raise DataError(f"{len(dataset)} partidas no bastan para {folds} folds")
    order = np.random.default_rng(seed).permutation(len(dataset))
    chunks = np.array_split(order, folds)
    out = []
    for k in range(folds):
        train_rows = np.concatenate([c for j, c in enumerate(chunks) if j != k])
        out.append((dataset.subset(np.sort(train_rows)), dataset.subset(np.sort(chunks[k]))))
    return out


def filter_games(dataset: GameDataset, expr: Union[str, TagExpr, Callable[[Game], bool]]) -> GameDataset:
    if isinstance(expr, str):
        expr = parse_tag_expr(expr)
    pred = expr.evaluate if hasattr(expr, "evaluate") else expr
    return GameDataset(tuple(g for g in dataset if pred(g)))


def concat(datasets: Iterable[GameDataset]) -> GameDataset:
    games: List[Game] = []
    for ds in datasets:
        games.extend(ds.games)
    return GameDataset(tuple(games))
