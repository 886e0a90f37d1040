# games/benchmark.py
from __future__ import annotations
import itertools
from enum import Enum
from typing import List, Sequence, Tuple, Any

import numpy as np
from loguru import logger

from utils.errors import DataError
from .types import BenchmarkRecord, Game, GameDataset, Judge, Outcome


class PairingStrategy(str, Enum):
    ALL_PAIRS = "all-pairs"      # cada par no ordenado con ambas respuestas -> una partida
    RANDOM_PAIR = "random-pair"  # un único par aleatorio por pregunta


def _pair_outcome(correct_a: bool, correct_b: bool) -> Outcome:
    if correct_a and not correct_b:
        return Outcome.A_WINS
    if correct_b and not correct_a:
        return Outcome.B_WINS
    return Outcome.DRAW


def convert_benchmark(
    records: Sequence[BenchmarkRecord],
    name: str = "benchmark",
    pairing: PairingStrategy | str = PairingStrategy.ALL_PAIRS,
    seed: int = 0,
) -> GameDataset:
    """
    Convierte resultados de acierto/fallo en partidas de preferencia:
    acierta A y falla B -> gana A; al revés -> gana B; mismo resultado -> empate.
    La posición (quién es model_a) se sortea con la semilla.
    Las preguntas con menos de dos modelos se descartan y se cuentan en `skipped`.
    """
    if not records:
        raise DataError("no hay registros de benchmark que convertir")
    pairing = PairingStrategy(pairing)
    rng = np.random.default_rng(seed)
    tag = f"benchmark:{name}"

    games: List[Game] = []
    skipped: List[Tuple[Any, str]] = []
    for rec in records:
        models = sorted(rec.correctness)
        if len(models) < 2:
            skipped.append((rec.question_id, "menos de dos modelos"))
            continue
        pairs = list(itertools.combinations(models, 2))
        if pairing is PairingStrategy.RANDOM_PAIR:
            pairs = [pairs[int(rng.integers(len(pairs)))]]
        for m0, m1 in pairs:
            if rng.random() < 0.5:
                m0, m1 = m1, m0
            games.append(Game(
                model_a=m0,
                model_b=m1,
                outcome=_pair_outcome(rec.correctness[m0], rec.correctness[m1]),
                judge=Judge.BENCHMARK,
                tags=frozenset({tag}),
            ))

    if skipped:
        logger.warning(f"[convert_benchmark] {len(skipped)} preguntas descartadas (menos de dos modelos)")
    return GameDataset(tuple(games), tuple(skipped))
