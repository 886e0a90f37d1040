# games/simulate.py
from __future__ import annotations
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence, Tuple

import numpy as np

from utils.errors import DataError
from .types import Game, GameDataset, Judge, Outcome


class SamplerKind(str, Enum):
    NORMAL = "normal"
    UNIFORM = "uniform"
    POSITION = "position"
    CONSTANT = "constant"


@dataclass(frozen=True)
class FeatureSampler:
    """
    Regla de muestreo de una feature por lado.
      normal   -> N(loc, scale) independiente para a y b
      uniform  -> U(loc, loc + scale)
      position -> (1, 0) fijo
      constant -> (loc, loc)
    """
    kind: SamplerKind = SamplerKind.NORMAL
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SamplerKind(self.kind))
        if self.scale < 0:
            raise DataError("scale del sampler debe ser >= 0")

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind is SamplerKind.NORMAL:
            return rng.normal(self.loc, self.scale, size=(n, 2))
        if self.kind is SamplerKind.UNIFORM:
            return rng.uniform(self.loc, self.loc + self.scale, size=(n, 2))
        if self.kind is SamplerKind.POSITION:
            return np.tile([1.0, 0.0], (n, 1))
        return np.full((n, 2), float(self.loc))


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """Verdad conocida con la forma de un FitResult (spec + params + index)."""
    spec: Any
    params: Any

    @property
    def index(self):
        return self.params.index


def make_truth(
    spec,
    roster: Iterable[str],
    base_mean: float = 1200.0,
    base_spread: float = 100.0,
    alphas: Mapping[str, float] | None = None,
    modifier_sigma: float = 50.0,
    seed: int = 0,
) -> GroundTruth:
    """
    Bases ~ N(base_mean, base_spread); β ~ N(0, modifier_sigma); α fijados por nombre (0 si faltan).
    """
    from rating.engine import build_index
    from rating.types import Params

    index = build_index(spec, roster)
    rng = np.random.default_rng(seed)
    values = np.zeros(len(index))
    values[: index.n_models] = rng.normal(base_mean, base_spread, size=index.n_models)
    for name in index.shared:
        values[index.alpha_offset(name)] = float((alphas or {}).get(name, 0.0))
    n_beta = len(index) - index.beta_start
    if n_beta:
        values[index.beta_start:] = rng.normal(0.0, modifier_sigma, size=n_beta)
    return GroundTruth(spec=spec, params=Params(values, index))


def simulate_games(
    truth,
    roster: Sequence[str],
    tag_mix: Sequence[Tuple[Iterable[str], float]] = ((frozenset(), 1.0),),
    feature_gen: Mapping[str, FeatureSampler] | None = None,
    n: int = 1000,
    seed: int = 0,
    judge: Judge | str = Judge.HUMAN,
    draw_rate: float = 0.0,
) -> GameDataset:
    """
    Partidas sintéticas bajo `truth` (objeto con .spec y .params).
    Por partida: par uniforme ordenado, conjunto de tags según tag_mix, features por
    feature_gen y resultado ~ Bernoulli(p). Con draw_rate > 0 el resultado se sustituye
    por empate con esa probabilidad. Mismo seed -> mismo dataset.
    """
    from rating.design import compile_design
    from scipy.special import expit

    roster = sorted(set(roster))
    if not roster:
        raise DataError("roster vacío")
    if len(roster) < 2:
        raise DataError("se necesitan al menos dos modelos")
    if n < 1:
        raise DataError("n debe ser >= 1")
    if not 0.0 <= draw_rate < 1.0:
        raise DataError("draw_rate debe estar en [0, 1)")
    index = truth.params.index
    missing = [m for m in roster if not index.has_model(m)]
    if missing:
        raise DataError(f"la verdad no indexa los modelos: {missing}")

    tag_sets = [frozenset(t) for t, _ in tag_mix]
    probs = np.asarray([p for _, p in tag_mix], dtype=float)
    if not tag_sets or np.any(probs < 0) or probs.sum() <= 0:
        raise DataError("tag_mix inválido")
    probs = probs / probs.sum()
    feature_gen = dict(feature_gen or {})

    # orden fijo de llamadas al generador: pares, tags, features, resultados, empates
    rng = np.random.default_rng(seed)
    m = len(roster)
    a = rng.integers(0, m, size=n)
    b = rng.integers(0, m - 1, size=n)
    b = b + (b >= a)
    tag_pick = rng.choice(len(tag_sets), size=n, p=probs)
    feats = {name: feature_gen[name].sample(rng, n) for name in sorted(feature_gen)}

    judge = Judge(judge)
    games = [
        Game(
            model_a=roster[a[i]],
            model_b=roster[b[i]],
            outcome=Outcome.DRAW,
            judge=judge,
            tags=tag_sets[tag_pick[i]],
            features={name: (float(v[i, 0]), float(v[i, 1])) for name, v in feats.items()},
        )
        for i in range(n)
    ]

    design = compile_design(GameDataset(tuple(games)), truth.spec, index)
    p = expit(design.rating_gaps(truth.params.values) / truth.spec.scale)
    b_wins = rng.random(n) < p
    draws = rng.random(n) < draw_rate if draw_rate > 0 else np.zeros(n, dtype=bool)

    out = []
    for i, g in enumerate(games):
        if draws[i]:
            outcome = Outcome.DRAW
        else:
            outcome = Outcome.B_WINS if b_wins[i] else Outcome.A_WINS
        out.append(replace(g, outcome=outcome))
    return GameDataset(tuple(out))
