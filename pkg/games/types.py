# games/types.py
from __future__ import annotations
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

from utils.errors import GameValidationError

FeaturePair = Tuple[float, float]


class Outcome(str, Enum):
    A_WINS = "model_a"
    B_WINS = "model_b"
    DRAW = "draw"

    @property
    def score(self) -> float:
        """g_r: 1 si gana model_b, 0 si gana model_a, 0.5 en empate."""
        return {Outcome.A_WINS: 0.0, Outcome.B_WINS: 1.0, Outcome.DRAW: 0.5}[self]

    def flipped(self) -> "Outcome":
        if self is Outcome.A_WINS:
            return Outcome.B_WINS
        if self is Outcome.B_WINS:
            return Outcome.A_WINS
        return self


class Judge(str, Enum):
    HUMAN = "human"
    LLM = "llm"
    BENCHMARK = "benchmark"


@dataclass(frozen=True)
class Game:
    """
    Una comparación juzgada entre dos modelos.
    model_a ocupa la primera posición; g_r = 1 significa que gana model_b.
    """
    model_a: str
    model_b: str
    outcome: Outcome
    judge: Judge = Judge.HUMAN
    tags: frozenset = frozenset()
    features: Mapping[str, FeaturePair] = field(default_factory=dict)
    completion_a: Optional[str] = None
    completion_b: Optional[str] = None
    weight: float = 1.0

    def __post_init__(self) -> None:
        if self.model_a == self.model_b:
            raise GameValidationError("model_a y model_b deben ser distintos", field="model_b")
        object.__setattr__(self, "outcome", Outcome(self.outcome))
        object.__setattr__(self, "judge", Judge(self.judge))
        object.__setattr__(self, "tags", frozenset(self.tags))
        feats = {}
        for name, pair in self.features.items():
            a, b = (float(pair[0]), float(pair[1]))
            if not (math.isfinite(a) and math.isfinite(b)):
                raise GameValidationError(f"valor no finito en la feature '{name}'", field="features")
            feats[name] = (a, b)
        object.__setattr__(self, "features", feats)
        if not (math.isfinite(self.weight) and self.weight > 0):
            raise GameValidationError("el peso debe ser positivo y finito", field="weight")

    @property
    def score(self) -> float:
        return self.outcome.score

    def side_of(self, model: str) -> str:
        if model == self.model_a:
            return "a"
        if model == self.model_b:
            return "b"
        raise GameValidationError(f"el modelo '{model}' no juega esta partida", field="model")

    def completion(self, side: str) -> Optional[str]:
        return self.completion_a if side == "a" else self.completion_b

    def with_features(self, extra: Mapping[str, FeaturePair]) -> "Game":
        merged = dict(self.features)
        merged.update(extra)
        return replace(self, features=merged)

    def swapped(self) -> "Game":
        """Misma partida con las posiciones intercambiadas."""
        return replace(
            self,
            model_a=self.model_b,
            model_b=self.model_a,
            outcome=self.outcome.flipped(),
            features={k: (b, a) for k, (a, b) in self.features.items()},
            completion_a=self.completion_b,
            completion_b=self.completion_a,
        )

    def sort_key(self) -> tuple:
        """Clave total y estable (no depende del orden del fichero)."""
        return (
            self.model_a, self.model_b, self.outcome.value, self.judge.value,
            tuple(sorted(self.tags)), tuple(sorted(self.features.items())),
            self.completion_a or "", self.completion_b or "", self.weight,
        )


@dataclass(frozen=True)
class GameDataset:
    """
    Lista ordenada e inmutable de partidas.
    `skipped` guarda (objeto, motivo) de las unidades descartadas al construirla.
    """
    games: Tuple[Game, ...] = ()
    skipped: Tuple[Tuple[Any, str], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "games", tuple(self.games))
        object.__setattr__(self, "skipped", tuple(self.skipped))

    @classmethod
    def from_games(cls, games: Iterable[Game]) -> "GameDataset":
        return cls(tuple(games))

    @property
    def model_roster(self) -> frozenset:
        roster = set()
        for g in self.games:
            roster.add(g.model_a)
            roster.add(g.model_b)
        return frozenset(roster)

    def sorted_roster(self) -> list[str]:
        return sorted(self.model_roster)

    def __len__(self) -> int:
        return len(self.games)

    def __iter__(self) -> Iterator[Game]:
        return iter(self.games)

    def __getitem__(self, i: int) -> Game:
        return self.games[i]

    def subset(self, rows: Sequence[int]) -> "GameDataset":
        return GameDataset(tuple(self.games[int(i)] for i in rows))

    def canonical(self) -> "GameDataset":
        return GameDataset(tuple(sorted(self.games, key=Game.sort_key)))


@dataclass(frozen=True)
class BenchmarkRecord:
    """Una pregunta de benchmark con el acierto de cada modelo."""
    question_id: str
    correctness: Mapping[str, bool]

    def __post_init__(self) -> None:
        object.__setattr__(self, "correctness", {str(k): bool(v) for k, v in self.correctness.items()})
