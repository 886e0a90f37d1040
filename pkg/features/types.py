# features/types.py
from __future__ import annotations
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

from games.types import Game, Judge
from games.tags import TagExpr, parse_tag_expr
from utils.errors import RatingSpecError


class FeatureSource(str, Enum):
    BUILTIN = "builtin"
    EXTERNAL = "external"


class FeatureKind(str, Enum):
    LOG_LENGTH = "log_length"
    POSITION = "position"
    UNIQUE_TOKEN_RATIO = "unique_token_ratio"
    FLESCH_READING_EASE = "flesch_reading_ease"


@dataclass(frozen=True)
class FeatureDef:
    """
    Feature compartida f(g, lado). Los filtros (juez / tags) deciden en qué
    partidas aplica el término; fuera de ellas contribuye 0.
    """
    name: str
    source: FeatureSource = FeatureSource.EXTERNAL
    kind: Optional[FeatureKind] = None
    judge_filter: Optional[Judge] = None
    tag_filter: Optional[TagExpr] = None

    def __post_init__(self) -> None:
        if not self.name:
            raise RatingSpecError("la feature necesita nombre", field="name")
        object.__setattr__(self, "source", FeatureSource(self.source))
        if self.kind is not None:
            object.__setattr__(self, "kind", FeatureKind(self.kind))
        if self.judge_filter is not None:
            object.__setattr__(self, "judge_filter", Judge(self.judge_filter))
        if self.source is FeatureSource.BUILTIN and self.kind is None:
            raise RatingSpecError(f"la feature builtin '{self.name}' necesita 'kind'", field="kind")
        if self.source is FeatureSource.EXTERNAL and self.kind is not None:
            raise RatingSpecError(f"la feature externa '{self.name}' no admite 'kind'", field="kind")

    def applies_to(self, game: Game) -> bool:
        if self.judge_filter is not None and game.judge is not self.judge_filter:
            return False
        if self.tag_filter is not None and not self.tag_filter.evaluate(game):
            return False
        return True

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"name": self.name, "source": self.source.value}
        if self.kind is not None:
            out["kind"] = self.kind.value
        if self.judge_filter is not None:
            out["judge_filter"] = self.judge_filter.value
        if self.tag_filter is not None:
            out["tag_filter"] = str(self.tag_filter)
        return out

    @classmethod
    def from_dict(cls, d: Dict[str, Any], field: str = "feature") -> "FeatureDef":
        if not isinstance(d, dict):
            raise RatingSpecError("se esperaba un objeto", field=field)
        name = d.get("name")
        if not isinstance(name, str) or not name:
            raise RatingSpecError("nombre ausente o vacío", field=f"{field}.name")
        source = str(d.get("source", "external")).lower()
        if source not in {s.value for s in FeatureSource}:
            raise RatingSpecError(f"origen '{source}' desconocido", field=f"{field}.source")
        kind = d.get("kind")
        if kind is not None:
            kind = str(kind).lower()
            if kind not in {k.value for k in FeatureKind}:
                raise RatingSpecError(f"tipo '{kind}' desconocido", field=f"{field}.kind")
        judge = d.get("judge_filter")
        if judge is not None and judge not in {j.value for j in Judge}:
            raise RatingSpecError(f"juez '{judge}' desconocido", field=f"{field}.judge_filter")
        tag_filter = d.get("tag_filter")
        expr = parse_tag_expr(tag_filter, field=f"{field}.tag_filter") if tag_filter else None
        try:
            return cls(name=name, source=FeatureSource(source), kind=kind, judge_filter=judge, tag_filter=expr)
        except RatingSpecError as exc:
            raise RatingSpecError(str(exc), field=f"{field}.{exc.field or 'kind'}") from exc
