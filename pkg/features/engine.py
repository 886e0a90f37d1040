# features/engine.py
from __future__ import annotations
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Sequence, Tuple

from games.types import Game, GameDataset
from utils.errors import FeatureError
from .types import FeatureDef, FeatureKind, FeatureSource
from .extractors import (
    log_length,
    position_indicator,
    unique_token_ratio,
    flesch_reading_ease,
)

_TEXT_EXTRACTORS = {
    FeatureKind.LOG_LENGTH: log_length,
    FeatureKind.UNIQUE_TOKEN_RATIO: unique_token_ratio,
    FeatureKind.FLESCH_READING_EASE: flesch_reading_ease,
}


def feature_value(game: Game, fdef: FeatureDef, side: str, game_index: int | None = None) -> float:
    """
    Valor crudo f(g, lado). Usa el valor guardado en la partida si existe;
    la posición se deriva siempre sin necesidad de completions.
    """
    stored = game.features.get(fdef.name)
    if stored is not None:
        return stored[0] if side == "a" else stored[1]
    if fdef.kind is FeatureKind.POSITION:
        return position_indicator(game, side)
    raise FeatureError("valor ausente para un término aplicable", game_index=game_index, feature=fdef.name)


def feature_gap(game: Game, fdef: FeatureDef, game_index: int | None = None) -> float:
    """f(g, b) − f(g, a); 0 si el término no aplica a la partida."""
    if not fdef.applies_to(game):
        return 0.0
    return feature_value(game, fdef, "b", game_index) - feature_value(game, fdef, "a", game_index)


def _extract_one(game: Game, defs: Sequence[FeatureDef], index: int) -> Game:
    extra: Dict[str, Tuple[float, float]] = {}
    for fdef in defs:
        if not fdef.applies_to(game):
            continue
        if fdef.source is FeatureSource.EXTERNAL:
            if fdef.name not in game.features:
                raise FeatureError("falta el valor externo", game_index=index, feature=fdef.name)
            continue
        if fdef.kind is FeatureKind.POSITION:
            extra[fdef.name] = (position_indicator(game, "a"), position_indicator(game, "b"))
            continue
        if game.completion_a is None or game.completion_b is None:
            raise FeatureError("faltan las completions", game_index=index, feature=fdef.name)
        fn = _TEXT_EXTRACTORS[fdef.kind]
        try:
            extra[fdef.name] = (fn(game.completion_a), fn(game.completion_b))
        except FeatureError as exc:
            raise FeatureError(str(exc), game_index=index, feature=fdef.name) from exc
    return game.with_features(extra) if extra else game


def extract_features(dataset: GameDataset, defs: Sequence[FeatureDef], max_workers: int = 1) -> GameDataset:
    """
    Rellena Game.features para cada par (partida, definición) aplicable.
    Las externas solo se comprueban (pasan sin cambios). El orden de salida es el de entrada.
    """
    indices = range(len(dataset))
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            games = list(pool.map(lambda i: _extract_one(dataset[i], defs, i), indices))
    else:
        games = [_extract_one(dataset[i], defs, i) for i in indices]
    return GameDataset(tuple(games), dataset.skipped)
