# utils/errors.py
from __future__ import annotations
from typing import Optional


class PolyfitError(Exception):
    """Error base del proyecto."""


class GameValidationError(PolyfitError, ValueError):
    """Partida o línea JSONL inválida. Indica línea y campo cuando se conocen."""

    def __init__(self, message: str, *, line: Optional[int] = None, field: Optional[str] = None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"línea {line}")
        if field is not None:
            where.append(f"campo '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class RatingSpecError(PolyfitError, ValueError):
    def __init__(self, message: str, *, field: Optional[str] = None):
        self.field = field
        prefix = f"[campo '{field}'] " if field else ""
        super().__init__(prefix + message)


class FeatureError(PolyfitError, ValueError):
    def __init__(self, message: str, *, game_index: Optional[int] = None, feature: Optional[str] = None):
        self.game_index = game_index
        self.feature = feature
        where = []
        if game_index is not None:
            where.append(f"partida {game_index}")
        if feature is not None:
            where.append(f"feature '{feature}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class DataError(PolyfitError, ValueError):
    """Datos insuficientes o parámetros de partición/presupuesto inválidos."""
