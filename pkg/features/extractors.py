# features/extractors.py
from __future__ import annotations
import math
import re

from utils.errors import FeatureError

_VOWEL_GROUP_RE = re.compile(r"[aeiouy]+")
_SENTENCE_END_RE = re.compile(r"[.!?]+")
_NON_LETTER_RE = re.compile(r"[^a-z]")


def log_length(text: str) -> float:
    """Logaritmo natural de la longitud en caracteres (puntos de código)."""
    if not text:
        raise FeatureError("texto vacío: la longitud 0 no tiene logaritmo")
    return math.log(len(text))


def position_indicator(game, side: str) -> float:
    """1.0 para la primera posición (model_a), 0.0 para la segunda."""
    if side not in ("a", "b"):
        raise FeatureError(f"lado '{side}' inválido (a/b)")
    return 1.0 if side == "a" else 0.0


def unique_token_ratio(text: str) -> float:
    tokens = (text or "").lower().split()
    if not tokens:
        raise FeatureError("el texto no tiene tokens")
    return len(set(tokens)) / len(tokens)


def count_syllables(word: str) -> int:
    """
    Grupos máximos de vocales (a, e, i, o, u, y), mínimo 1 por palabra.
    Una 'e' final muda resta un grupo si la palabra tiene al menos dos.
    """
    w = _NON_LETTER_RE.sub("", word.lower())
    groups = len(_VOWEL_GROUP_RE.findall(w))
    # la 'e' final cuenta como muda aunque cierre un grupo de varias vocales (value, agree)
    if groups >= 2 and w.endswith("e"):
        groups -= 1
    return max(groups, 1)


def flesch_reading_ease(text: str) -> float:
    """
    206.835 − 1.015·(palabras/frases) − 84.6·(sílabas/palabras).
    Frases = secuencias de {., !, ?}; palabras = separación por espacios.
    """
    words = (text or "").split()
    sentences = len(_SENTENCE_END_RE.findall(text or ""))
    if not words:
        raise FeatureError("el texto no tiene palabras")
    if sentences == 0:
        raise FeatureError("el texto no tiene frases (falta '.', '!' o '?')")
    syllables = sum(count_syllables(w) for w in words)
    return 206.835 - 1.015 * (len(words) / sentences) - 84.6 * (syllables / len(words))
