# utils/seeds.py
from __future__ import annotations
import hashlib


def derive_seed(stream: str, seed: int) -> int:
    """
    Semilla derivada de forma determinista para un flujo con nombre
    (p.ej. el nombre del comando). Añadir flujos nuevos no altera los existentes.
    """
    digest = hashlib.sha256(stream.encode("utf-8")).hexdigest()
    return (int(digest[:8], 16) + int(seed)) % (2**32)
