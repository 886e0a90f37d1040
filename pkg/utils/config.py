from __future__ import annotations
import os
from dataclasses import dataclass
from dotenv import load_dotenv

load_dotenv()


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    return int(raw)


@dataclass(frozen=True)
class Settings:
    # Paralelismo (CV y bootstrap); --threads tiene prioridad
    POLYFIT_THREADS: int = _int_env("POLYFIT_THREADS", os.cpu_count() or 1)
    POLYFIT_SEED: int = _int_env("POLYFIT_SEED", 0)

    # Log de ejecuciones (siempre SQLite)
    POLYFIT_LOG_DB: str = os.getenv("POLYFIT_LOG_DB", "./data/runs/polyfit.sqlite")


settings = Settings()
