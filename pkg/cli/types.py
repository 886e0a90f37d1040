# cli/types.py
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Dict, List, Literal, Optional

from utils.config import settings

OutputFormat = Literal["csv", "md"]

# Códigos de salida compartidos por todos los comandos
EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_NOT_CONVERGED = 3


@dataclass
class RunConfig:
    command: str
    out: str
    paths: Dict[str, Optional[str]] = field(default_factory=dict)   # games, spec, fit, csv, ...
    options: Dict[str, Any] = field(default_factory=dict)           # opciones propias del comando
    seed: int = settings.POLYFIT_SEED
    threads: int = settings.POLYFIT_THREADS
    fmt: OutputFormat = "csv"
    skip_invalid: bool = False
    log_db: str = settings.POLYFIT_LOG_DB
    reset_log: bool = True          # limpiar los registros del log al inicio
    progress: bool = True


@dataclass
class RunResult:
    command: str
    run_id: Optional[str]
    exit_code: int
    outputs: List[str] = field(default_factory=list)
    summary: str = ""
    error: Optional[str] = None
