# fitting/types.py
from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

from rating.types import ParamIndex, Params, RatingSpec
from utils.constants import DEFAULT_GRADIENT_TOLERANCE, DEFAULT_MAX_ITERATIONS
from utils.errors import RatingSpecError


class Optimizer(str, Enum):
    LBFGS = "lbfgs"              # quasi-Newton de memoria limitada (por defecto)
    GRADIENT_DESCENT = "gd"      # descenso de gradiente con backtracking de Armijo (depuración)


@dataclass(frozen=True, eq=False)
class FitOptions:
    """
    initial_params: None -> medias del prior; Params -> punto de partida dado
    (se copia por nombre; los parámetros sin correspondencia parten de la media del prior).
    """
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    gradient_tolerance: float = DEFAULT_GRADIENT_TOLERANCE
    initial_params: Optional[Params] = None
    optimizer: Optimizer = Optimizer.LBFGS

    def __post_init__(self) -> None:
        object.__setattr__(self, "optimizer", Optimizer(self.optimizer))
        if int(self.max_iterations) < 1:
            raise RatingSpecError("max_iterations debe ser >= 1", field="max_iterations")
        if not self.gradient_tolerance > 0:
            raise RatingSpecError("gradient_tolerance debe ser > 0", field="gradient_tolerance")


@dataclass(frozen=True, eq=False)
class FitResult:
    params: Params
    index: ParamIndex
    objective: float
    iterations: int
    converged: bool
    spec: RatingSpec
    max_gradient: float = 0.0
    clamp_count: int = 0                         # partidas con p recortada en la última evaluación
    trace: List[float] = field(default_factory=list)  # objetivo tras cada iteración aceptada

    @property
    def roster(self) -> List[str]:
        return list(self.index.models)

    def as_dict(self) -> Dict[str, Any]:
        return {
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "params": self.params.as_dict(),
        }
