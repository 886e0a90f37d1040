# rating/types.py
from __future__ import annotations
import math
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np

from features.types import FeatureDef
from games.tags import TagExpr
from utils.constants import (
    DEFAULT_SCALE,
    DEFAULT_BASE_MEAN,
    DEFAULT_BASE_SIGMA,
    DEFAULT_SHARED_SIGMA,
)
from utils.errors import RatingSpecError

# float > 0, "cv" (pendiente de validación cruzada) o None (sin prior, σ infinita)
Sigma = Union[float, str, None]
CV = "cv"


def _check_sigma(sigma: Sigma, field_name: str) -> Sigma:
    if sigma is None or sigma == CV:
        return sigma
    if isinstance(sigma, bool) or not isinstance(sigma, (int, float)):
        raise RatingSpecError(f"σ inválida: {sigma!r}", field=field_name)
    sigma = float(sigma)
    if math.isinf(sigma) and sigma > 0:
        return None
    if not (sigma > 0 and math.isfinite(sigma)):
        raise RatingSpecError(f"σ debe ser > 0 (recibido {sigma})", field=field_name)
    return sigma


@dataclass(frozen=True)
class SharedTerm:
    """Coeficiente α común a todos los modelos sobre una feature por lado."""
    feature: FeatureDef
    prior_sigma: Sigma = DEFAULT_SHARED_SIGMA

    def __post_init__(self) -> None:
        object.__setattr__(self, "prior_sigma", _check_sigma(self.prior_sigma, f"shared.{self.feature.name}.prior_sigma"))

    @property
    def name(self) -> str:
        return self.feature.name


@dataclass(frozen=True)
class ModifierTerm:
    """Modificador β por modelo, activo en las partidas que cumplen tag_expr."""
    name: str
    tag_expr: TagExpr
    prior_sigma: Sigma = CV

    def __post_init__(self) -> None:
        if not self.name:
            raise RatingSpecError("el modificador necesita nombre", field="modifiers.name")
        object.__setattr__(self, "prior_sigma", _check_sigma(self.prior_sigma, f"modifiers.{self.name}.prior_sigma"))


@dataclass(frozen=True)
class BasePrior:
    mean: float = DEFAULT_BASE_MEAN
    sigma: Optional[float] = DEFAULT_BASE_SIGMA

    def __post_init__(self) -> None:
        if not math.isfinite(self.mean):
            raise RatingSpecError("la media del prior base debe ser finita", field="base_prior.mean")
        sigma = _check_sigma(self.sigma, "base_prior.sigma")
        if sigma == CV:
            raise RatingSpecError("el prior base no admite 'cv'", field="base_prior.sigma")
        object.__setattr__(self, "sigma", sigma)


@dataclass(frozen=True)
class RatingSpec:
    """
    Modelo declarativo:
      R^m(g) = R_base[m] + Σ_k α_k·𝟙[filtros_k(g)]·f_k(g, lado(m)) + Σ_t β[m,t]·𝟙[tag_expr_t(g)]
    """
    shared: Tuple[SharedTerm, ...] = ()
    modifiers: Tuple[ModifierTerm, ...] = ()
    base_prior: BasePrior = field(default_factory=BasePrior)
    scale: float = DEFAULT_SCALE

    def __post_init__(self) -> None:
        object.__setattr__(self, "shared", tuple(self.shared))
        object.__setattr__(self, "modifiers", tuple(self.modifiers))
        if not (self.scale > 0 and math.isfinite(self.scale)):
            raise RatingSpecError("scale debe ser > 0", field="scale")
        seen = set()
        for term_name in self.term_names():
            if term_name in seen:
                raise RatingSpecError(f"nombre de término duplicado: '{term_name}'", field="terms")
            seen.add(term_name)

    def term_names(self) -> List[str]:
        return [t.name for t in self.shared] + [t.name for t in self.modifiers]

    def shared_term(self, name: str) -> SharedTerm:
        for t in self.shared:
            if t.name == name:
                return t
        raise RatingSpecError(f"'{name}' no es un término compartido", field="shared")

    def term(self, name: str) -> Union[SharedTerm, ModifierTerm]:
        for t in self.shared + self.modifiers:
            if t.name == name:
                return t
        raise RatingSpecError(f"término desconocido: '{name}'", field="terms")

    def pending_cv(self) -> List[str]:
        return [t.name for t in self.shared + self.modifiers if t.prior_sigma == CV]

    def with_sigma(self, name: str, sigma: Sigma) -> "RatingSpec":
        self.term(name)
        shared = tuple(replace(t, prior_sigma=sigma) if t.name == name else t for t in self.shared)
        modifiers = tuple(replace(t, prior_sigma=sigma) if t.name == name else t for t in self.modifiers)
        return replace(self, shared=shared, modifiers=modifiers)

    def base_only(self) -> "RatingSpec":
        return RatingSpec(base_prior=self.base_prior, scale=self.scale)


@dataclass(frozen=True)
class ParamIndex:
    """
    Biyección nombre <-> posición en el vector plano:
      [base por modelo | α por término compartido | β por (modelo, modificador)]
    """
    models: Tuple[str, ...]
    shared: Tuple[str, ...] = ()
    modifiers: Tuple[str, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "models", tuple(self.models))
        object.__setattr__(self, "shared", tuple(self.shared))
        object.__setattr__(self, "modifiers", tuple(self.modifiers))
        object.__setattr__(self, "_model_pos", {m: i for i, m in enumerate(self.models)})
        object.__setattr__(self, "_shared_pos", {t: i for i, t in enumerate(self.shared)})
        object.__setattr__(self, "_modifier_pos", {t: i for i, t in enumerate(self.modifiers)})

    @property
    def n_models(self) -> int:
        return len(self.models)

    @property
    def alpha_start(self) -> int:
        return len(self.models)

    @property
    def beta_start(self) -> int:
        return len(self.models) + len(self.shared)

    def __len__(self) -> int:
        return len(self.models) + len(self.shared) + len(self.models) * len(self.modifiers)

    def has_model(self, model: str) -> bool:
        return model in self._model_pos

    def model_pos(self, model: str) -> int:
        try:
            return self._model_pos[model]
        except KeyError:
            raise KeyError(f"modelo no indexado: '{model}'") from None

    def base_offset(self, model: str) -> int:
        return self.model_pos(model)

    def alpha_offset(self, term: str) -> int:
        return self.alpha_start + self._shared_pos[term]

    def beta_offset(self, model: str, term: str) -> int:
        return self.beta_start + self.model_pos(model) * len(self.modifiers) + self._modifier_pos[term]

    @property
    def names(self) -> List[str]:
        out = [f"base:{m}" for m in self.models]
        out += [f"alpha:{t}" for t in self.shared]
        out += [f"beta:{m}:{t}" for m in self.models for t in self.modifiers]
        return out

    def position(self, name: str) -> int:
        kind, _, rest = name.partition(":")
        if kind == "base":
            return self.base_offset(rest)
        if kind == "alpha":
            return self.alpha_offset(rest)
        if kind == "beta":
            model, _, term = rest.rpartition(":")
            return self.beta_offset(model, term)
        raise KeyError(f"nombre de parámetro inválido: '{name}'")


@dataclass(frozen=True, eq=False)
class Params:
    """Vector de parámetros finito ligado a un ParamIndex."""
    values: np.ndarray
    index: ParamIndex

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float).copy()
        if values.shape != (len(self.index),):
            raise ValueError(f"longitud {values.shape} distinta de la del índice ({len(self.index)})")
        if not np.all(np.isfinite(values)):
            raise ValueError("parámetros no finitos")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.index.position(name)])

    def base(self, model: str) -> float:
        return float(self.values[self.index.base_offset(model)])

    def alpha(self, term: str) -> float:
        return float(self.values[self.index.alpha_offset(term)])

    def beta(self, model: str, term: str) -> float:
        return float(self.values[self.index.beta_offset(model, term)])

    def as_dict(self) -> Dict[str, float]:
        return {name: float(v) for name, v in zip(self.index.names, self.values)}

    def shifted(self, c: float) -> "Params":
        """Suma c a todos los ratings base (el resto no cambia)."""
        values = self.values.copy()
        values[: self.index.n_models] += c
        return Params(values, self.index)
