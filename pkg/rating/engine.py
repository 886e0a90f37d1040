# rating/engine.py
from __future__ import annotations
from typing import Iterable, Tuple

import numpy as np
from loguru import logger
from scipy.special import expit

from features.engine import feature_value
from games.types import Game
from utils.errors import RatingSpecError
from .types import CV, ParamIndex, Params, RatingSpec


def build_index(spec: RatingSpec, roster: Iterable[str]) -> ParamIndex:
    """Layout determinista: el roster se ordena lexicográficamente antes de asignar posiciones."""
    models = tuple(sorted(set(roster)))
    if not models:
        raise RatingSpecError("el roster está vacío", field="roster")
    return ParamIndex(
        models=models,
        shared=tuple(t.name for t in spec.shared),
        modifiers=tuple(t.name for t in spec.modifiers),
    )


def rating_of(model: str, game: Game, params: Params, index: ParamIndex, spec: RatingSpec,
              game_index: int | None = None) -> float:
    """
    R^m(g) = R_base[m] + Σ_k α_k·𝟙[filtros]·f_k(g, lado) + Σ_t β[m,t]·𝟙[tag_expr_t(g)]
    """
    side = game.side_of(model)
    total = params.base(model)
    for term in spec.shared:
        if term.feature.applies_to(game):
            total += params.alpha(term.name) * feature_value(game, term.feature, side, game_index)
    for term in spec.modifiers:
        if term.tag_expr.evaluate(game):
            total += params.beta(model, term.name)
    return total


def win_probability(game: Game, params: Params, index: ParamIndex, spec: RatingSpec) -> float:
    """p(model_b ≻ model_a) = σ((R_b − R_a) / scale)."""
    delta = rating_of(game.model_b, game, params, index, spec) - rating_of(game.model_a, game, params, index, spec)
    return float(expit(delta / spec.scale))


def prior_vectors(spec: RatingSpec, index: ParamIndex) -> Tuple[np.ndarray, np.ndarray]:
    """
    (medias, 1/σ²) por coordenada. σ = None (sin prior) -> precisión 0.
    Un término con σ 'cv' sin resolver no tiene prior definido.
    """
    pending = spec.pending_cv()
    if pending:
        raise RatingSpecError(f"σ sin resolver (cv): {', '.join(pending)}", field="prior_sigma")

    def precision(sigma) -> float:
        return 0.0 if sigma is None else 1.0 / (sigma * sigma)

    means = np.zeros(len(index))
    inv_var = np.zeros(len(index))
    n = index.n_models
    means[:n] = spec.base_prior.mean
    inv_var[:n] = precision(spec.base_prior.sigma)
    for i, term in enumerate(spec.shared):
        inv_var[index.alpha_start + i] = precision(term.prior_sigma)
    if spec.modifiers:
        mod_prec = np.array([precision(t.prior_sigma) for t in spec.modifiers])
        inv_var[index.beta_start:] = np.tile(mod_prec, n)
    return means, inv_var


def prior_means(spec: RatingSpec, index: ParamIndex) -> np.ndarray:
    """Medias del prior sin exigir σ resueltas (punto de partida y relleno de modelos no vistos)."""
    means = np.zeros(len(index))
    means[: index.n_models] = spec.base_prior.mean
    return means


def extend_params(params: Params, roster: Iterable[str], spec: RatingSpec) -> Params:
    """
    Reindexa `params` sobre roster ∪ modelos ya indexados.
    Los modelos nuevos reciben las medias del prior (base = media, β = 0).
    """
    old = params.index
    new_index = build_index(spec, set(old.models) | set(roster))
    if new_index == old:
        return params
    values = prior_means(spec, new_index)
    values[new_index.alpha_start:new_index.beta_start] = params.values[old.alpha_start:old.beta_start]
    unseen = []
    for m in new_index.models:
        if not old.has_model(m):
            unseen.append(m)
            continue
        values[new_index.base_offset(m)] = params.base(m)
        for t in new_index.modifiers:
            values[new_index.beta_offset(m, t)] = params.beta(m, t)
    if unseen:
        logger.warning(f"[rating] {len(unseen)} modelo(s) sin partidas de ajuste; se usan medias del prior: {unseen}")
    return Params(values, new_index)
