# rating/design.py
from __future__ import annotations
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from features.engine import feature_gap
from games.types import GameDataset
from .types import ParamIndex, RatingSpec


@dataclass(frozen=True, eq=False)
class GameDesign:
    """
    Dataset compilado a arrays para evaluar ΔR de todas las partidas a la vez.
      a_idx, b_idx     posición en el roster de model_a / model_b        (n,)
      shared_diff      f_b − f_a ya multiplicado por el indicador de filtros  (n, S)
      modifier_mask    𝟙[tag_expr_t(g)]                                     (n, T)
      scores           g_r ∈ {0, 0.5, 1}                                    (n,)
      weights          peso de cada partida                                 (n,)
    """
    index: ParamIndex
    scale: float
    a_idx: np.ndarray
    b_idx: np.ndarray
    shared_diff: np.ndarray
    modifier_mask: np.ndarray
    scores: np.ndarray
    weights: np.ndarray

    def __len__(self) -> int:
        return int(self.a_idx.shape[0])

    def take(self, rows: Sequence[int]) -> "GameDesign":
        rows = np.asarray(rows, dtype=np.int64)
        return GameDesign(
            index=self.index,
            scale=self.scale,
            a_idx=self.a_idx[rows],
            b_idx=self.b_idx[rows],
            shared_diff=self.shared_diff[rows],
            modifier_mask=self.modifier_mask[rows],
            scores=self.scores[rows],
            weights=self.weights[rows],
        )

    def split_values(self, values: np.ndarray):
        """Vector plano -> (bases (M,), alphas (S,), betas (M, T))."""
        idx = self.index
        bases = values[: idx.n_models]
        alphas = values[idx.alpha_start: idx.beta_start]
        betas = values[idx.beta_start:].reshape(idx.n_models, len(idx.modifiers))
        return bases, alphas, betas

    def rating_gaps(self, values: np.ndarray) -> np.ndarray:
        """R^{m_b}(g) − R^{m_a}(g) para cada partida."""
        bases, alphas, betas = self.split_values(values)
        delta = bases[self.b_idx] - bases[self.a_idx]
        if alphas.size:
            delta = delta + self.shared_diff @ alphas
        if betas.shape[1]:
            delta = delta + np.einsum("nt,nt->n", betas[self.b_idx] - betas[self.a_idx], self.modifier_mask)
        return delta


def compile_design(dataset: GameDataset, spec: RatingSpec, index: ParamIndex) -> GameDesign:
    """Todas las partidas deben tener sus dos modelos en `index` (extender antes si hace falta)."""
    n = len(dataset)
    a_idx = np.empty(n, dtype=np.int64)
    b_idx = np.empty(n, dtype=np.int64)
    shared_diff = np.zeros((n, len(spec.shared)))
    modifier_mask = np.zeros((n, len(spec.modifiers)))
    scores = np.empty(n)
    weights = np.empty(n)

    for i, game in enumerate(dataset):
        a_idx[i] = index.model_pos(game.model_a)
        b_idx[i] = index.model_pos(game.model_b)
        for k, term in enumerate(spec.shared):
            shared_diff[i, k] = feature_gap(game, term.feature, i)
        for t, term in enumerate(spec.modifiers):
            if term.tag_expr.evaluate(game):
                modifier_mask[i, t] = 1.0
        scores[i] = game.score
        weights[i] = game.weight

    return GameDesign(index, spec.scale, a_idx, b_idx, shared_diff, modifier_mask, scores, weights)
