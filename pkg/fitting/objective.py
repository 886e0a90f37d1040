# fitting/objective.py
from __future__ import annotations
import math
from typing import Optional, Tuple

import numpy as np
from scipy.special import expit, log_expit

from games.types import GameDataset
from rating.design import GameDesign, compile_design
from rating.engine import prior_vectors
from rating.types import ParamIndex, Params, RatingSpec
from utils.constants import PROB_CLAMP

# |z| máximo: p queda en [PROB_CLAMP, 1 − PROB_CLAMP]
Z_CLAMP = math.log((1.0 - PROB_CLAMP) / PROB_CLAMP)


class ObjectiveFunction:
    """
    Pérdida logística ponderada (g_r ∈ {0, 0.5, 1}) + penalización gaussiana
      L(θ) = −Σ_g w_g [g_r ln p_g + (1 − g_r) ln(1 − p_g)] + ½ Σ_i (θ_i − μ_i)² / σ_i²
    evaluada sobre un GameDesign compilado.
    """

    def __init__(self, design: GameDesign, means: np.ndarray, inv_var: np.ndarray):
        self.design = design
        self.means = means
        self.inv_var = inv_var
        self.clamp_count = 0
        self.evaluations = 0
        self._last_x: Optional[np.ndarray] = None
        self._last_f = math.nan

    @classmethod
    def from_dataset(cls, dataset: GameDataset, spec: RatingSpec, index: ParamIndex) -> "ObjectiveFunction":
        means, inv_var = prior_vectors(spec, index)
        return cls(compile_design(dataset, spec, index), means, inv_var)

    def _logits(self, values: np.ndarray) -> Tuple[np.ndarray, int]:
        z = self.design.rating_gaps(values) / self.design.scale
        clamped = int(np.count_nonzero(np.abs(z) > Z_CLAMP))
        if clamped:
            z = np.clip(z, -Z_CLAMP, Z_CLAMP)
        return z, clamped

    def game_losses(self, values: np.ndarray) -> np.ndarray:
        """Pérdida por partida sin pesos ni prior."""
        z, _ = self._logits(values)
        g = self.design.scores
        return -(g * log_expit(z) + (1.0 - g) * log_expit(-z))

    def likelihood(self, values: np.ndarray) -> float:
        return math.fsum(self.design.weights * self.game_losses(values))

    def penalty(self, values: np.ndarray) -> float:
        diff = values - self.means
        return 0.5 * math.fsum(self.inv_var * diff * diff)

    def value_and_grad(self, values: np.ndarray) -> Tuple[float, np.ndarray]:
        d = self.design
        idx = d.index
        z, clamped = self._logits(values)
        g = d.scores
        w = d.weights
        loss = -(g * log_expit(z) + (1.0 - g) * log_expit(-z))
        diff = values - self.means
        f = math.fsum(w * loss) + 0.5 * math.fsum(self.inv_var * diff * diff)

        # dL/dΔR por partida; en partidas recortadas p es la recortada
        r = w * (expit(z) - g) / d.scale
        grad = self.inv_var * diff
        m = idx.n_models
        grad[:m] += np.bincount(d.b_idx, weights=r, minlength=m) - np.bincount(d.a_idx, weights=r, minlength=m)
        if idx.shared:
            grad[idx.alpha_start:idx.beta_start] += d.shared_diff.T @ r
        n_mod = len(idx.modifiers)
        if n_mod:
            beta_grad = np.zeros((m, n_mod))
            for t in range(n_mod):
                rt = r * d.modifier_mask[:, t]
                beta_grad[:, t] = np.bincount(d.b_idx, weights=rt, minlength=m) - np.bincount(d.a_idx, weights=rt, minlength=m)
            grad[idx.beta_start:] += beta_grad.ravel()

        self.clamp_count = clamped
        self.evaluations += 1
        self._last_x = values.copy()
        self._last_f = f
        return f, grad

    def value(self, values: np.ndarray) -> float:
        if self._last_x is not None and np.array_equal(values, self._last_x):
            return self._last_f
        return self.value_and_grad(values)[0]

    def gradient(self, values: np.ndarray) -> np.ndarray:
        return self.value_and_grad(values)[1]


# ======================================================
# API funcional
# ======================================================
def objective(params: Params, dataset: GameDataset, spec: RatingSpec, index: ParamIndex) -> float:
    return ObjectiveFunction.from_dataset(dataset, spec, index).value_and_grad(np.array(params.values))[0]


def gradient(params: Params, dataset: GameDataset, spec: RatingSpec, index: ParamIndex) -> np.ndarray:
    return ObjectiveFunction.from_dataset(dataset, spec, index).value_and_grad(np.array(params.values))[1]
