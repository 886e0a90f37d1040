# analysis/bootstrap.py
from __future__ import annotations
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Dict, Iterable, Optional, Tuple

import numpy as np
from loguru import logger
from tqdm import tqdm

from fitting.engine import fit_design
from fitting.types import FitOptions
from games.types import GameDataset
from rating.design import GameDesign, compile_design
from rating.engine import build_index, prior_means
from rating.types import ParamIndex, RatingSpec
from utils.constants import DEFAULT_RESAMPLES
from utils.errors import DataError


@dataclass(frozen=True, eq=False)
class BootstrapResult:
    index: ParamIndex
    samples: np.ndarray     # (resamples, parámetros)
    stds: np.ndarray        # desviación típica muestral (ddof=1)
    fallbacks: int          # (remuestra, modelo) ausentes rellenados con el prior

    @property
    def resamples(self) -> int:
        return int(self.samples.shape[0])

    def as_dict(self) -> Dict[str, float]:
        return {name: float(s) for name, s in zip(self.index.names, self.stds)}

    def interval(self, confidence: float = 0.95) -> Dict[str, Tuple[float, float]]:
        """Intervalo percentil por parámetro."""
        alpha = (1.0 - confidence) / 2.0
        low = np.quantile(self.samples, alpha, axis=0)
        high = np.quantile(self.samples, 1.0 - alpha, axis=0)
        return {name: (float(l), float(h)) for name, l, h in zip(self.index.names, low, high)}


def _one_resample(i: int, design: GameDesign, spec: RatingSpec, options: Optional[FitOptions],
                  seed: int) -> Tuple[np.ndarray, int]:
    index = design.index
    n = len(design)
    rng = np.random.default_rng(seed + i)
    rows = rng.integers(0, n, size=n)
    sample = design.take(rows)
    values = np.array(fit_design(sample, spec, options).params.values)

    # modelos ausentes en la remuestra -> medias del prior
    present = np.zeros(index.n_models, dtype=bool)
    present[sample.a_idx] = True
    present[sample.b_idx] = True
    missing = np.flatnonzero(~present)
    if missing.size:
        means = prior_means(spec, index)
        n_mod = len(index.modifiers)
        for pos in missing:
            values[pos] = means[pos]
            start = index.beta_start + pos * n_mod
            values[start:start + n_mod] = 0.0
    return values, int(missing.size)


def bootstrap_uncertainty(
    dataset: GameDataset,
    spec: RatingSpec,
    options: Optional[FitOptions] = None,
    resamples: int = DEFAULT_RESAMPLES,
    seed: int = 0,
    max_workers: int = 1,
    roster: Optional[Iterable[str]] = None,
    progress: bool = False,
) -> BootstrapResult:
    """
    Bootstrap no paramétrico: `resamples` reajustes sobre n partidas muestreadas con
    reemplazo (semilla seed + i). Las partidas se ordenan canónicamente antes, de modo
    que el resultado no depende del orden de entrada.
    """
    if resamples < 2:
        raise DataError("se necesitan al menos 2 remuestras")
    if len(dataset) == 0:
        raise DataError("no hay partidas que remuestrear")
    models = set(dataset.model_roster) | set(roster or ())
    index = build_index(spec, models)
    design = compile_design(dataset.canonical(), spec, index)

    run = partial(_one_resample, design=design, spec=spec, options=options, seed=seed)
    order = range(resamples)
    if max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as executor:
            results = list(tqdm(executor.map(run, order), total=resamples, disable=not progress, desc="bootstrap"))
    else:
        results = [run(i) for i in tqdm(order, disable=not progress, desc="bootstrap")]

    samples = np.vstack([v for v, _ in results])
    fallbacks = sum(c for _, c in results)
    if fallbacks:
        logger.warning(f"[bootstrap] {fallbacks} modelo(s)-remuestra sin partidas; se usan medias del prior")
    return BootstrapResult(index=index, samples=samples, stds=samples.std(axis=0, ddof=1), fallbacks=fallbacks)
