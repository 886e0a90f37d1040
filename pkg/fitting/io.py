# fitting/io.py
from __future__ import annotations
import json
from pathlib import Path
from typing import Any, Dict

import numpy as np

from rating.engine import build_index
from rating.spec_io import rating_spec_from_dict, rating_spec_to_dict
from rating.types import Params
from utils.errors import RatingSpecError
from .types import FitResult


def fit_result_to_dict(fit: FitResult) -> Dict[str, Any]:
    """Campos públicos + spec y roster para poder reconstruir el ajuste."""
    out = fit.as_dict()
    out["max_gradient"] = fit.max_gradient
    out["clamp_count"] = fit.clamp_count
    out["roster"] = fit.roster
    out["spec"] = rating_spec_to_dict(fit.spec)
    return out


def fit_result_from_dict(d: Dict[str, Any]) -> FitResult:
    for key in ("objective", "iterations", "converged", "params", "spec", "roster"):
        if key not in d:
            raise RatingSpecError("campo obligatorio ausente", field=key)
    spec = rating_spec_from_dict(d["spec"])
    index = build_index(spec, d["roster"])
    values = np.zeros(len(index))
    params = d["params"]
    for pos, name in enumerate(index.names):
        if name not in params:
            raise RatingSpecError(f"falta el parámetro '{name}'", field="params")
        values[pos] = float(params[name])
    return FitResult(
        params=Params(values, index),
        index=index,
        objective=float(d["objective"]),
        iterations=int(d["iterations"]),
        converged=bool(d["converged"]),
        spec=spec,
        max_gradient=float(d.get("max_gradient", 0.0)),
        clamp_count=int(d.get("clamp_count", 0)),
    )


def save_fit_result(fit: FitResult, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="\n") as f:
        json.dump(fit_result_to_dict(fit), f, ensure_ascii=False, indent=2)
        f.write("\n")
    return p


def load_fit_result(path: str | Path) -> FitResult:
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise RatingSpecError(f"JSON inválido ({exc.msg}, línea {exc.lineno})") from exc
    return fit_result_from_dict(data)
