# rating/spec_io.py
from __future__ import annotations
import json
from pathlib import Path
from typing import Any, Dict

from features.types import FeatureDef
from games.tags import parse_tag_expr
from utils.constants import DEFAULT_BASE_MEAN, DEFAULT_BASE_SIGMA, DEFAULT_SCALE, DEFAULT_SHARED_SIGMA
from utils.errors import RatingSpecError
from .types import BasePrior, ModifierTerm, RatingSpec, SharedTerm, CV


def _sigma_from_json(value: Any, field: str):
    # null -> sin prior; "cv" -> validación cruzada; número -> σ
    if value is None or value == CV:
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise RatingSpecError(f"σ inválida: {value!r}", field=field)
    if value <= 0:
        raise RatingSpecError(f"σ debe ser > 0 (recibido {value})", field=field)
    return float(value)


def _sigma_to_json(value: Any):
    return value if value is None or value == CV else float(value)


def rating_spec_from_dict(d: Dict[str, Any]) -> RatingSpec:
    """
    {"scale": 400, "base_prior": {"mean": 1000, "sigma": 400},
     "shared": [{...FeatureDef, "prior_sigma": ...}],
     "modifiers": [{"name", "tag_expr", "prior_sigma"}]}
    """
    if not isinstance(d, dict):
        raise RatingSpecError("el spec debe ser un objeto JSON")

    scale = d.get("scale", DEFAULT_SCALE)
    if isinstance(scale, bool) or not isinstance(scale, (int, float)) or scale <= 0:
        raise RatingSpecError(f"valor inválido {scale!r}", field="scale")

    bp = d.get("base_prior", {})
    if not isinstance(bp, dict):
        raise RatingSpecError("se esperaba un objeto", field="base_prior")
    mean = bp.get("mean", DEFAULT_BASE_MEAN)
    if isinstance(mean, bool) or not isinstance(mean, (int, float)):
        raise RatingSpecError(f"valor inválido {mean!r}", field="base_prior.mean")
    base_sigma = _sigma_from_json(bp.get("sigma", DEFAULT_BASE_SIGMA), "base_prior.sigma")
    if base_sigma == CV:
        raise RatingSpecError("el prior base no admite 'cv'", field="base_prior.sigma")

    shared_raw = d.get("shared", [])
    if not isinstance(shared_raw, list):
        raise RatingSpecError("se esperaba una lista", field="shared")
    shared = []
    for i, item in enumerate(shared_raw):
        fld = f"shared[{i}]"
        fdef = FeatureDef.from_dict(item, field=fld)
        sigma = _sigma_from_json(item.get("prior_sigma", DEFAULT_SHARED_SIGMA), f"{fld}.prior_sigma")
        shared.append(SharedTerm(fdef, sigma))

    mods_raw = d.get("modifiers", [])
    if not isinstance(mods_raw, list):
        raise RatingSpecError("se esperaba una lista", field="modifiers")
    modifiers = []
    for i, item in enumerate(mods_raw):
        fld = f"modifiers[{i}]"
        if not isinstance(item, dict):
            raise RatingSpecError("se esperaba un objeto", field=fld)
        name = item.get("name")
        if not isinstance(name, str) or not name:
            raise RatingSpecError("nombre ausente o vacío", field=f"{fld}.name")
        if "tag_expr" not in item:
            raise RatingSpecError("campo obligatorio ausente", field=f"{fld}.tag_expr")
        expr = parse_tag_expr(item["tag_expr"], field=f"{fld}.tag_expr")
        sigma = _sigma_from_json(item.get("prior_sigma", CV), f"{fld}.prior_sigma")
        modifiers.append(ModifierTerm(name, expr, sigma))

    return RatingSpec(
        shared=tuple(shared),
        modifiers=tuple(modifiers),
        base_prior=BasePrior(float(mean), base_sigma),
        scale=float(scale),
    )


def rating_spec_to_dict(spec: RatingSpec) -> Dict[str, Any]:
    return {
        "scale": spec.scale,
        "base_prior": {"mean": spec.base_prior.mean, "sigma": _sigma_to_json(spec.base_prior.sigma)},
        "shared": [
            {**t.feature.to_dict(), "prior_sigma": _sigma_to_json(t.prior_sigma)} for t in spec.shared
        ],
        "modifiers": [
            {"name": t.name, "tag_expr": str(t.tag_expr), "prior_sigma": _sigma_to_json(t.prior_sigma)}
            for t in spec.modifiers
        ],
    }


def load_rating_spec(path: str | Path) -> RatingSpec:
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as exc:
            raise RatingSpecError(f"JSON inválido ({exc.msg}, línea {exc.lineno})") from exc
    return rating_spec_from_dict(data)


def save_rating_spec(spec: RatingSpec, path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="\n") as f:
        json.dump(rating_spec_to_dict(spec), f, ensure_ascii=False, indent=2)
        f.write("\n")
