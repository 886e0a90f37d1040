# games/io.py
from __future__ import annotations
import json
import math
from pathlib import Path
from typing import Any, Dict, List, Tuple

import pandas as pd

from utils.errors import GameValidationError, DataError
from .types import Game, GameDataset, BenchmarkRecord, Outcome, Judge

_OUTCOMES = {o.value for o in Outcome}
_JUDGES = {j.value for j in Judge}


def _finite_float(v: Any) -> float | None:
    """float finito o None; los enteros JSON enormes no caben en un float."""
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        return None
    try:
        x = float(v)
    except (OverflowError, ValueError):
        return None
    return x if math.isfinite(x) else None


def game_from_dict(obj: Any, line: int | None = None) -> Game:
    """
    Valida un objeto del esquema JSONL y construye la partida.
    Los errores citan la línea y el campo.
    """
    if not isinstance(obj, dict):
        raise GameValidationError("se esperaba un objeto JSON", line=line)

    for key in ("model_a", "model_b"):
        if key not in obj:
            raise GameValidationError("campo obligatorio ausente", line=line, field=key)
        if not isinstance(obj[key], str) or not obj[key]:
            raise GameValidationError("debe ser una cadena no vacía", line=line, field=key)

    if "outcome" not in obj:
        raise GameValidationError("campo obligatorio ausente", line=line, field="outcome")
    if obj["outcome"] not in _OUTCOMES:
        raise GameValidationError(f"valor '{obj['outcome']}' no permitido", line=line, field="outcome")

    judge = obj.get("judge", "human")
    if judge not in _JUDGES:
        raise GameValidationError(f"valor '{judge}' no permitido", line=line, field="judge")

    tags = obj.get("tags", [])
    if not isinstance(tags, list) or not all(isinstance(t, str) for t in tags):
        raise GameValidationError("debe ser una lista de cadenas", line=line, field="tags")

    raw_features = obj.get("features", {})
    if not isinstance(raw_features, dict):
        raise GameValidationError("debe ser un objeto", line=line, field="features")
    features = {}
    for name, pair in raw_features.items():
        fld = f"features.{name}"
        if not isinstance(pair, dict) or "a" not in pair or "b" not in pair:
            raise GameValidationError("se esperaba {\"a\": número, \"b\": número}", line=line, field=fld)
        a, b = _finite_float(pair["a"]), _finite_float(pair["b"])
        if a is None or b is None:
            raise GameValidationError("ambos lados deben ser números finitos", line=line, field=fld)
        features[name] = (a, b)

    for key in ("completion_a", "completion_b"):
        if key in obj and obj[key] is not None and not isinstance(obj[key], str):
            raise GameValidationError("debe ser una cadena", line=line, field=key)

    weight = _finite_float(obj.get("weight", 1.0))
    if weight is None or weight <= 0:
        raise GameValidationError("debe ser un número positivo", line=line, field="weight")

    if obj["model_a"] == obj["model_b"]:
        raise GameValidationError("model_a y model_b deben ser distintos", line=line, field="model_b")

    return Game(
        model_a=obj["model_a"],
        model_b=obj["model_b"],
        outcome=Outcome(obj["outcome"]),
        judge=Judge(judge),
        tags=frozenset(tags),
        features=features,
        completion_a=obj.get("completion_a"),
        completion_b=obj.get("completion_b"),
        weight=weight,
    )


def game_to_dict(game: Game) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "model_a": game.model_a,
        "model_b": game.model_b,
        "outcome": game.outcome.value,
        "judge": game.judge.value,
        "tags": sorted(game.tags),
        "features": {name: {"a": a, "b": b} for name, (a, b) in sorted(game.features.items())},
    }
    if game.completion_a is not None:
        out["completion_a"] = game.completion_a
    if game.completion_b is not None:
        out["completion_b"] = game.completion_b
    if game.weight != 1.0:
        out["weight"] = game.weight
    return out


def load_games(path: str | Path, skip_invalid: bool = False) -> GameDataset:
    """
    Lee un JSONL de partidas (una por línea). Conserva el orden.
    Con skip_invalid=True las líneas inválidas se cuentan en `skipped` en vez de fallar.
    """
    games: List[Game] = []
    skipped: List[Tuple[Any, str]] = []
    with open(path, "r", encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            raw = line.strip()
            if not raw:
                continue
            try:
                try:
                    obj = json.loads(raw)
                except json.JSONDecodeError as exc:
                    raise GameValidationError(f"JSON inválido ({exc.msg})", line=i) from exc
                games.append(game_from_dict(obj, line=i))
            except GameValidationError as exc:
                if not skip_invalid:
                    raise
                skipped.append(({"line": i, "field": exc.field}, str(exc)))
    return GameDataset(tuple(games), tuple(skipped))


def dumps_game(game: Game) -> str:
    return json.dumps(game_to_dict(game), ensure_ascii=False)


def save_games(dataset: GameDataset, path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="\n") as f:
        for g in dataset:
            f.write(dumps_game(g) + "\n")


def load_benchmark_csv(path: str | Path) -> List[BenchmarkRecord]:
    """
    CSV con cabecera `question_id,model,correct` (correct ∈ {0,1}).
    Agrupa por pregunta en orden de primera aparición.
    """
    df = pd.read_csv(path, dtype={"question_id": str, "model": str}, keep_default_na=False)
    missing = [c for c in ("question_id", "model", "correct") if c not in df.columns]
    if missing:
        raise GameValidationError("columna ausente en la cabecera", line=1, field=missing[0])

    records: Dict[str, Dict[str, bool]] = {}
    for offset, row in enumerate(df.itertuples(index=False)):
        line = offset + 2  # cabecera en la línea 1
        qid, model, correct = str(row.question_id), str(row.model), row.correct
        if not model:
            raise GameValidationError("modelo vacío", line=line, field="model")
        if str(correct).strip() not in ("0", "1"):
            raise GameValidationError(f"valor '{correct}' no permitido (0/1)", line=line, field="correct")
        answers = records.setdefault(qid, {})
        if model in answers:
            raise GameValidationError(f"respuesta duplicada para '{model}'", line=line, field="model")
        answers[model] = str(correct).strip() == "1"

    if not records:
        raise DataError(f"benchmark vacío: {path}")
    return [BenchmarkRecord(qid, answers) for qid, answers in records.items()]
