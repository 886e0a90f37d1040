# analysis/render.py
from __future__ import annotations
from pathlib import Path
from typing import Any, List, Sequence

import pandas as pd

TRUNC = 60  # ancho máximo de celda en tablas Markdown


def _truncate(val: Any, maxlen: int = TRUNC) -> str:
    s = "" if val is None else str(val)
    return s if len(s) <= maxlen else s[: maxlen - 1] + "…"


def as_markdown_table(headers: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    """Tabla Markdown con columnas alineadas."""
    cells = [[_truncate(c) for c in r] for r in rows]
    widths = [max(3, len(h)) for h in headers]
    for r in cells:
        for i, cell in enumerate(r):
            widths[i] = max(widths[i], len(cell))

    def fmt_row(values: List[str]) -> str:
        return "| " + " | ".join(v.ljust(widths[i]) for i, v in enumerate(values)) + " |"

    sep = "|-" + "-|-".join("-" * w for w in widths) + "-|"
    out = [fmt_row(list(headers)), sep]
    out += [fmt_row(r) for r in cells]
    return "\n".join(out) + "\n"


def fmt_pm(value: float, std: float, signed: bool = False, digits: int = 1) -> str:
    v = f"{value:+.{digits}f}" if signed else f"{value:.{digits}f}"
    return f"{v} ± {std:.{digits}f}"


def write_frame(frame: pd.DataFrame, path: str | Path) -> Path:
    """CSV determinista (sin índice, fin de línea \\n)."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(p, index=False, lineterminator="\n")
    return p


def write_text(text: str, path: str | Path) -> Path:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with open(p, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    return p
