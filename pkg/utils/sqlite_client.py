# utils/sqlite_client.py
from __future__ import annotations
import sqlite3
from pathlib import Path


class SqliteClient:
    """
    Cliente mínimo para SQLite (solo lo usa el log de ejecuciones).
    """
    def __init__(self, db_path: str | Path) -> None:
        self.path = Path(db_path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self.conn = sqlite3.connect(str(self.path))
        self.conn.text_factory = str

    def fetch_all(self, query: str, params: tuple = ()) -> list[tuple]:
        return self.conn.execute(query, params).fetchall()

    def close(self) -> None:
        try:
            self.conn.close()
        except Exception:
            pass

    def __enter__(self) -> "SqliteClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()
