# conftest.py
from __future__ import annotations
import sys
from pathlib import Path

# raíz del repo en sys.path (los paquetes son de primer nivel)
sys.path.insert(0, str(Path(__file__).resolve().parent))
