# utils/tests/test_pipeline.py
from __future__ import annotations

import experiment_pipeline as pipeline

TINY = dict(
    pipeline.CONFIG,
    n_models=5,
    n_games=3000,
    modifier_prior_sigma=50.0,
    resamples=2,
    budgets=[50, 100],
)


def test_pipeline_runs_end_to_end():
    lines = []
    out = pipeline.run_pipeline(TINY, lines.append)
    assert out["fit"].converged
    assert len(out["leaderboard"]) == 5
    assert [r.term for r in out["bias"].rows] == ["length"]
    assert out["curve"].budgets == [50, 100]
    assert any(line.startswith("=== CURVA") for line in lines)


def test_pipeline_log_file(tmp_path, monkeypatch):
    path = tmp_path / "pipelines" / "experiment.txt"
    monkeypatch.setattr(pipeline, "CONFIG", dict(TINY, log_path=str(path)))
    pipeline.main()
    text = path.read_text(encoding="utf-8")
    assert text.startswith("=== PIPELINE")
    assert "TIEMPOS PIPELINE" in text
