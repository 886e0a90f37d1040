# games/tests/test_games.py
from __future__ import annotations
import json
import math

import numpy as np
import pytest

from games import (
    BenchmarkRecord,
    Game,
    GameDataset,
    GroundTruth,
    Judge,
    Outcome,
    concat,
    convert_benchmark,
    filter_games,
    kfold,
    load_benchmark_csv,
    load_games,
    parse_tag_expr,
    save_games,
    simulate_games,
    split,
)
from fitting import fit_map
from rating import RatingSpec, Params, build_index
from utils.errors import DataError, GameValidationError, RatingSpecError


def _write_jsonl(path, objs):
    with open(path, "w", encoding="utf-8") as f:
        for o in objs:
            f.write((o if isinstance(o, str) else json.dumps(o)) + "\n")
    return path


def _truth(bases):
    spec = RatingSpec()
    index = build_index(spec, bases)
    values = [bases[m] for m in index.models]
    return GroundTruth(spec=spec, params=Params(np.array(values), index))


# ======================================================
# load_games / save_games
# ======================================================
def test_load_single_game(tmp_path):
    path = _write_jsonl(tmp_path / "g.jsonl", [{"model_a": "X", "model_b": "Y", "outcome": "draw"}])
    ds = load_games(path)
    assert len(ds) == 1
    assert ds.model_roster == {"X", "Y"}
    assert ds[0].outcome is Outcome.DRAW
    assert ds[0].judge is Judge.HUMAN


def test_missing_outcome_cites_line_and_field(tmp_path):
    path = _write_jsonl(tmp_path / "g.jsonl", [{"model_a": "X", "model_b": "Y"}])
    with pytest.raises(GameValidationError) as exc:
        load_games(path)
    assert exc.value.line == 1
    assert exc.value.field == "outcome"
    assert "línea 1" in str(exc.value)


def test_roster_of_three_models(tmp_path):
    path = _write_jsonl(tmp_path / "g.jsonl", [
        {"model_a": "X", "model_b": "Y", "outcome": "model_a"},
        {"model_a": "Y", "model_b": "Z", "outcome": "model_b"},
        {"model_a": "Z", "model_b": "X", "outcome": "draw"},
    ])
    assert load_games(path).model_roster == {"X", "Y", "Z"}


@pytest.mark.parametrize("obj, field", [
    ({"model_a": "X", "model_b": "X", "outcome": "draw"}, "model_b"),
    ({"model_a": "X", "model_b": "Y", "outcome": "tie"}, "outcome"),
    ({"model_a": "X", "model_b": "Y", "outcome": "draw", "judge": "robot"}, "judge"),
    ({"model_a": "X", "model_b": "Y", "outcome": "draw", "features": {"len": {"a": 1.0}}}, "features.len"),
    ({"model_a": "X", "model_b": "Y", "outcome": "draw", "weight": 0}, "weight"),
])
def test_invalid_fields(tmp_path, obj, field):
    path = _write_jsonl(tmp_path / "g.jsonl", [obj])
    with pytest.raises(GameValidationError) as exc:
        load_games(path)
    assert exc.value.field == field


def test_skip_invalid_counts_lines(tmp_path):
    path = _write_jsonl(tmp_path / "g.jsonl", [
        {"model_a": "X", "model_b": "Y", "outcome": "model_a"},
        "{no es json",
        {"model_a": "X", "model_b": "Y"},
    ])
    ds = load_games(path, skip_invalid=True)
    assert len(ds) == 1
    assert [s[0]["line"] for s in ds.skipped] == [2, 3]


@pytest.mark.parametrize("obj, field", [
    ({"model_a": "X", "model_b": "Y", "outcome": "draw", "features": {"len": {"a": 10**400, "b": 1}}},
     "features.len"),
    ({"model_a": "X", "model_b": "Y", "outcome": "draw", "weight": 10**400}, "weight"),
])
def test_huge_integers_are_validation_errors(tmp_path, obj, field):
    path = _write_jsonl(tmp_path / "g.jsonl", [{"model_a": "X", "model_b": "Y", "outcome": "draw"}, obj])
    with pytest.raises(GameValidationError) as exc:
        load_games(path)
    assert (exc.value.line, exc.value.field) == (2, field)

    ds = load_games(path, skip_invalid=True)
    assert len(ds) == 1
    assert ds.skipped[0][0] == {"line": 2, "field": field}


def test_save_load_roundtrip_is_bit_exact(tmp_path):
    src = _write_jsonl(tmp_path / "src.jsonl", [
        {"model_a": "X", "model_b": "Y", "outcome": "model_b", "judge": "llm", "tags": ["code", "hard"],
         "features": {"len": {"a": 6.25, "b": 5.5}}, "completion_a": "hola", "completion_b": "adiós"},
        {"model_a": "Y", "model_b": "Z", "outcome": "draw", "judge": "human", "tags": [], "features": {},
         "weight": 2.5},
    ])
    first = tmp_path / "a.jsonl"
    second = tmp_path / "b.jsonl"
    save_games(load_games(src), first)
    save_games(load_games(first), second)
    assert first.read_bytes() == second.read_bytes()
    assert load_games(first).games == load_games(src).games


# ======================================================
# Benchmarks
# ======================================================
def test_convert_rules():
    ds = convert_benchmark([BenchmarkRecord("q1", {"A": True, "B": False})], name="mmlu")
    assert len(ds) == 1
    g = ds[0]
    winner = g.model_a if g.outcome is Outcome.A_WINS else g.model_b
    assert winner == "A"
    assert g.judge is Judge.BENCHMARK
    assert g.tags == {"benchmark:mmlu"}

    draw = convert_benchmark([BenchmarkRecord("q1", {"A": True, "B": True})])
    assert draw[0].outcome is Outcome.DRAW


def test_converted_benchmark_keeps_accuracy_order():
    rng = np.random.default_rng(21)
    accuracy = {"A": 0.9, "B": 0.6, "C": 0.3}
    records = [
        BenchmarkRecord(f"q{i}", {m: bool(rng.random() < p) for m, p in accuracy.items()})
        for i in range(200)
    ]
    fit = fit_map(convert_benchmark(records, name="toy", seed=21), RatingSpec())
    assert fit.params.base("A") > fit.params.base("B") > fit.params.base("C")


def test_always_correct_model_ranks_first():
    records = [BenchmarkRecord(f"q{i}", {"A": True, "B": False}) for i in range(10)]
    fit = fit_map(convert_benchmark(records), RatingSpec())
    assert fit.params.base("A") > fit.params.base("B")


def test_convert_skips_single_model_records():
    ds = convert_benchmark([
        BenchmarkRecord("q1", {"A": True}),
        BenchmarkRecord("q2", {"A": True, "B": False, "C": True}),
    ])
    assert len(ds) == 3  # 3 pares de q2
    assert len(ds.skipped) == 1


def test_convert_symmetry_under_swapped_pairs():
    records = [BenchmarkRecord(f"q{i}", {"A": i % 2 == 0, "B": i % 3 == 0}) for i in range(30)]
    ds = convert_benchmark(records, seed=3)
    for g in ds:
        sw = g.swapped()
        if g.outcome is Outcome.DRAW:
            assert sw.outcome is Outcome.DRAW
        else:
            assert sw.outcome is g.outcome.flipped()
            winner = g.model_a if g.outcome is Outcome.A_WINS else g.model_b
            sw_winner = sw.model_a if sw.outcome is Outcome.A_WINS else sw.model_b
            assert winner == sw_winner


def test_load_benchmark_csv(tmp_path):
    path = tmp_path / "bench.csv"
    path.write_text("question_id,model,correct\nq1,A,1\nq1,B,0\nq2,A,0\nq2,B,0\n", encoding="utf-8")
    records = load_benchmark_csv(path)
    assert [r.question_id for r in records] == ["q1", "q2"]
    assert records[0].correctness == {"A": True, "B": False}


def test_load_benchmark_csv_bad_value(tmp_path):
    path = tmp_path / "bench.csv"
    path.write_text("question_id,model,correct\nq1,A,1\nq1,B,2\n", encoding="utf-8")
    with pytest.raises(GameValidationError) as exc:
        load_benchmark_csv(path)
    assert exc.value.line == 3
    assert exc.value.field == "correct"


# ======================================================
# Simulación
# ======================================================
def test_simulate_equal_ratings_is_fair():
    ds = simulate_games(_truth({"A": 1000.0, "B": 1000.0}), ["A", "B"], n=10000, seed=7)
    a_wins = sum(g.outcome is Outcome.A_WINS for g in ds) / len(ds)
    assert abs(a_wins - 0.5) < 0.02


def test_simulate_closed_form_probability():
    ds = simulate_games(_truth({"A": 1400.0, "B": 1000.0}), ["A", "B"], n=10000, seed=7)
    a_wins = sum(
        (g.model_a == "A") == (g.outcome is Outcome.A_WINS) for g in ds
    ) / len(ds)
    assert abs(a_wins - math.e / (1 + math.e)) < 0.02


def test_simulate_is_deterministic(tmp_path):
    truth = _truth({"A": 1100.0, "B": 1000.0, "C": 900.0})
    mix = [({"code"}, 0.3), (set(), 0.7)]
    save_games(simulate_games(truth, ["A", "B", "C"], mix, n=500, seed=7, draw_rate=0.1), tmp_path / "1.jsonl")
    save_games(simulate_games(truth, ["A", "B", "C"], mix, n=500, seed=7, draw_rate=0.1), tmp_path / "2.jsonl")
    assert (tmp_path / "1.jsonl").read_bytes() == (tmp_path / "2.jsonl").read_bytes()


def test_simulate_pair_win_rates_converge():
    truth = _truth({"A": 1100.0, "B": 1000.0, "C": 950.0})
    n = 30000
    ds = simulate_games(truth, ["A", "B", "C"], n=n, seed=11)
    for hi, lo in (("A", "B"), ("A", "C"), ("B", "C")):
        games = [g for g in ds if {g.model_a, g.model_b} == {hi, lo}]
        won = sum((g.model_a == hi) == (g.outcome is Outcome.A_WINS) for g in games) / len(games)
        diff = truth.params.base(hi) - truth.params.base(lo)
        expected = 1.0 / (1.0 + math.exp(-diff / 400.0))
        assert abs(won - expected) < 3 / math.sqrt(len(games))


def test_simulate_errors():
    truth = _truth({"A": 1000.0, "B": 1000.0})
    with pytest.raises(DataError):
        simulate_games(truth, [], n=10)
    with pytest.raises(DataError):
        simulate_games(truth, ["A", "B"], n=0)
    with pytest.raises(DataError):
        simulate_games(truth, ["A", "Z"], n=10)


# ======================================================
# Particiones y filtros
# ======================================================
def _toy(n=100):
    return GameDataset.from_games(
        Game(f"m{i % 5}", f"m{(i + 1) % 5}", Outcome.A_WINS, tags={"code"} if i % 2 else set())
        for i in range(n)
    )


def test_split_sizes_and_determinism():
    ds = _toy()
    a, b = split(ds, [0.8, 0.2], seed=1)
    assert (len(a), len(b)) == (80, 20)
    a2, b2 = split(ds, [0.8, 0.2], seed=1)
    assert a.games == a2.games and b.games == b2.games


def test_split_rejects_bad_fractions():
    with pytest.raises(DataError):
        split(_toy(), [0.5, 0.6])


def test_kfold_partitions_cover_everything():
    ds = _toy(23)
    folds = kfold(ds, 5, seed=0)
    assert len(folds) == 5
    assert sum(len(test) for _, test in folds) == 23
    for train, test in folds:
        assert len(train) + len(test) == 23


def test_filter_and_concat():
    ds = _toy()
    code = filter_games(ds, "tag('code')")
    rest = filter_games(ds, parse_tag_expr("!tag('code')"))
    assert len(code) == len(rest) == 50
    assert len(concat([code, rest])) == 100


@pytest.mark.parametrize("text, expected", [
    ("tag('code') & tag('chinese')", [True, False, False]),
    ("tag('code') | judge('llm')", [True, True, True]),
    ("¬tag('code') ∧ judge('llm')", [False, False, True]),
])
def test_tag_expressions(text, expected):
    games = [
        Game("A", "B", Outcome.DRAW, tags={"code", "chinese"}),
        Game("A", "B", Outcome.DRAW, tags={"code"}),
        Game("A", "B", Outcome.DRAW, judge=Judge.LLM),
    ]
    expr = parse_tag_expr(text)
    assert [expr.evaluate(g) for g in games] == expected
    assert parse_tag_expr(str(expr)) == expr


def test_tag_expression_errors():
    with pytest.raises(RatingSpecError):
        parse_tag_expr("tag('code') &")
    with pytest.raises(RatingSpecError):
        parse_tag_expr("judge('robot')")
