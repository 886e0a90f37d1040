# fitting/tests/test_fitting.py
from __future__ import annotations
import json
import math

import numpy as np
import pytest
from scipy.stats import spearmanr

from features.types import FeatureDef, FeatureKind, FeatureSource
from fitting import (
    FitOptions,
    FitResult,
    ObjectiveFunction,
    fit_map,
    gradient,
    held_out_loss,
    load_fit_result,
    objective,
    resolve_cv_sigmas,
    save_fit_result,
    tune_prior_sigma,
)
from games.simulate import FeatureSampler, make_truth, simulate_games
from games.tags import parse_tag_expr
from games.types import Game, GameDataset, Outcome
from rating import BasePrior, ModifierTerm, Params, RatingSpec, SharedTerm, build_index
from utils.errors import DataError, RatingSpecError

LENGTH = FeatureDef("length")
POSITION = FeatureDef("position", FeatureSource.BUILTIN, FeatureKind.POSITION)
CODE = parse_tag_expr("tag('code')")
ZH = parse_tag_expr("tag('chinese')")
NO_PRIOR = BasePrior(1000.0, None)


def _games(*triples):
    return GameDataset.from_games(Game(a, b, Outcome(o)) for a, b, o in triples)


def _at(spec, roster, values):
    index = build_index(spec, roster)
    return Params(np.asarray(values, dtype=float), index), index


def _random_case(rng, n_games=None):
    """Spec, params y dataset aleatorios (≤ 50 partidas) para comprobar el gradiente."""
    shared = []
    if rng.random() < 0.7:
        shared.append(SharedTerm(LENGTH, prior_sigma=float(rng.choice([50.0, 400.0]))))
    if rng.random() < 0.5:
        shared.append(SharedTerm(POSITION, prior_sigma=None))
    modifiers = []
    if rng.random() < 0.7:
        modifiers.append(ModifierTerm("code", CODE, float(rng.choice([20.0, 80.0]))))
    if rng.random() < 0.5:
        modifiers.append(ModifierTerm("zh", ZH, 40.0))
    spec = RatingSpec(shared=tuple(shared), modifiers=tuple(modifiers),
                      base_prior=BasePrior(1000.0, float(rng.choice([200.0, 400.0]))))
    roster = [f"m{i}" for i in range(int(rng.integers(2, 6)))]
    index = build_index(spec, roster)
    values = rng.normal(0.0, 60.0, len(index))
    values[: index.n_models] += rng.normal(1000.0, 150.0, index.n_models)
    games = []
    for _ in range(n_games or int(rng.integers(1, 51))):
        a, b = rng.choice(roster, size=2, replace=False)
        tags = {t for t in ("code", "chinese") if rng.random() < 0.5}
        games.append(Game(str(a), str(b), Outcome(str(rng.choice(["model_a", "model_b", "draw"]))),
                          tags=tags, features={"length": tuple(rng.normal(6.0, 1.0, 2))},
                          weight=float(rng.choice([1.0, 0.5, 2.0]))))
    return spec, Params(values, index), index, GameDataset.from_games(games)


# ======================================================
# Objetivo y gradiente
# ======================================================
def test_objective_single_decisive_game():
    spec = RatingSpec(base_prior=NO_PRIOR)
    params, index = _at(spec, ["A", "B"], [1000.0, 1000.0])
    assert objective(params, _games(("A", "B", "model_b")), spec, index) == pytest.approx(math.log(2), abs=1e-15)


def test_objective_single_draw():
    spec = RatingSpec(base_prior=NO_PRIOR)
    params, index = _at(spec, ["A", "B"], [1000.0, 1000.0])
    assert objective(params, _games(("A", "B", "draw")), spec, index) == pytest.approx(math.log(2), abs=1e-15)


def test_objective_empty_dataset_at_prior_mean():
    spec = RatingSpec()
    params, index = _at(spec, ["A", "B"], [1000.0, 1000.0])
    assert objective(params, GameDataset(), spec, index) == 0.0


def test_gradient_antisymmetric_without_prior():
    spec = RatingSpec(base_prior=BasePrior(0.0, None))
    ds = _games(("A", "B", "model_a"), ("B", "A", "model_a"))
    for values in ([0.0, 0.0], [35.0, -12.0]):
        params, index = _at(spec, ["A", "B"], values)
        g = gradient(params, ds, spec, index)
        assert g[0] == pytest.approx(-g[1], abs=1e-15)
        assert g.sum() == pytest.approx(0.0, abs=1e-15)


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(2024)
    for _ in range(100):
        spec, params, index, ds = _random_case(rng)
        fn = ObjectiveFunction.from_dataset(ds, spec, index)
        x = np.array(params.values)
        g = fn.gradient(x)
        h = 1e-4 * spec.scale
        for i in range(len(x)):
            e = np.zeros_like(x)
            e[i] = h
            fd = (fn.value_and_grad(x + e)[0] - fn.value_and_grad(x - e)[0]) / (2 * h)
            assert abs(fd - g[i]) <= 1e-6 * max(abs(g[i]), abs(fd), 1e-2), (index.names[i], fd, g[i])


def test_directional_derivative_consistency():
    rng = np.random.default_rng(5)
    spec, params, index, ds = _random_case(rng, n_games=40)
    fn = ObjectiveFunction.from_dataset(ds, spec, index)
    x = np.array(params.values)
    for _ in range(10):
        d = rng.normal(size=len(x))
        d /= np.linalg.norm(d)
        h = 1e-4 * spec.scale
        fd = (fn.value_and_grad(x + h * d)[0] - fn.value_and_grad(x - h * d)[0]) / (2 * h)
        proj = float(fn.gradient(x) @ d)
        assert abs(fd - proj) <= 1e-6 * max(abs(proj), 1e-2)


def test_convexity_probe():
    rng = np.random.default_rng(9)
    for _ in range(20):
        spec, params, index, ds = _random_case(rng)
        fn = ObjectiveFunction.from_dataset(ds, spec, index)
        x1 = np.array(params.values)
        x2 = x1 + rng.normal(0.0, 100.0, len(x1))
        lam = float(rng.uniform(0.05, 0.95))
        mid = fn.value_and_grad(lam * x1 + (1 - lam) * x2)[0]
        chord = lam * fn.value_and_grad(x1)[0] + (1 - lam) * fn.value_and_grad(x2)[0]
        assert mid <= chord + 1e-9


def test_clamped_probabilities_are_counted():
    spec = RatingSpec(base_prior=NO_PRIOR)
    params, index = _at(spec, ["A", "B"], [0.0, 40000.0])
    fn = ObjectiveFunction.from_dataset(_games(("A", "B", "model_a")), spec, index)
    f, _ = fn.value_and_grad(np.array(params.values))
    assert fn.clamp_count == 1
    assert f == pytest.approx(-math.log(1e-15), rel=1e-6)


# ======================================================
# fit_map
# ======================================================
def test_draws_fit_equal_ratings():
    ds = _games(*[("A", "B", "draw")] * 20, *[("B", "A", "draw")] * 7)
    fit = fit_map(ds, RatingSpec())
    assert fit.converged
    assert abs(fit.params.base("A") - fit.params.base("B")) < 0.1


def test_empty_dataset_with_roster_returns_priors():
    fit = fit_map(GameDataset(), RatingSpec(), roster=["A", "B"])
    assert fit.converged
    assert fit.objective == 0.0
    assert list(fit.params.values) == [1000.0, 1000.0]
    with pytest.raises(DataError):
        fit_map(GameDataset(), RatingSpec())


def test_fit_map_refuses_pending_cv():
    spec = RatingSpec(modifiers=(ModifierTerm("code", CODE),))
    with pytest.raises(RatingSpecError):
        fit_map(_games(("A", "B", "model_a")), spec)


def test_trace_non_increasing_and_first_order_condition():
    rng = np.random.default_rng(1)
    spec, _, _, ds = _random_case(rng, n_games=50)
    fit = fit_map(ds, spec, FitOptions(gradient_tolerance=1e-8))
    assert fit.converged
    assert fit.max_gradient <= 1e-8
    assert all(b <= a + 1e-9 for a, b in zip(fit.trace, fit.trace[1:]))
    g = gradient(fit.params, ds, spec, fit.index)
    assert np.max(np.abs(g)) <= 1e-8


def test_brute_force_grid_oracle():
    rng = np.random.default_rng(3)
    strength = {"A": 1100.0, "B": 1000.0, "C": 950.0}
    triples = []
    for _ in range(30):
        a, b = rng.choice(list(strength), size=2, replace=False)
        p_b = 1 / (1 + math.exp(-(strength[b] - strength[a]) / 400))
        triples.append((str(a), str(b), "model_b" if rng.random() < p_b else "model_a"))
    ds = _games(*triples)
    spec = RatingSpec()
    fit = fit_map(ds, spec, FitOptions(gradient_tolerance=1e-10))
    fn = ObjectiveFunction.from_dataset(ds, spec, fit.index)

    # rejilla de paso 1 sobre B y C con A anclado en su valor ajustado
    r_a = fit.params.base("A")
    grid = np.arange(800.0, 1201.0, 1.0)
    rb, rc = np.meshgrid(grid, grid, indexing="ij")
    rb, rc = rb.ravel(), rc.ravel()
    pos = {m: i for i, m in enumerate(fit.index.models)}
    values = {"A": np.full_like(rb, r_a), "B": rb, "C": rc}
    total = np.zeros_like(rb)
    for g in ds:
        z = (values[g.model_b] - values[g.model_a]) / 400.0
        total -= g.score * -np.logaddexp(0.0, -z) + (1 - g.score) * -np.logaddexp(0.0, z)
    for m in ("A", "B", "C"):
        total += 0.5 * (values[m] - 1000.0) ** 2 / 400.0 ** 2
    grid_best = float(total.min())

    # curvatura medida: hessiano por diferencias del gradiente
    x = np.array(fit.params.values)
    h = 1e-2
    hess = np.column_stack([
        (fn.gradient(x + h * np.eye(3)[i]) - fn.gradient(x - h * np.eye(3)[i])) / (2 * h) for i in range(3)
    ])
    curvature = float(np.max(np.linalg.eigvalsh(0.5 * (hess + hess.T))))
    bound = 0.5 * curvature * 2 * 0.5 ** 2

    assert all(800 <= fit.params.base(m) <= 1200 for m in pos)
    assert fit.objective <= grid_best + 1e-12
    assert grid_best - fit.objective <= 1.01 * bound + 1e-12


def test_identifiability_from_different_starts():
    rng = np.random.default_rng(8)
    spec, _, index, ds = _random_case(rng, n_games=50)
    spec = RatingSpec(
        shared=tuple(SharedTerm(t.feature, 400.0) for t in spec.shared),
        modifiers=spec.modifiers,
        base_prior=spec.base_prior,
    )
    fit_a = fit_map(ds, spec, FitOptions(gradient_tolerance=1e-9))
    start = Params(np.array(fit_a.params.values) + rng.normal(0, 300, len(fit_a.index)), fit_a.index)
    fit_b = fit_map(ds, spec, FitOptions(gradient_tolerance=1e-9, initial_params=start))
    assert np.max(np.abs(np.array(fit_a.params.values) - np.array(fit_b.params.values))) < 1e-3


def test_gradient_descent_agrees_with_lbfgs():
    truth = make_truth(RatingSpec(), ["a", "b", "c", "d"], seed=1)
    ds = simulate_games(truth, ["a", "b", "c", "d"], n=300, seed=2)
    lbfgs = fit_map(ds, RatingSpec(), FitOptions(gradient_tolerance=1e-9))
    gd = fit_map(ds, RatingSpec(), FitOptions(optimizer="gd", max_iterations=20000))
    assert gd.converged
    assert np.max(np.abs(np.array(lbfgs.params.values) - np.array(gd.params.values))) < 0.05


def test_max_iterations_one_does_not_converge():
    truth = make_truth(RatingSpec(), [f"m{i}" for i in range(8)], base_spread=300.0, seed=3)
    ds = simulate_games(truth, truth.index.models, n=2000, seed=3)
    fit = fit_map(ds, RatingSpec(), FitOptions(max_iterations=1))
    assert not fit.converged
    assert fit.iterations <= 1


def _mm_bradley_terry(ds: GameDataset, models, iters=20000):
    """BT de máxima verosimilitud por MM; los empates cuentan medio punto para cada lado."""
    pos = {m: i for i, m in enumerate(models)}
    k = len(models)
    wins = np.zeros((k, k))
    for g in ds:
        a, b = pos[g.model_a], pos[g.model_b]
        wins[b, a] += g.score
        wins[a, b] += 1.0 - g.score
    n = wins + wins.T
    gamma = np.ones(k)
    for _ in range(iters):
        denom = (n / (gamma[:, None] + gamma[None, :])).sum(axis=1)
        new = wins.sum(axis=1) / denom
        new /= np.exp(np.mean(np.log(new)))
        if np.max(np.abs(new - gamma)) < 1e-14:
            gamma = new
            break
        gamma = new
    return 400.0 * np.log(gamma)


def test_reduces_to_plain_bradley_terry():
    models = [f"m{i}" for i in range(10)]
    truth = make_truth(RatingSpec(), models, base_mean=1000.0, base_spread=150.0, seed=12)
    ds = simulate_games(truth, models, n=5000, seed=12, draw_rate=0.1)
    fit = fit_map(ds, RatingSpec(base_prior=BasePrior(1000.0, 1e6)), FitOptions(gradient_tolerance=1e-9))
    mle = _mm_bradley_terry(ds, list(fit.index.models))
    fitted = np.array([fit.params.base(m) for m in fit.index.models])
    # ancla: primer modelo en el mismo valor
    mle = mle - mle[0] + fitted[0]
    assert np.max(np.abs(fitted - mle)) < 0.5


@pytest.mark.slow
def test_parameter_recovery_on_synthetic_data():
    models = [f"model_{i:02d}" for i in range(50)]
    truth_spec = RatingSpec(
        shared=(SharedTerm(LENGTH),),
        modifiers=(ModifierTerm("code", CODE, 50.0), ModifierTerm("chinese", ZH, 50.0)),
    )
    truth = make_truth(truth_spec, models, base_mean=1200.0, base_spread=100.0,
                       alphas={"length": 130.0}, modifier_sigma=50.0, seed=42)
    mix = [({"code"}, 0.2), ({"chinese"}, 0.2), (set(), 0.6)]
    ds = simulate_games(truth, models, mix, {"length": FeatureSampler("normal", 6.5, 0.5)}, n=200_000, seed=42)

    fit = fit_map(ds, truth_spec)
    assert fit.converged
    est = np.array([fit.params.base(m) for m in models])
    real = np.array([truth.params.base(m) for m in models])
    # el nivel global no es identificable por la verosimilitud: se comparan ratings centrados
    mae = np.mean(np.abs((est - est.mean()) - (real - real.mean())))
    assert mae < 15
    assert spearmanr(est, real).correlation >= 0.99
    assert fit.params.alpha("length") == pytest.approx(130.0, rel=0.10)


# ======================================================
# held_out_loss
# ======================================================
def _fit_with(values, roster, spec=None):
    spec = spec or RatingSpec()
    params, index = _at(spec, roster, values)
    return FitResult(params=params, index=index, objective=0.0, iterations=0, converged=True, spec=spec)


def test_held_out_equal_ratings_is_ln2():
    fit = _fit_with([1000.0, 1000.0], ["A", "B"])
    test = _games(("A", "B", "model_a"), ("A", "B", "model_b"), ("B", "A", "model_a"), ("B", "A", "model_b"))
    assert held_out_loss(fit, test) == pytest.approx(math.log(2), abs=1e-12)


def test_held_out_perfect_predictor():
    fit = _fit_with([0.0, 30000.0], ["A", "B"])
    assert held_out_loss(fit, _games(("A", "B", "model_b"), ("B", "A", "model_a"))) < 1e-12


def test_held_out_unseen_model_uses_prior_mean():
    fit = _fit_with([1000.0, 1200.0], ["A", "B"])
    loss = held_out_loss(fit, _games(("A", "Z", "model_b")))
    assert loss == pytest.approx(math.log(2), abs=1e-12)


def test_held_out_empty():
    with pytest.raises(DataError):
        held_out_loss(_fit_with([1000.0, 1000.0], ["A", "B"]), GameDataset())


def test_oracle_is_not_beaten_on_its_own_split():
    truth = make_truth(RatingSpec(), ["a", "b", "c"], seed=0)
    ds = simulate_games(truth, ["a", "b", "c"], n=2000, seed=0)
    other = fit_map(simulate_games(truth, ["a", "b", "c"], n=300, seed=1), RatingSpec())
    oracle = fit_map(ds, RatingSpec(base_prior=BasePrior(1000.0, 1e6)))
    assert held_out_loss(other, ds) - held_out_loss(oracle, ds) >= -1e-12


# ======================================================
# Validación cruzada
# ======================================================
def _task_data(modifier_sigma, n_models, n, seed):
    models = [f"m{i:02d}" for i in range(n_models)]
    spec = RatingSpec(modifiers=(ModifierTerm("code", CODE, 50.0),))
    truth = make_truth(spec, models, base_spread=100.0, modifier_sigma=modifier_sigma, seed=seed)
    return simulate_games(truth, models, [({"code"}, 0.5), (set(), 0.5)], n=n, seed=seed)


def test_cv_picks_grid_minimum_without_task_effects():
    ds = _task_data(0.0, 40, 8000, seed=21)
    spec = RatingSpec(modifiers=(ModifierTerm("code", CODE),))
    assert tune_prior_sigma(ds, spec, "code", grid=[10.0, 80.0, 320.0], folds=3, seed=0) == 10.0


def test_cv_picks_grid_maximum_with_large_task_effects():
    ds = _task_data(200.0, 10, 20000, seed=22)
    spec = RatingSpec(modifiers=(ModifierTerm("code", CODE),))
    grid = [10.0, 40.0, 160.0]
    assert tune_prior_sigma(ds, spec, "code", grid=grid, folds=5, seed=0) == 160.0
    assert tune_prior_sigma(ds, spec, "code", grid=grid, folds=2, seed=0) == 160.0


def test_cv_argument_errors():
    ds = _task_data(0.0, 4, 200, seed=1)
    with pytest.raises(RatingSpecError):
        tune_prior_sigma(ds, RatingSpec(modifiers=(ModifierTerm("code", CODE, 20.0),)), "code")
    with pytest.raises(RatingSpecError):
        tune_prior_sigma(ds, RatingSpec(modifiers=(ModifierTerm("code", CODE),)), "code", grid=[])
    with pytest.raises(DataError):
        tune_prior_sigma(ds, RatingSpec(modifiers=(ModifierTerm("code", CODE),)), "code", folds=1)


def test_resolve_all_cv_sigmas():
    ds = _task_data(30.0, 6, 1500, seed=5)
    spec = RatingSpec(modifiers=(ModifierTerm("code", CODE), ModifierTerm("other", parse_tag_expr("!tag('code')"))))
    resolved = resolve_cv_sigmas(ds, spec, grid=[10.0, 100.0], folds=2, seed=0)
    assert resolved.pending_cv() == []
    assert {t.prior_sigma for t in resolved.modifiers} <= {10.0, 100.0}
    assert fit_map(ds, resolved).converged


# ======================================================
# Serialización
# ======================================================
def test_fit_result_file_roundtrip(tmp_path):
    rng = np.random.default_rng(6)
    spec, _, _, ds = _random_case(rng, n_games=30)
    fit = fit_map(ds, spec)
    path = save_fit_result(fit, tmp_path / "fit.json")
    data = json.loads(path.read_text(encoding="utf-8"))
    assert {"objective", "iterations", "converged", "params"} <= set(data)
    assert all(name.split(":")[0] in ("base", "alpha", "beta") for name in data["params"])
    loaded = load_fit_result(path)
    assert loaded.index == fit.index
    assert np.array_equal(np.array(loaded.params.values), np.array(fit.params.values))
    assert loaded.spec == fit.spec
