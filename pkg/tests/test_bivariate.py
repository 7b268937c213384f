import numpy as np
import pytest

from cholord import (
    DegenerateColumnWarning,
    DimensionMismatch,
    NoiseSpec,
    TooFewSamples,
    conditional_variance,
    decide_bivariate,
    make_bivariate,
)


def test_independent_columns_recover_marginal_variance():
    rng = np.random.default_rng(0)
    t = rng.standard_normal(500) * 1.3
    g = rng.standard_normal(500)
    var_t = float(np.mean((t - t.mean()) ** 2))
    for reg in ("linear", "knn"):
        assert conditional_variance(t, g, regressor=reg) == pytest.approx(var_t, rel=0.10)


def test_exact_linear_relation_gives_zero():
    rng = np.random.default_rng(1)
    g = rng.standard_normal(200)
    assert conditional_variance(2.0 * g, g) <= 1e-6


def test_forward_model_recovers_noise_variance():
    rng = np.random.default_rng(2)
    g = rng.standard_normal(500)
    t = 0.8 * g + rng.standard_normal(500) * np.sqrt(0.5)
    assert conditional_variance(t, g) == pytest.approx(0.5, rel=0.10)


def test_degenerate_column_warns_and_returns_marginal():
    rng = np.random.default_rng(3)
    t = rng.standard_normal(50)
    with pytest.warns(DegenerateColumnWarning):
        got = conditional_variance(t, np.full(50, 3.0))
    assert got == pytest.approx(np.mean((t - t.mean()) ** 2))


def test_preconditions():
    with pytest.raises(TooFewSamples):
        conditional_variance(np.ones(5), np.ones(5))
    with pytest.raises(DimensionMismatch):
        decide_bivariate(np.zeros((20, 3)))


def test_identical_independent_columns_decide_none():
    rng = np.random.default_rng(4)
    X = rng.standard_normal((800, 2))
    decision = decide_bivariate(X)
    assert decision.verdict == "none"
    assert decision.mu < 0.05


def test_swap_antisymmetry_is_exact():
    data, _ = make_bivariate("forward", n=400, seed=5, weight=1.1)
    d1 = decide_bivariate(data.values)
    d2 = decide_bivariate(data.values[:, [1, 0]])
    assert d1.verdict == "forward" and d2.verdict == "backward"
    assert d1.mu == d2.mu
    assert (d1.f_x, d1.f_y) == (d2.f_y, d2.f_x)
    assert 0.0 <= d1.mu <= 1.0


def test_forward_accuracy_quick():
    noise = NoiseSpec("gaussian_hetero", var_range=(0.7, 1.2))
    hits = 0
    for seed in range(20):
        data, label = make_bivariate("forward", noise=noise, n=500, seed=seed)
        hits += decide_bivariate(data.values).verdict == label
    assert hits >= 17


def test_knn_regressor_on_nonlinear_pair():
    rng = np.random.default_rng(6)
    g = rng.standard_normal(600)
    t = np.sin(2.0 * g) + 0.3 * rng.standard_normal(600)
    est = conditional_variance(t, g, regressor="knn")
    assert est == pytest.approx(0.09, rel=0.35)  # sigma^2 = 0.09 plus knn bias
