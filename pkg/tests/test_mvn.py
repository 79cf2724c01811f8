import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import multivariate_normal, norm

from icdisp.mvn import BeBoundInputs, MvnSpec, berry_esseen_bound, psi_upper, psi_upper_detail


@settings(max_examples=100)
@given(
    st.lists(st.floats(-6, 6), min_size=1, max_size=4),
    st.lists(st.floats(0.01, 10), min_size=4, max_size=4),
)
def test_diagonal_is_product_of_marginals(t, variances):
    d = len(t)
    spec = MvnSpec(np.zeros(d), np.diag(variances[:d]))
    expected = float(np.prod(norm.cdf(np.array(t) / np.sqrt(variances[:d]))))
    res = psi_upper_detail(t, spec)
    assert res.method == "product"
    assert abs(res.value - expected) <= 1e-10


@pytest.mark.parametrize("rho", [-0.95, -0.5, 0.0, 0.3, 0.9])
def test_bivariate_orthant_arcsine_identity(rho):
    spec = MvnSpec([0, 0], [[1, rho], [rho, 1]])
    res = psi_upper_detail([0, 0], spec)
    assert res.value == pytest.approx(0.25 + math.asin(rho) / (2 * math.pi), abs=max(5 * res.std_error, 1e-9))


@pytest.mark.parametrize("seed", range(4))
def test_general_covariance_matches_scipy(seed):
    g = np.random.default_rng(seed)
    d = 2 + seed % 3
    a = g.normal(size=(d, d))
    cov = a @ a.T + 0.2 * np.eye(d)
    mean = g.normal(size=d)
    t = g.normal(size=d) + 0.5
    res = psi_upper_detail(t, MvnSpec(mean, cov))
    ref = multivariate_normal.cdf(t, mean, cov, abseps=1e-8, releps=1e-8)
    assert res.method == "genz-rqmc"
    assert res.value == pytest.approx(ref, abs=max(6 * res.std_error, 2e-5))


def test_infinite_thresholds_handled_symbolically():
    spec = MvnSpec([0, 0, 0], [[1, 0.5, 0.2], [0.5, 1, 0.1], [0.2, 0.1, 1]])
    assert psi_upper([np.inf] * 3, spec) == 1.0
    assert psi_upper([-np.inf, 0, 0], spec) == 0.0
    assert psi_upper([np.inf, 0.3, np.inf], spec) == pytest.approx(norm.cdf(0.3), abs=1e-12)


def test_singular_covariance_uses_reduced_dimension():
    # perfectly correlated pair: P(X <= a, X <= b) = Phi(min(a, b))
    spec = MvnSpec([0, 0], [[1, 1], [1, 1]])
    assert spec.chol is None
    res = psi_upper_detail([0.4, -0.2], spec)
    assert res.method == "reduced-rqmc"
    assert res.value == pytest.approx(norm.cdf(-0.2), abs=5e-3)


def test_deterministic_given_seed():
    spec = MvnSpec([0, 0, 0], [[1, 0.3, 0.1], [0.3, 1, 0.2], [0.1, 0.2, 1]])
    assert psi_upper([0.1, 0.2, 0.3], spec, seed=4) == psi_upper([0.1, 0.2, 0.3], spec, seed=4)


@pytest.mark.parametrize(
    "mean,cov",
    [
        ([0, 0], [[1, 0.5], [0.4, 1]]),
        ([0, 0], [[1, 2], [2, 1]]),
        (np.zeros(5), np.eye(5)),
        ([0, 0], np.eye(3)),
    ],
)
def test_invalid_specs_rejected(mean, cov):
    with pytest.raises(ValueError):
        MvnSpec(mean, cov)


def test_threshold_validation():
    spec = MvnSpec([0, 0], np.eye(2))
    with pytest.raises(ValueError):
        psi_upper([0.0], spec)
    with pytest.raises(ValueError):
        psi_upper([0.0, float("nan")], spec)


def test_berry_esseen_value():
    b = berry_esseen_bound(BeBoundInputs(dim=2, third_moment=1.5, lambda_min=0.25, n=400))
    assert b == pytest.approx(254 * math.sqrt(2) * 1.5 / (0.125 * 20))
    with pytest.raises(ValueError):
        BeBoundInputs(dim=2, third_moment=1.0, lambda_min=0.0, n=10)
