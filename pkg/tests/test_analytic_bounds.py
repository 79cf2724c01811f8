import math

import numpy as np
import pytest
from scipy import integrate
from scipy.stats import chi2

from icdisp import rng
from icdisp.analytic_bounds import (
    finite_n_ratio_check,
    importance_sampling_mean,
    k_components,
    k_estimate,
    log_d11,
    log_d11_bound,
    log_d12,
    phi_convergence_gap,
    phi_finite,
    phi_limit,
    rho_band,
    rho_limit,
    scan_phi,
    scan_rho,
)
from icdisp.channel import ChannelParams

OTHER_CHANNEL = ChannelParams(h11=0.7, h12=5.0, h21=2.5, h22=1.3, p1=2.0, p2=0.5)


def test_phi_limit_peak_and_sign(ch):
    assert abs(phi_limit(ch, 2.0)) <= 1e-10
    assert phi_limit(ch, 1.0) < 0
    assert abs(phi_limit(ch, 1 + ch.snr2, receiver=2)) <= 1e-10
    for bad in (0.0, -1.0):
        with pytest.raises(ValueError):
            phi_limit(ch, bad)


def test_rho_limit_peak_band_and_edges(ch):
    assert rho_band(ch) == pytest.approx((4.0, 16.0))
    assert abs(rho_limit(ch, 10.0)) <= 1e-10
    assert abs(rho_limit(ch, 17.0, receiver=2)) <= 1e-10
    assert rho_limit(ch, 4.0 + 1e-12) < -20
    assert rho_limit(ch, 16.0 - 1e-12) < -20
    for bad in (4.0, 16.0, 2.0, 20.0):
        with pytest.raises(ValueError):
            rho_limit(ch, bad)
    with pytest.raises(ValueError):
        rho_limit(ch, 10.0, receiver=3)


@pytest.mark.parametrize("c", [None, OTHER_CHANNEL])
@pytest.mark.parametrize("rx", [1, 2])
def test_scans_nonpositive_with_expected_argmax(ch, c, rx):
    c = c or ch
    for report in (scan_phi(c, rx), scan_rho(c, rx)):
        assert report.max_value <= 1e-10
        assert report.violation_count == 0
        assert abs(report.argmax - report.extra["expected_argmax"]) <= 1e-3
        assert len(report.grid) >= 9_000


def test_phi_scan_on_fixed_interval(ch):
    r = scan_phi(ch, lo=0.01, hi=20.0)
    assert r.max_value <= 1e-10 and abs(r.argmax - 2.0) <= 1e-3


def test_phi_finite_converges(ch):
    assert phi_convergence_gap(ch, 10_000) <= 1e-3
    assert phi_convergence_gap(ch, 10_000) < phi_convergence_gap(ch, 100)
    assert phi_finite(ch, 2.0, 10**8) == pytest.approx(phi_limit(ch, 2.0), abs=1e-6)


@pytest.mark.parametrize("n", [10, 50, 100, 200])
def test_d11_bound_holds(ch, n):
    r = finite_n_ratio_check(ch, n, 10_000, seed=1)
    assert r.violation_count == 0
    assert math.isfinite(r.max_value)


def test_d11_bound_holds_on_dense_grid(ch):
    for n in (12, 64, 400):
        r2 = n * np.geomspace(1e-4, 40, 2000)
        assert np.all(log_d11(ch, n, r2) <= log_d11_bound(ch, n, r2))


def test_d11_max_stays_bounded(ch):
    m = [finite_n_ratio_check(ch, n, 10_000, seed=2).max_value for n in (50, 100, 200)]
    assert m[1] <= m[0] + 1 and m[2] <= m[1] + 1


def test_ratio_check_rejects_odd_or_small_n(ch):
    with pytest.raises(ValueError):
        finite_n_ratio_check(ch, 51, 100, seed=0)
    with pytest.raises(ValueError):
        finite_n_ratio_check(ch, 8, 100, seed=0)


@pytest.mark.parametrize("rx", [1, 2])
def test_d11_normalized_under_surrogate(ch, rx):
    mean, se = importance_sampling_mean(ch, 100, 20_000, seed=3, receiver=rx)
    assert abs(mean - 1) <= 3 * se


@pytest.mark.parametrize("n", [20, 100])
@pytest.mark.parametrize("rx", [1, 2])
def test_b_ratio_integrates_to_one(ch, n, rx):
    # under the Gaussian surrogate, ||b||^2 / (s + q) is chi-square with n degrees of freedom
    lo, hi = rho_band(ch, rx)
    s, q = (ch.snr1, ch.inr1) if rx == 1 else (ch.snr2, ch.inr2)
    dens = lambda z: math.exp(log_d12(ch, n, z, rx)) * chi2.pdf(n * z / (s + q), n) * n / (s + q)  # noqa: E731
    val, _ = integrate.quad(dens, lo, hi, limit=200, epsabs=1e-11)
    assert val == pytest.approx(1.0, abs=1e-7)


def test_b_density_matches_simulation(ch):
    # fraction of ||h11 x1 + h21 x2||^2 / n below 10 against the exact law
    n = 30
    gen = rng.chunk_generator(0, rng.STREAM_MISC, 77)
    t = rng.normals(gen, (2, 200_000, n))
    x1 = math.sqrt(n * ch.p1) * t[0] / np.linalg.norm(t[0], axis=1, keepdims=True)
    x2 = math.sqrt(n * ch.p2) * t[1] / np.linalg.norm(t[1], axis=1, keepdims=True)
    z = np.sum((ch.h11 * x1 + ch.h21 * x2) ** 2, axis=1) / n
    tot = ch.snr1 + ch.inr1
    dens = lambda u: math.exp(log_d12(ch, n, u)) * chi2.pdf(n * u / tot, n) * n / tot  # noqa: E731
    p, _ = integrate.quad(dens, 4.0, 10.0, limit=200)
    emp = np.mean(z < 10.0)
    assert abs(emp - p) <= 4 * math.sqrt(p * (1 - p) / z.size)


def test_k_components(ch):
    comps = k_components(ch, 200)
    assert set(comps) == {"K11", "K12", "K21", "K22"}
    assert all(math.isfinite(v) and v >= 1 for v in comps.values())
    assert comps["K11"] == pytest.approx(1.155, abs=2e-3)
    assert comps["K12"] == pytest.approx(2.35, abs=1e-2)
    ks = [k_estimate(ch, n) for n in (100, 200, 400)]
    assert min(ks) >= 4
    assert max(ks) <= 2 * min(ks)
