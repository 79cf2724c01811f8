"""Scalar special functions: Gaussian capacity/dispersion, Phi, log-gamma, log I_v.

Every rate is in nats. The normal CDF/quantile and log-Bessel routines accept
numpy arrays as well as scalars; array inputs return arrays.

``log_bessel_i`` regimes (order ``v``, argument ``x``):

* ``v > 30``: Debye uniform asymptotic expansion, terms through ``u_4``.
* ``v <= 30`` and ``x <= 1000``: power series summed in log space.
* ``v <= 30`` and ``x > 1000``: Hankel large-argument expansion.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln, logsumexp, ndtr, ndtri

DEBYE_ORDER_THRESHOLD = 30.0
HANKEL_ARG_THRESHOLD = 1000.0

_LOG_2PI = math.log(2.0 * math.pi)


def _check_snr(s):
    s = float(s)
    if not math.isfinite(s) or s < 0:
        raise ValueError(f"SNR must be finite and nonnegative, got {s!r}")
    return s


def gaussian_capacity(s: float) -> float:
    """AWGN capacity ``0.5*log(1+s)`` in nats per channel use."""
    s = _check_snr(s)
    return 0.5 * math.log1p(s)


def gaussian_dispersion(s: float) -> float:
    """AWGN dispersion ``s(s+2) / (2(s+1)^2)`` in nats^2 per channel use."""
    s = _check_snr(s)
    # (1 - r)(1 + r)/2 with r = 1/(1+s) and 1 - r = s/(1+s): no overflow, no cancellation
    r = 1.0 / (1.0 + s)
    return 0.5 * (s * r) * (1.0 + r)


def std_normal_cdf(t):
    """Standard normal CDF; +/-inf map to 1/0, NaN raises."""
    arr = np.asarray(t, dtype=float)
    if np.isnan(arr).any():
        raise ValueError("std_normal_cdf: NaN argument")
    out = ndtr(arr)
    return float(out) if out.ndim == 0 else out


def std_normal_quantile(p):
    """Inverse of the standard normal CDF on the open interval (0, 1).

    The rational approximation is polished with two Newton steps on the
    erfc-based CDF.
    """
    arr = np.asarray(p, dtype=float)
    if np.isnan(arr).any() or (arr <= 0).any() or (arr >= 1).any():
        raise ValueError("std_normal_quantile: p must lie strictly inside (0, 1)")
    x = ndtri(arr)
    for _ in range(2):
        # work on the smaller tail so the residual is not swamped by rounding
        lower = x <= 0
        resid = np.where(lower, ndtr(x) - arr, ndtr(-x) - (1.0 - arr))
        dens = np.exp(-0.5 * x * x - 0.5 * _LOG_2PI)
        step = np.where(dens > 0, resid / np.where(dens > 0, dens, 1.0), 0.0)
        x = np.where(lower, x - step, x + step)
    return float(x) if x.ndim == 0 else x


def log_gamma(z: float) -> float:
    """``log Gamma(z)`` for real ``z > 0``."""
    z = float(z)
    if not math.isfinite(z) or z <= 0:
        raise ValueError(f"log_gamma needs z > 0, got {z!r}")
    return math.lgamma(z)


def stirling_log_gamma(z: float) -> float:
    """Leading terms of Binet's formula: ``(z-1/2)log z - z + log(2 pi)/2``."""
    return (z - 0.5) * math.log(z) - z + 0.5 * _LOG_2PI


def binet_remainder_bound(z: float) -> float:
    """Upper bound ``1/(12 z)`` on the Binet integral remainder (positive for z > 0)."""
    return 1.0 / (12.0 * z)


def binet_upper_bound(z: float) -> float:
    """Upper bound on ``log Gamma(z)``: Stirling terms plus the remainder bound."""
    if z <= 0:
        raise ValueError("binet_upper_bound needs z > 0")
    return stirling_log_gamma(z) + binet_remainder_bound(z)


# Debye polynomials u_k(p), DLMF 10.41.10
def _debye_u(p):
    p2 = p * p
    u1 = p * (3.0 - 5.0 * p2) / 24.0
    u2 = p2 * (81.0 - 462.0 * p2 + 385.0 * p2 * p2) / 1152.0
    u3 = p * p2 * (30375.0 - 369603.0 * p2 + 765765.0 * p2**2 - 425425.0 * p2**3) / 414720.0
    u4 = (
        p2
        * p2
        * (
            4465125.0
            - 94121676.0 * p2
            + 349922430.0 * p2**2
            - 446185740.0 * p2**3
            + 185910725.0 * p2**4
        )
        / 39813120.0
    )
    return u1, u2, u3, u4


def _log_bessel_debye(v, x):
    root = np.sqrt(v * v + x * x)
    p = v / root
    u1, u2, u3, u4 = _debye_u(p)
    series = 1.0 + u1 / v + u2 / v**2 + u3 / v**3 + u4 / v**4
    eta = root + v * np.log(x / (v + root))
    return eta - 0.5 * _LOG_2PI - 0.5 * np.log(root) + np.log(series)


def _log_bessel_series(v, x):
    # terms (x/2)^(2k+v) / (k! Gamma(k+v+1)) are all positive: no cancellation
    kmax = int(np.max(x)) // 2 + int(10 * math.sqrt(np.max(x) + 1.0)) + 60
    k = np.arange(kmax + 1, dtype=float)[:, None]
    log_half = np.log(x / 2.0)[None, :]
    terms = (2.0 * k + v[None, :]) * log_half - gammaln(k + 1.0) - gammaln(k + v[None, :] + 1.0)
    return logsumexp(terms, axis=0)


def _log_bessel_hankel(v, x):
    mu = 4.0 * v * v
    total = np.ones_like(x)
    term = np.ones_like(x)
    for k in range(1, 40):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        total = total + term
        if np.all(np.abs(term) < 1e-17 * np.abs(total)):
            break
    return x - 0.5 * np.log(2.0 * np.pi * x) + np.log(total)


def log_bessel_i(order, z):
    """Logarithm of the modified Bessel function of the first kind ``I_order(z)``.

    Stays finite for orders in the thousands, where ``I_v`` itself under- or
    overflows. Broadcasts over array arguments.
    """
    v, x = np.broadcast_arrays(np.asarray(order, dtype=float), np.asarray(z, dtype=float))
    scalar = v.ndim == 0
    v = np.atleast_1d(v).astype(float).ravel()
    x = np.atleast_1d(x).astype(float).ravel()
    if not (np.isfinite(v).all() and np.isfinite(x).all()):
        raise ValueError("log_bessel_i: non-finite input")
    if (v < 0).any() or (x < 0).any():
        raise ValueError("log_bessel_i: order and argument must be nonnegative")

    out = np.empty_like(x)
    zero = x == 0
    out[zero] = np.where(v[zero] == 0, 0.0, -np.inf)

    debye = ~zero & (v > DEBYE_ORDER_THRESHOLD)
    hankel = ~zero & ~debye & (x > HANKEL_ARG_THRESHOLD)
    series = ~zero & ~debye & ~hankel
    if debye.any():
        out[debye] = _log_bessel_debye(v[debye], x[debye])
    if hankel.any():
        out[hankel] = _log_bessel_hankel(v[hankel], x[hankel])
    if series.any():
        out[series] = _log_bessel_series(v[series], x[series])

    if scalar:
        return float(out[0])
    return out.reshape(np.broadcast(np.asarray(order), np.asarray(z)).shape)


def prokhorov_log_bound(order, z):
    """Log of the Prokhorov bound on ``z^-k I_k(z)``.

    ``z^-k I_k(z) <= sqrt(pi/8) (k^2+z^2)^(-1/4) (k+sqrt(k^2+z^2))^(-k) exp(sqrt(k^2+z^2))``
    """
    k = np.asarray(order, dtype=float)
    z = np.asarray(z, dtype=float)
    root = np.sqrt(k * k + z * z)
    return 0.5 * np.log(np.pi / 8.0) - 0.5 * np.log(root) - k * np.log(k + root) + root
