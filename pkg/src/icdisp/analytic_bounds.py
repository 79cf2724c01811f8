"""Numerical checks of the output-density ratio bounds behind the constant K.

Receiver 1 quantities use the direct SNR ``s = h11^2 p1`` and interference
power ``q = h21^2 p2``; ``receiver=2`` swaps in ``h22^2 p2`` and ``h12^2 p1``.

Two density ratios matter:

* ``D11``: the conditional output law given the interferer's codeword (a
  noncentral spherical law with a Bessel-function density) against its
  product-Gaussian surrogate. It depends on ``y`` only through
  ``z = ||y - h21 x2||^2 / n``.
* ``D12'``: the law of ``b = h11 x1 + h21 x2`` (both codewords on spheres)
  against ``N(0, (s + q) I)``, which dominates the unconditional ratio. It
  depends only on ``z = ||b||^2 / n``, supported on
  ``((sqrt s - sqrt q)^2, (sqrt s + sqrt q)^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from . import rng
from .channel import ChannelParams
from .special import binet_remainder_bound, log_bessel_i

GRID_POINTS = 10_000
ENDPOINT_INSET = 1e-6


@dataclass
class BoundReport:
    name: str
    grid: list[tuple[float, float]]
    max_value: float
    argmax: float
    violation_count: int = 0
    extra: dict = field(default_factory=dict)


def _powers(ch: ChannelParams, receiver: int) -> tuple[float, float]:
    if receiver == 1:
        return ch.snr1, ch.inr1
    if receiver == 2:
        return ch.snr2, ch.inr2
    raise ValueError("receiver must be 1 or 2")


def _intended_power(ch: ChannelParams, receiver: int) -> float:
    return ch.p1 if receiver == 1 else ch.p2


def phi_limit(ch: ChannelParams, z, receiver: int = 1):
    """Large-n exponent of the ``D11`` bound; ``<= 0`` with equality at ``z = 1 + s``."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("phi_limit needs z > 0")
    s, _ = _powers(ch, receiver)
    w = np.sqrt(1.0 + 4.0 * s * z)
    out = math.log(2.0 * (1.0 + s)) - (1.0 + s) - s * z / (1.0 + s) + w - np.log1p(w)
    return float(out) if out.ndim == 0 else out


def phi_finite(ch: ChannelParams, z, n: int, receiver: int = 1):
    """Finite-n exponent ``phi_{xi,P,n}`` with ``xi = (n/2 - 1)/(n/2)``."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0):
        raise ValueError("phi_finite needs z > 0")
    s, _ = _powers(ch, receiver)
    xi = (n / 2.0 - 1.0) / (n / 2.0)
    w = np.sqrt(xi * xi + 4.0 * s * z)
    out = (
        math.log(2.0 * (1.0 + s)) - (1.0 + s)
        - s * z / (1.0 + s)
        + w
        - xi * np.log(xi + w)
        - 0.5 * (1.0 - xi) * np.log(w)
    )
    return float(out) if out.ndim == 0 else out


def rho_band(ch: ChannelParams, receiver: int = 1) -> tuple[float, float]:
    s, q = _powers(ch, receiver)
    return (math.sqrt(s) - math.sqrt(q)) ** 2, (math.sqrt(s) + math.sqrt(q)) ** 2


def rho_limit(ch: ChannelParams, z, receiver: int = 1):
    """Large-n exponent of ``D12'``; ``<= 0`` with equality at ``z = s + q``."""
    z = np.asarray(z, dtype=float)
    lo, hi = rho_band(ch, receiver)
    if np.any(z <= lo) or np.any(z >= hi):
        raise ValueError(f"rho_limit is defined only for {lo} < z < {hi}")
    s, q = _powers(ch, receiver)
    tot = s + q
    out = (
        math.log(tot / (math.e * q))
        + z / tot
        + np.log1p(-((z + s - q) ** 2) / (4.0 * s * z))
    )
    return float(out) if out.ndim == 0 else out


# --- exact finite-n log ratios ----------------------------------------------


def log_d11(ch: ChannelParams, n: int, r2, receiver: int = 1):
    """Exact ``log D11`` at ``r2 = ||y - h21 x2||^2`` (receiver 1 labels)."""
    s, _ = _powers(ch, receiver)
    r2 = np.asarray(r2, dtype=float)
    arg = np.sqrt(r2 * n * s)
    order = n / 2.0 - 1.0
    out = (
        math.log(0.5)
        + gammaln(n / 2.0)
        + (n / 2.0) * (math.log(2.0 * (1.0 + s)) - s)
        - s * r2 / (2.0 * (1.0 + s))
        + log_bessel_i(order, arg)
        - order * np.log(arg)
    )
    return float(out) if np.ndim(out) == 0 else out


def log_d11_bound(ch: ChannelParams, n: int, r2, receiver: int = 1):
    """``c11 + c_n + (n/2) phi_{xi,P,n}(r2/n)`` with ``c_n`` the Binet remainder bound."""
    c11 = math.log(0.5) + 0.5 * math.log(math.pi / 8.0) + 0.5 * math.log(2.0 * math.pi)
    c_n = binet_remainder_bound(n / 2.0)
    return c11 + c_n + (n / 2.0) * phi_finite(ch, np.asarray(r2, dtype=float) / n, n, receiver)


def log_d12(ch: ChannelParams, n: int, z, receiver: int = 1):
    """Exact ``log`` of (density of ``b``) / ``N(b; 0, (s+q) I)`` at ``||b||^2 = n z``.

    The cosine of the angle between two independent uniform directions in
    ``R^n`` has density proportional to ``(1 - c^2)^((n-3)/2)``; the radial law
    of ``b`` follows by the change of variables ``||b||^2 = A^2 + C^2 + 2 A C c``.
    """
    s, q = _powers(ch, receiver)
    z = np.asarray(z, dtype=float)
    lo, hi = rho_band(ch, receiver)
    if np.any(z <= lo) or np.any(z >= hi):
        raise ValueError(f"log_d12 is defined only for {lo} < z < {hi}")
    a_rad = math.sqrt(n * s)
    c_rad = math.sqrt(n * q)
    rho2 = n * z
    c = (rho2 - a_rad**2 - c_rad**2) / (2.0 * a_rad * c_rad)
    log_p = (
        2.0 * gammaln(n / 2.0)
        - gammaln((n - 1) / 2.0)
        - 0.5 * math.log(math.pi)
        - math.log(2.0)
        - (n / 2.0) * math.log(math.pi)
        + 0.5 * (n - 3) * np.log1p(-c * c)
        - math.log(a_rad * c_rad)
        - 0.5 * (n - 2) * np.log(rho2)
    )
    tot = s + q
    log_q = -(n / 2.0) * math.log(2.0 * math.pi * tot) - rho2 / (2.0 * tot)
    out = log_p - log_q
    return float(out) if out.ndim == 0 else out


# --- scans ------------------------------------------------------------------


def hybrid_grid(lo: float, hi: float, points: int) -> np.ndarray:
    """Half log-spaced, half linear grid on ``[lo, hi]`` (``lo > 0``), sorted and deduplicated."""
    half = points // 2
    grid = np.concatenate([np.geomspace(lo, hi, points - half), np.linspace(lo, hi, half)])
    return np.unique(grid)


def _refine_max(func, grid, values):
    i = int(np.argmax(values))
    a = grid[max(i - 1, 0)]
    b = grid[min(i + 1, len(grid) - 1)]
    if b > a:
        res = minimize_scalar(lambda x: -func(x), bounds=(a, b), method="bounded",
                              options={"xatol": 1e-12})
        if -res.fun >= values[i]:
            return float(res.x), float(-res.fun)
    return float(grid[i]), float(values[i])


def scan_phi(ch: ChannelParams, receiver: int = 1, points: int = GRID_POINTS,
             lo: float | None = None, hi: float | None = None) -> BoundReport:
    """Grid scan of ``phi_limit`` with the maximizer refined inside its bracket."""
    s, _ = _powers(ch, receiver)
    lo = 0.005 * (1.0 + s) if lo is None else lo
    hi = 10.0 * (1.0 + s) if hi is None else hi
    grid = hybrid_grid(lo, hi, points)
    values = phi_limit(ch, grid, receiver)
    argmax, vmax = _refine_max(lambda z: phi_limit(ch, z, receiver), grid, values)
    return BoundReport(
        name=f"phi_limit_rx{receiver}",
        grid=list(zip(grid.tolist(), values.tolist())),
        max_value=vmax,
        argmax=argmax,
        violation_count=int(np.sum(values > 1e-10)),
        extra={"expected_argmax": 1.0 + s, "grid_max": float(values.max())},
    )


def scan_rho(ch: ChannelParams, receiver: int = 1, points: int = GRID_POINTS) -> BoundReport:
    """Grid scan of ``rho_limit`` over the open band, endpoints inset by 1e-6 of its width."""
    s, q = _powers(ch, receiver)
    lo, hi = rho_band(ch, receiver)
    inset = ENDPOINT_INSET * (hi - lo)
    lo_in, hi_in = lo + inset, hi - inset
    if lo_in <= 0:
        grid = np.linspace(lo_in, hi_in, points)
    else:
        grid = hybrid_grid(lo_in, hi_in, points)
    values = rho_limit(ch, grid, receiver)
    argmax, vmax = _refine_max(lambda z: rho_limit(ch, z, receiver), grid, values)
    return BoundReport(
        name=f"rho_limit_rx{receiver}",
        grid=list(zip(grid.tolist(), values.tolist())),
        max_value=vmax,
        argmax=argmax,
        violation_count=int(np.sum(values > 1e-10)),
        extra={"expected_argmax": s + q, "band": (lo, hi), "grid_max": float(values.max())},
    )


def phi_convergence_gap(ch: ChannelParams, n: int, receiver: int = 1, points: int = GRID_POINTS) -> float:
    """``sup_z |phi_{xi,P,n}(z) - phi(z)|`` on the default scan grid."""
    s, _ = _powers(ch, receiver)
    grid = hybrid_grid(0.005 * (1.0 + s), 10.0 * (1.0 + s), points)
    return float(np.max(np.abs(phi_finite(ch, grid, n, receiver) - phi_limit(ch, grid, receiver))))


def _channel_law_r2(ch, n, samples, seed, receiver):
    # ||h_jj x_j + z||^2 with x_j uniform on its sphere; by rotation invariance
    # put x_j along the first axis
    s, _ = _powers(ch, receiver)
    gen = rng.chunk_generator(seed, rng.STREAM_CHANNEL_LAW, receiver)
    g = rng.normals(gen, (samples, n))
    g[:, 0] += math.sqrt(n * s)
    return np.einsum("ij,ij->i", g, g)


def finite_n_ratio_check(ch: ChannelParams, n: int, samples: int, seed: int,
                         receiver: int = 1) -> BoundReport:
    """Exact ``log D11`` against its exponential bound at channel-law samples.

    ``grid`` holds ``(||y - h21 x2||^2 / n, log D11)`` per sample.
    """
    if n % 2:
        raise ValueError("finite_n_ratio_check supports even n only")
    if n < 10:
        raise ValueError("n must be at least 10")
    r2 = _channel_law_r2(ch, n, samples, seed, receiver)
    exact = log_d11(ch, n, r2, receiver)
    bound = log_d11_bound(ch, n, r2, receiver)
    i = int(np.argmax(exact))
    return BoundReport(
        name=f"d11_rx{receiver}_n{n}",
        grid=list(zip((r2 / n).tolist(), exact.tolist())),
        max_value=float(exact[i]),
        argmax=float(r2[i] / n),
        violation_count=int(np.sum(exact > bound)),
        extra={"min_slack": float(np.min(bound - exact)), "bound_max": float(np.max(bound))},
    )


def importance_sampling_mean(ch: ChannelParams, n: int, samples: int, seed: int,
                             receiver: int = 1) -> tuple[float, float]:
    """Mean and standard error of ``D11`` under its surrogate law (should be 1)."""
    s, _ = _powers(ch, receiver)
    gen = rng.chunk_generator(seed, rng.STREAM_AUX_LAW, receiver)
    g = rng.normals(gen, (samples, n))
    r2 = (1.0 + s) * np.einsum("ij,ij->i", g, g)
    d = np.exp(log_d11(ch, n, r2, receiver))
    return float(d.mean()), float(d.std(ddof=1) / math.sqrt(samples))


def _sup(func, lo, hi, points):
    grid = np.linspace(lo, hi, points)
    values = func(grid)
    return _refine_max(func, grid, values)


def k_components(ch: ChannelParams, n: int, points: int = 4001) -> dict[str, float]:
    """Suprema of the four density ratios entering K (exact exponents, grid + refinement).

    ``K12`` and ``K22`` are replaced by the suprema of their dominating ``b``-ratios.
    """
    out = {}
    for rx, (kd, kb) in ((1, ("K11", "K12")), (2, ("K21", "K22"))):
        s, _ = _powers(ch, rx)
        _, v = _sup(lambda z: log_d11(ch, n, n * np.asarray(z), rx), 1e-6, 10.0 * (1.0 + s), points)
        out[kd] = math.exp(v)
        lo, hi = rho_band(ch, rx)
        inset = ENDPOINT_INSET * (hi - lo)
        _, v = _sup(lambda z: log_d12(ch, n, z, rx), lo + inset, hi - inset, points)
        out[kb] = math.exp(v)
    return out


def k_estimate(ch: ChannelParams, n: int) -> float:
    """``K11 + K12 + K21 + K22`` at blocklength ``n``."""
    return float(sum(k_components(ch, n).values()))
