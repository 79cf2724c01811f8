"""Monte-Carlo engine for the modified information densities.

Codewords are drawn uniformly on the power spheres by normalizing standard
Gaussian vectors; the four densities ``(i11, i21, i12, i22)`` are evaluated
either from inner-product closed forms or, as an independent oracle, by summing
per-letter Gaussian log-density ratios.

Density vectors are always ordered ``(i11, i21, i12, i22)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .channel import Alphas, ChannelParams, alphas, first_order, second_order
from .special import std_normal_cdf

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class SphereSample:
    """One block: codewords ``x1, x2``, noises ``z1, z2``, and the Gaussians ``t1, t2``
    that were normalized into the codewords. Arrays may carry leading batch axes."""

    x1: np.ndarray
    x2: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    t1: np.ndarray | None = None
    t2: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.x1.shape[-1]


@dataclass(frozen=True)
class DensitySample:
    i11: float
    i21: float
    i12: float
    i22: float

    def as_array(self) -> np.ndarray:
        return np.array([self.i11, self.i21, self.i12, self.i22])


def _to_sphere(t: np.ndarray, n: int, power: float) -> np.ndarray:
    return math.sqrt(n * power) * t / np.linalg.norm(t, axis=-1, keepdims=True)


def _draw_gaussians(seed, stream, chunk, shape):
    gen = rng.chunk_generator(seed, stream, chunk)
    return rng.normals(gen, shape)


def _guard_zero_rows(t, seed, stream, chunk):
    # a zero row cannot be normalized; redraw it from a dedicated substream
    bad = np.flatnonzero(np.linalg.norm(t, axis=-1) == 0)
    attempt = 0
    while bad.size:
        attempt += 1
        fresh = _draw_gaussians(seed, rng.STREAM_RESAMPLE + 1000 * attempt + stream, chunk,
                                (bad.size, t.shape[-1]))
        t[bad] = fresh
        bad = bad[np.linalg.norm(t[bad], axis=-1) == 0]
    return t


def sphere_chunk(ch: ChannelParams, n: int, seed: int, chunk: int, stream: int = rng.STREAM_SPHERE):
    """All ``rng.CHUNK`` blocks of one chunk, as a batched ``SphereSample``."""
    g = _draw_gaussians(seed, stream, chunk, (4, rng.CHUNK, n))
    t1 = _guard_zero_rows(g[0], seed, stream, chunk)
    t2 = _guard_zero_rows(g[1], seed, stream, chunk)
    return SphereSample(
        x1=_to_sphere(t1, n, ch.p1),
        x2=_to_sphere(t2, n, ch.p2),
        z1=g[2],
        z2=g[3],
        t1=t1,
        t2=t2,
    )


def sample_sphere_block(ch: ChannelParams, n: int, seed: int, trial: int = 0) -> SphereSample:
    """Block number ``trial`` of the stream keyed by ``seed``."""
    if n < 2:
        raise ValueError("blocklength must be at least 2")
    chunk, offset = divmod(trial, rng.CHUNK)
    batch = sphere_chunk(ch, n, seed, chunk)
    return SphereSample(*(getattr(batch, f)[offset] for f in ("x1", "x2", "z1", "z2", "t1", "t2")))


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


def closed_form_array(ch: ChannelParams, s: SphereSample) -> np.ndarray:
    """Inner-product expressions for the four densities; shape ``batch + (4,)``."""
    a = alphas(ch)
    fo = first_order(ch)
    n = s.n
    zz1 = _dot(s.z1, s.z1)
    zz2 = _dot(s.z2, s.z2)
    x1z1 = _dot(s.x1, s.z1)
    x2z2 = _dot(s.x2, s.z2)
    x1x2 = _dot(s.x1, s.x2)
    x2z1 = _dot(s.x2, s.z1)
    x1z2 = _dot(s.x1, s.z2)
    i11 = n * fo.i11 + ((a.a11 - 1.0) * (n - zz1) + 2.0 * ch.h11 * x1z1) / (2.0 * a.a11)
    i21 = n * fo.i21 + ((a.a21 - 1.0) * (n - zz2) + 2.0 * ch.h22 * x2z2) / (2.0 * a.a21)
    i12 = n * fo.i12 + (
        (a.a12 - 1.0) * (n - zz1)
        + 2.0 * ch.h11 * ch.h21 * x1x2
        + 2.0 * ch.h11 * x1z1
        + 2.0 * ch.h21 * x2z1
    ) / (2.0 * a.a12)
    i22 = n * fo.i22 + (
        (a.a22 - 1.0) * (n - zz2)
        + 2.0 * ch.h22 * ch.h12 * x1x2
        + 2.0 * ch.h22 * x2z2
        + 2.0 * ch.h12 * x1z2
    ) / (2.0 * a.a22)
    return np.stack([i11, i21, i12, i22], axis=-1)


def _log_normal(y, mean, var):
    return -0.5 * (_LOG_2PI + math.log(var)) - (y - mean) ** 2 / (2.0 * var)


def log_ratio_array(ch: ChannelParams, s: SphereSample) -> np.ndarray:
    """Densities as sums of per-letter log-likelihood ratios against the auxiliary outputs.

    Receiver 1 compares ``N(h11 x1 + h21 x2, 1)`` with ``N(h21 x2, a11)`` and
    ``N(0, a12)``; receiver 2 compares ``N(h12 x1 + h22 x2, 1)`` with
    ``N(h12 x1, a21)`` and ``N(0, a22)``.
    """
    a = alphas(ch)
    y1 = ch.h11 * s.x1 + ch.h21 * s.x2 + s.z1
    y2 = ch.h12 * s.x1 + ch.h22 * s.x2 + s.z2
    w1 = _log_normal(y1, ch.h11 * s.x1 + ch.h21 * s.x2, 1.0)
    w2 = _log_normal(y2, ch.h12 * s.x1 + ch.h22 * s.x2, 1.0)
    i11 = np.sum(w1 - _log_normal(y1, ch.h21 * s.x2, a.a11), axis=-1)
    i12 = np.sum(w1 - _log_normal(y1, 0.0, a.a12), axis=-1)
    i21 = np.sum(w2 - _log_normal(y2, ch.h12 * s.x1, a.a21), axis=-1)
    i22 = np.sum(w2 - _log_normal(y2, 0.0, a.a22), axis=-1)
    return np.stack([i11, i21, i12, i22], axis=-1)


def info_densities_closed_form(ch: ChannelParams, s: SphereSample) -> DensitySample:
    return DensitySample(*map(float, closed_form_array(ch, s)))


def info_densities_log_ratio(ch: ChannelParams, s: SphereSample) -> DensitySample:
    return DensitySample(*map(float, log_ratio_array(ch, s)))


def u_vectors(ch: ChannelParams, t1, t2, z1, z2) -> np.ndarray:
    """Per-letter 10-vectors ``(U11, U21, U31, U41, U12, U22, U32, U42, U9, U10)``."""
    sp1, sp2 = math.sqrt(ch.p1), math.sqrt(ch.p2)
    return np.stack([
        1.0 - z1**2,
        ch.h11 * sp1 * t1 * z1,
        ch.h21 * sp2 * t2 * z1,
        ch.h11 * ch.h21 * sp1 * sp2 * t1 * t2,
        1.0 - z2**2,
        ch.h22 * sp2 * t2 * z2,
        ch.h12 * sp1 * t1 * z2,
        ch.h12 * ch.h22 * sp1 * sp2 * t1 * t2,
        t1**2 - 1.0,
        t2**2 - 1.0,
    ], axis=-1)


def u_vector(ch: ChannelParams, s: SphereSample, k: int) -> np.ndarray:
    """U-vector of letter ``k`` (1-based) of a single block."""
    if s.t1 is None or s.t2 is None:
        raise ValueError("sample carries no pre-normalization Gaussians")
    if not 1 <= k <= s.n:
        raise IndexError(f"letter index {k} outside 1..{s.n}")
    j = k - 1
    return u_vectors(ch, s.t1[..., j], s.t2[..., j], s.z1[..., j], s.z2[..., j])


def tau(u_bar, a: Alphas | ChannelParams) -> np.ndarray:
    """``(tau11, tau21, tau12, tau22)`` at a (batch of) 10-vectors."""
    if isinstance(a, ChannelParams):
        a = alphas(a)
    u = np.asarray(u_bar, dtype=float)
    u11, u21, u31, u41, u12, u22, u32, u42, u9, u10 = np.moveaxis(u, -1, 0)
    if np.any(u9 <= -1.0) or np.any(u10 <= -1.0):
        raise ValueError("tau is undefined unless u9 > -1 and u10 > -1")
    r9 = np.sqrt(1.0 + u9)
    r10 = np.sqrt(1.0 + u10)
    t11 = (a.a11 - 1.0) * u11 + 2.0 * u21 / r9
    t12 = (a.a12 - 1.0) * u11 + 2.0 * u21 / r9 + 2.0 * u31 / r10 + 2.0 * u41 / (r9 * r10)
    t21 = (a.a21 - 1.0) * u12 + 2.0 * u22 / r10
    t22 = (a.a22 - 1.0) * u12 + 2.0 * u22 / r10 + 2.0 * u32 / r9 + 2.0 * u42 / (r9 * r10)
    return np.stack([t11, t21, t12, t22], axis=-1)


def densities_from_tau(ch: ChannelParams, s: SphereSample) -> np.ndarray:
    """``n I_l + n/(2 a_l) tau_l(mean_k U_k)`` for each density ``l``."""
    a = alphas(ch)
    u_bar = u_vectors(ch, s.t1, s.t2, s.z1, s.z2).mean(axis=-2)
    scale = np.array([a.a11, a.a21, a.a12, a.a22])
    return s.n * first_order(ch).id + s.n / (2.0 * scale) * tau(u_bar, a)


# --- batched sampling --------------------------------------------------------


def _density_chunk(ch, n, seed, chunk, lo, hi, codewords):
    if codewords is None:
        s = sphere_chunk(ch, n, seed, chunk)
        s = SphereSample(s.x1[lo:hi], s.x2[lo:hi], s.z1[lo:hi], s.z2[lo:hi])
    else:
        x1, x2 = codewords
        g = _draw_gaussians(seed, rng.STREAM_FIXED_CODEWORD, chunk, (2, rng.CHUNK, n))
        s = SphereSample(np.broadcast_to(x1, (hi - lo, n)), np.broadcast_to(x2, (hi - lo, n)),
                         g[0, lo:hi], g[1, lo:hi])
    return closed_form_array(ch, s)


def density_samples(ch: ChannelParams, n: int, trials: int, seed: int, codewords=None,
                    threads: int | None = None, start: int = 0) -> np.ndarray:
    """Raw densities for trials ``[start, start+trials)``; shape ``(trials, 4)``.

    ``codewords=(x1, x2)`` fixes the transmitted codewords, leaving only the
    noise random. Rows depend only on ``(seed, trial index)``, so contiguous
    trial ranges computed separately concatenate to the single-run result.
    """
    if n < 2:
        raise ValueError("blocklength must be at least 2")
    if codewords is not None:
        x1, x2 = (np.asarray(c, dtype=float) for c in codewords)
        if x1.shape != (n,) or x2.shape != (n,):
            raise ValueError("fixed codewords must have length n")
        codewords = (x1, x2)
    parts = rng.map_chunks(
        lambda c, lo, hi: _density_chunk(ch, n, seed, c, lo, hi, codewords),
        start, start + trials, threads,
    )
    return np.concatenate(parts, axis=0)


def fixed_codewords(ch: ChannelParams, n: int, which: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic on-sphere codeword pairs used for conditional statistics.

    ``which=0`` is the pair of constant-amplitude vectors; larger values are
    drawn uniformly on the spheres from a reserved stream.
    """
    if which == 0:
        return (np.full(n, math.sqrt(ch.p1)), np.full(n, math.sqrt(ch.p2)))
    gen = rng.chunk_generator(which, rng.STREAM_MISC, 0)
    t = rng.normals(gen, (2, n))
    return _to_sphere(t[0], n, ch.p1), _to_sphere(t[1], n, ch.p2)


@dataclass(frozen=True)
class EmpiricalStats:
    """Monte-Carlo moments of the density vector.

    ``mean`` is of ``i/n`` and ``cov`` of ``i/sqrt(n)``; ``*_se`` are standard
    errors of those estimates.
    """

    trials: int
    n: int
    mean: np.ndarray
    mean_se: np.ndarray
    cov: np.ndarray
    cov_se: np.ndarray
    third_abs_moment: float


def covariance_with_se(samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample covariance of the columns and the standard error of each entry.

    Entries are handled one pair at a time so memory stays at a few columns.
    """
    trials, d = samples.shape
    centered = samples - samples.mean(axis=0)
    cov = np.empty((d, d))
    se = np.empty((d, d))
    for i in range(d):
        for j in range(i, d):
            prod = centered[:, i] * centered[:, j]
            cov[i, j] = cov[j, i] = prod.sum() / (trials - 1)
            se[i, j] = se[j, i] = prod.std(ddof=1) / math.sqrt(trials)
    return cov, se


def moment_stats(samples: np.ndarray, n: int) -> EmpiricalStats:
    """Mean/covariance with standard errors from raw ``(trials, 4)`` densities."""
    trials = samples.shape[0]
    if trials < 2:
        raise ValueError("need at least two trials")
    per_use = samples / n
    mean = per_use.mean(axis=0)
    mean_se = per_use.std(axis=0, ddof=1) / math.sqrt(trials)
    scaled = samples / math.sqrt(n)
    cov, cov_se = covariance_with_se(scaled)
    # third absolute moment of the centered pair (i11, i21) per block, per unit n^(3/2)
    centered = scaled[:, :2] - scaled[:, :2].mean(axis=0)
    third = float(np.mean(np.linalg.norm(centered, axis=1) ** 3))
    return EmpiricalStats(trials, n, mean, mean_se, cov, cov_se, third)


def per_letter_third_moment(ch: ChannelParams, x1, x2, trials: int, seed: int) -> float:
    """``(1/n) sum_k E||i_ck - E i_ck||^3`` for the pair ``(i11k, i21k)`` at fixed codewords."""
    a = alphas(ch)
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    n = x1.shape[0]
    gen = rng.chunk_generator(seed, rng.STREAM_MISC, 1)
    z1 = rng.normals(gen, (trials, n))
    z2 = rng.normals(gen, (trials, n))
    # per-letter densities minus their exact means (noise terms only)
    c11 = ((a.a11 - 1.0) * (1.0 - z1**2) + 2.0 * ch.h11 * x1 * z1) / (2.0 * a.a11)
    c21 = ((a.a21 - 1.0) * (1.0 - z2**2) + 2.0 * ch.h22 * x2 * z2) / (2.0 * a.a21)
    return float(np.mean(np.hypot(c11, c21) ** 3))


def empirical_stats(ch: ChannelParams, n: int, trials: int, seed: int, codewords=None,
                    threads: int | None = None) -> EmpiricalStats:
    """Moments of the density vector over ``trials`` independent blocks."""
    if trials < 1000:
        raise ValueError("empirical_stats needs at least 1000 trials")
    return moment_stats(density_samples(ch, n, trials, seed, codewords, threads), n)


def ks_distance(ch: ChannelParams, n: int, trials: int, seed: int, threads: int | None = None) -> float:
    """Kolmogorov distance between ``(i11 - n I11)/sqrt(n V1)`` and the standard normal."""
    samples = density_samples(ch, n, trials, seed, threads=threads)[:, 0]
    v1 = second_order(ch).v1
    w = np.sort((samples - n * first_order(ch).i11) / math.sqrt(n * v1))
    cdf = np.asarray(std_normal_cdf(w))
    m = w.shape[0]
    upper = np.arange(1, m + 1) / m - cdf
    lower = cdf - np.arange(0, m) / m
    return float(max(upper.max(), lower.max()))


def u_samples(ch: ChannelParams, draws: int, seed: int, threads: int | None = None) -> np.ndarray:
    """``draws`` independent single-letter U-vectors, shape ``(draws, 10)``."""

    def one(chunk, lo, hi):
        g = _draw_gaussians(seed, rng.STREAM_U_VECTOR, chunk, (4, rng.CHUNK))
        return u_vectors(ch, g[0, lo:hi], g[1, lo:hi], g[2, lo:hi], g[3, lo:hi])

    return np.concatenate(rng.map_chunks(one, 0, draws, threads), axis=0)
