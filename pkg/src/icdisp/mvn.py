"""Gaussian lower-orthant probabilities and the Berry-Esseen bound value."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr, ndtri
from scipy.stats import qmc

SYMMETRY_TOL = 1e-12
EIG_CLIP = -1e-10
SINGULAR_TOL = 1e-10
N_RANDOMIZATIONS = 16
DEFAULT_POINTS = 4096


@dataclass(frozen=True)
class MvnSpec:
    """Mean and covariance of a Gaussian vector of dimension 1 to 4."""

    mean: np.ndarray
    cov: np.ndarray
    chol: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        d = mean.shape[0]
        if not 1 <= d <= 4:
            raise ValueError(f"dimension must be in 1..4, got {d}")
        if cov.shape != (d, d):
            raise ValueError(f"covariance shape {cov.shape} does not match mean of length {d}")
        scale = max(1.0, float(np.max(np.abs(cov))))
        if np.max(np.abs(cov - cov.T)) > SYMMETRY_TOL * scale:
            raise ValueError("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        eig = np.linalg.eigvalsh(cov)
        if eig[0] < EIG_CLIP * scale:
            raise ValueError(f"covariance is not positive semidefinite (min eigenvalue {eig[0]:.3e})")
        chol = None
        if eig[0] > SINGULAR_TOL * scale:
            chol = np.linalg.cholesky(cov)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)
        object.__setattr__(self, "chol", chol)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    def marginal(self, keep) -> "MvnSpec":
        keep = np.asarray(keep, dtype=int)
        return MvnSpec(self.mean[keep], self.cov[np.ix_(keep, keep)])


@dataclass(frozen=True)
class PsiResult:
    value: float
    std_error: float
    method: str


def _genz_integrand(b, chol, w):
    """Separation-of-variables integrand on the unit cube ``w`` (N x d-1)."""
    d = b.shape[0]
    npts = w.shape[0]
    e = np.full(npts, ndtr(b[0] / chol[0, 0]))
    f = e.copy()
    y = np.zeros((npts, d))
    for i in range(1, d):
        u = np.clip(w[:, i - 1] * e, 1e-300, 1.0 - 1e-16)
        y[:, i - 1] = ndtri(u)
        e = ndtr((b[i] - y[:, :i] @ chol[i, :i]) / chol[i, i])
        f = f * e
    return f


def _rqmc(func, dim, seed, n_points, n_random):
    estimates = np.empty(n_random)
    for k in range(n_random):
        sampler = qmc.Sobol(d=max(dim, 1), scramble=True, seed=np.random.default_rng([seed, k]))
        pts = sampler.random(n_points)
        estimates[k] = float(np.mean(func(pts)))
    return float(np.mean(estimates)), float(np.std(estimates, ddof=1) / math.sqrt(n_random))


def psi_upper_detail(t, spec: MvnSpec, seed: int = 0, n_points: int = DEFAULT_POINTS,
                     n_random: int = N_RANDOMIZATIONS) -> PsiResult:
    """``Pr[Z <= t]`` for ``Z ~ N(spec.mean, spec.cov)`` with an error estimate."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if t.shape != (spec.dim,):
        raise ValueError(f"threshold length {t.shape[0]} does not match dimension {spec.dim}")
    if np.isnan(t).any():
        raise ValueError("threshold contains NaN")
    if np.isneginf(t).any():
        return PsiResult(0.0, 0.0, "exact")
    finite = np.flatnonzero(np.isfinite(t))
    if finite.size == 0:
        return PsiResult(1.0, 0.0, "exact")
    if finite.size < spec.dim:
        return psi_upper_detail(t[finite], spec.marginal(finite), seed, n_points, n_random)

    b = t - spec.mean
    cov = spec.cov
    off = cov - np.diag(np.diag(cov))
    if not np.any(off):
        sd = np.sqrt(np.diag(cov))
        with np.errstate(divide="ignore"):
            z = np.where(sd > 0, b / np.where(sd > 0, sd, 1.0), np.where(b >= 0, np.inf, -np.inf))
        return PsiResult(float(np.prod(ndtr(z))), 0.0, "product")

    if spec.chol is not None:
        chol = spec.chol
        value, se = _rqmc(lambda w: _genz_integrand(b, chol, w), spec.dim - 1, seed, n_points, n_random)
        return PsiResult(min(1.0, max(0.0, value)), se, "genz-rqmc")

    # near-singular: sample the nondegenerate directions only
    eigval, eigvec = np.linalg.eigh(cov)
    scale = max(1.0, float(np.max(np.abs(cov))))
    keep = eigval > SINGULAR_TOL * scale
    loading = eigvec[:, keep] * np.sqrt(eigval[keep])
    r = int(keep.sum())

    def indicator(w):
        g = ndtri(np.clip(w, 1e-16, 1.0 - 1e-16))
        return np.all(g @ loading.T <= b, axis=1).astype(float)

    value, se = _rqmc(indicator, r, seed, n_points, n_random)
    return PsiResult(value, se, "reduced-rqmc")


def psi_upper(t, spec: MvnSpec, seed: int = 0, **kwargs) -> float:
    """Multivariate normal lower-orthant probability (value only)."""
    return psi_upper_detail(t, spec, seed, **kwargs).value


@dataclass(frozen=True)
class BeBoundInputs:
    dim: int
    third_moment: float
    lambda_min: float
    n: int

    def __post_init__(self):
        if self.dim < 1 or self.n < 1:
            raise ValueError("dim and n must be positive")
        if not (math.isfinite(self.third_moment) and self.third_moment >= 0):
            raise ValueError("third moment must be finite and nonnegative")
        if not (math.isfinite(self.lambda_min) and self.lambda_min > 0):
            raise ValueError("lambda_min must be finite and positive")


def berry_esseen_bound(inputs: BeBoundInputs) -> float:
    """``254 sqrt(m) t / (lambda_min^(3/2) sqrt(n))``: convex-set Berry-Esseen constant."""
    return 254.0 * math.sqrt(inputs.dim) * inputs.third_moment / (
        inputs.lambda_min**1.5 * math.sqrt(inputs.n)
    )
