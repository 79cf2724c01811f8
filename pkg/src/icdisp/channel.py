"""Two-user Gaussian interference channel: regime, first/second-order quantities."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .special import gaussian_capacity, gaussian_dispersion

REGIME_GUARD = 1e-12


class UnsupportedRegimeError(ValueError):
    """Raised when a result is requested outside the regime where it is proven."""


@dataclass(frozen=True)
class ChannelParams:
    """Gains ``hjk`` (from transmitter j to receiver k) and power budgets ``p1``, ``p2``.

    Receiver 1 sees ``h11 x1 + h21 x2 + z1``; receiver 2 sees ``h12 x1 + h22 x2 + z2``.
    """

    h11: float
    h12: float
    h21: float
    h22: float
    p1: float
    p2: float

    def __post_init__(self):
        for name in ("h11", "h12", "h21", "h22", "p1", "p2"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise TypeError(f"{name} must be a real number")
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")

    @property
    def snr1(self) -> float:
        return self.h11**2 * self.p1

    @property
    def snr2(self) -> float:
        return self.h22**2 * self.p2

    @property
    def inr1(self) -> float:
        """Interference power at receiver 1, ``h21^2 p2``."""
        return self.h21**2 * self.p2

    @property
    def inr2(self) -> float:
        """Interference power at receiver 2, ``h12^2 p1``."""
        return self.h12**2 * self.p1

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("h11", "h12", "h21", "h22", "p1", "p2")}


EXAMPLE_CHANNEL = ChannelParams(h11=1.0, h12=4.0, h21=3.0, h22=1.0, p1=1.0, p2=1.0)


class RegimeTag(str, enum.Enum):
    NOT_VERY_STRONG = "not_very_strong"
    VERY_STRONG_BOUNDARY = "very_strong_boundary"
    STRICTLY_VERY_STRONG = "strictly_very_strong"


@dataclass(frozen=True)
class Regime:
    tag: RegimeTag
    slack1: float
    slack2: float


def classify_regime(ch: ChannelParams, guard: float = REGIME_GUARD) -> Regime:
    """Very-strong-interference classification.

    ``slack1 = h21^2/(1+h11^2 p1) - h22^2`` and ``slack2 = h12^2/(1+h22^2 p2) - h11^2``.
    A slack within ``guard`` (relative to the larger term) counts as zero.
    """
    a1 = ch.h21**2 / (1.0 + ch.snr1)
    a2 = ch.h12**2 / (1.0 + ch.snr2)
    slack1 = a1 - ch.h22**2
    slack2 = a2 - ch.h11**2

    def sign(slack, *terms):
        if abs(slack) <= guard * max(terms):
            return 0
        return 1 if slack > 0 else -1

    s1 = sign(slack1, a1, ch.h22**2)
    s2 = sign(slack2, a2, ch.h11**2)
    if s1 < 0 or s2 < 0:
        tag = RegimeTag.NOT_VERY_STRONG
    elif s1 > 0 and s2 > 0:
        tag = RegimeTag.STRICTLY_VERY_STRONG
    else:
        tag = RegimeTag.VERY_STRONG_BOUNDARY
    return Regime(tag, slack1, slack2)


@dataclass(frozen=True)
class FirstOrder:
    i11: float
    i21: float
    i12: float
    i22: float

    @property
    def ic(self) -> np.ndarray:
        return np.array([self.i11, self.i21])

    @property
    def id(self) -> np.ndarray:
        return np.array([self.i11, self.i21, self.i12, self.i22])


def first_order(ch: ChannelParams) -> FirstOrder:
    return FirstOrder(
        i11=gaussian_capacity(ch.snr1),
        i21=gaussian_capacity(ch.snr2),
        i12=gaussian_capacity(ch.snr1 + ch.inr1),
        i22=gaussian_capacity(ch.snr2 + ch.inr2),
    )


@dataclass(frozen=True)
class Alphas:
    a11: float
    a12: float
    a21: float
    a22: float
    a33: float
    a44: float
    a48: float
    a77: float
    a88: float

    def to_dict(self) -> dict:
        return {
            "alpha11": self.a11, "alpha12": self.a12, "alpha21": self.a21, "alpha22": self.a22,
            "alpha33": self.a33, "alpha44": self.a44, "alpha48": self.a48, "alpha77": self.a77,
            "alpha88": self.a88,
        }


def alphas(ch: ChannelParams) -> Alphas:
    s1, s2, q1, q2 = ch.snr1, ch.snr2, ch.inr1, ch.inr2
    return Alphas(
        a11=1.0 + s1,
        a12=1.0 + s1 + q1,
        a21=1.0 + s2,
        a22=1.0 + q2 + s2,
        a33=q1,
        a44=s1 * q1,
        a48=ch.p1 * ch.p2 * ch.h11 * ch.h21 * ch.h12 * ch.h22,
        a77=q2,
        a88=q2 * s2,
    )


def u_covariance(a: Alphas) -> np.ndarray:
    """Covariance of one letter of the 10-dimensional U-vector.

    Component order: ``U11, U21, U31, U41, U12, U22, U32, U42, U9, U10``.
    """
    cov = np.diag([2.0, a.a11 - 1.0, a.a33, a.a44, 2.0, a.a21 - 1.0, a.a77, a.a88, 2.0, 2.0])
    cov[3, 7] = cov[7, 3] = a.a48
    return cov


def tau_jacobian(a: Alphas) -> np.ndarray:
    """Jacobian of ``tau = (tau11, tau21, tau12, tau22)`` at the origin (4 x 10)."""
    jac = np.zeros((4, 10))
    jac[0, :2] = [a.a11 - 1.0, 2.0]
    jac[1, 4:6] = [a.a21 - 1.0, 2.0]
    jac[2, :4] = [a.a12 - 1.0, 2.0, 2.0, 2.0]
    jac[3, 4:8] = [a.a22 - 1.0, 2.0, 2.0, 2.0]
    return jac


def vd_from_matrices(a: Alphas) -> np.ndarray:
    """``(1/4) Lam J Cov(U) J^T Lam`` with ``Lam = diag(1/a11, 1/a21, 1/a12, 1/a22)``."""
    lam = np.diag([1.0 / a.a11, 1.0 / a.a21, 1.0 / a.a12, 1.0 / a.a22])
    jac = tau_jacobian(a)
    return 0.25 * lam @ jac @ u_covariance(a) @ jac.T @ lam


@dataclass(frozen=True)
class SecondOrder:
    v1: float
    v2: float
    vd: np.ndarray
    alphas: Alphas

    @property
    def vc(self) -> np.ndarray:
        return np.diag([self.v1, self.v2])

    @property
    def vd13(self) -> float:
        return float(self.vd[0, 2])

    @property
    def vd24(self) -> float:
        return float(self.vd[1, 3])

    @property
    def vd33(self) -> float:
        return float(self.vd[2, 2])

    @property
    def vd34(self) -> float:
        return float(self.vd[2, 3])

    @property
    def vd44(self) -> float:
        return float(self.vd[3, 3])


def second_order(ch: ChannelParams) -> SecondOrder:
    """Dispersions ``V1``, ``V2`` and the 4 x 4 covariance ``Vd`` of the direct-part densities.

    Entries are written out in closed form. The (1,3) and (2,4) entries are the
    corresponding entries of ``(1/4) Lam J Cov(U) J^T Lam``:
    ``Vd13 = (a11-1)(a12+1) / (2 a11 a12)`` and likewise for ``Vd24``.
    """
    a = alphas(ch)
    v1 = gaussian_dispersion(ch.snr1)
    v2 = gaussian_dispersion(ch.snr2)
    vd13 = (a.a11 - 1.0) * (a.a12 + 1.0) / (2.0 * a.a11 * a.a12)
    vd24 = (a.a21 - 1.0) * (a.a22 + 1.0) / (2.0 * a.a21 * a.a22)
    vd33 = gaussian_dispersion(ch.snr1 + ch.inr1) + ch.snr1 * ch.inr1 / a.a12**2
    vd44 = gaussian_dispersion(ch.snr2 + ch.inr2) + ch.inr2 * ch.snr2 / a.a22**2
    vd34 = ch.h12 * ch.h11 * ch.p1 * ch.h21 * ch.h22 * ch.p2 / (a.a12 * a.a22)
    vd = np.array([
        [v1, 0.0, vd13, 0.0],
        [0.0, v2, 0.0, vd24],
        [vd13, 0.0, vd33, vd34],
        [0.0, vd24, vd34, vd44],
    ])
    return SecondOrder(v1=v1, v2=v2, vd=vd, alphas=a)


def capacity_region_vertices(ch: ChannelParams) -> list[tuple[float, float]]:
    """Vertices of the rectangular capacity region, counter-clockwise from the origin."""
    regime = classify_regime(ch)
    if regime.tag is RegimeTag.NOT_VERY_STRONG:
        raise UnsupportedRegimeError("the rectangular capacity region needs very strong interference")
    fo = first_order(ch)
    return [(0.0, 0.0), (fo.i11, 0.0), (fo.i11, fo.i21), (0.0, fo.i21)]
