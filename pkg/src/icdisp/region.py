"""Second-order capacity regions at points of the rectangular capacity region."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .channel import (
    ChannelParams,
    RegimeTag,
    UnsupportedRegimeError,
    classify_regime,
    first_order,
    second_order,
)
from .special import (
    gaussian_capacity,
    gaussian_dispersion,
    std_normal_cdf,
    std_normal_quantile,
)

KAPPA_RTOL = 1e-9
TRACE_CLIP = 1e-14


class RegionCase(str, enum.Enum):
    VERTICAL = "vertical"
    CORNER = "corner"
    HORIZONTAL = "horizontal"
    INTERIOR = "interior"
    EXTERIOR = "exterior"


@dataclass(frozen=True)
class TargetPoint:
    kappa1: float
    kappa2: float
    epsilon: float

    def __post_init__(self):
        if not (self.kappa1 >= 0 and self.kappa2 >= 0):
            raise ValueError("kappa1 and kappa2 must be nonnegative")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("epsilon must lie in (0, 1)")


@dataclass(frozen=True)
class SecondOrderPoint:
    l1: float
    l2: float


@dataclass(frozen=True)
class RegionSpec:
    case: RegionCase
    v1: float
    v2: float
    epsilon: float


@dataclass(frozen=True)
class BoundaryTrace:
    points: list[SecondOrderPoint]
    clip: float = TRACE_CLIP
    meta: dict = field(default_factory=dict)


def _close(a: float, b: float, rtol: float) -> bool:
    return abs(a - b) <= rtol * max(abs(a), abs(b), 1e-300)


def classify_target(ch: ChannelParams, tp: TargetPoint, rtol: float = KAPPA_RTOL) -> RegionSpec:
    """Which case of the second-order region applies at ``(kappa1, kappa2)``.

    Equalities with the capacities ``I11``, ``I21`` are judged with relative
    tolerance ``rtol``.
    """
    regime = classify_regime(ch)
    if regime.tag is not RegimeTag.STRICTLY_VERY_STRONG:
        raise UnsupportedRegimeError(
            f"second-order regions are only characterized for strictly very strong interference "
            f"(got {regime.tag.value})"
        )
    fo = first_order(ch)
    so = second_order(ch)
    eq1 = _close(tp.kappa1, fo.i11, rtol)
    eq2 = _close(tp.kappa2, fo.i21, rtol)
    lt1 = tp.kappa1 < fo.i11 and not eq1
    lt2 = tp.kappa2 < fo.i21 and not eq2
    if eq1 and eq2:
        case = RegionCase.CORNER
    elif eq1 and lt2:
        case = RegionCase.VERTICAL
    elif lt1 and eq2:
        case = RegionCase.HORIZONTAL
    elif lt1 and lt2:
        case = RegionCase.INTERIOR
    else:
        case = RegionCase.EXTERIOR
    return RegionSpec(case=case, v1=so.v1, v2=so.v2, epsilon=tp.epsilon)


def contains(spec: RegionSpec, pt: SecondOrderPoint) -> bool:
    eps = spec.epsilon
    if spec.case is RegionCase.INTERIOR:
        return True
    if spec.case is RegionCase.EXTERIOR:
        return False
    if spec.case is RegionCase.VERTICAL:
        return std_normal_cdf(pt.l1 / math.sqrt(spec.v1)) <= eps
    if spec.case is RegionCase.HORIZONTAL:
        return std_normal_cdf(pt.l2 / math.sqrt(spec.v2)) <= eps
    prob = std_normal_cdf(-pt.l1 / math.sqrt(spec.v1)) * std_normal_cdf(-pt.l2 / math.sqrt(spec.v2))
    return prob >= 1.0 - eps


def corner_l2(spec: RegionSpec, l1):
    """Boundary ``l2`` of the corner region as a function of ``l1``.

    Returns ``-inf`` where no ``l2`` satisfies the product equation.
    """
    p1 = np.asarray(std_normal_cdf(-np.asarray(l1, dtype=float) / math.sqrt(spec.v1)))
    ratio = (1.0 - spec.epsilon) / p1
    ok = ratio < 1.0
    out = np.full(ratio.shape, -np.inf)
    if ok.any():
        out[ok] = -math.sqrt(spec.v2) * np.asarray(std_normal_quantile(ratio[ok]))
    return float(out) if out.ndim == 0 else out


def trace_boundary(spec: RegionSpec, grid: int, clip: float = TRACE_CLIP) -> BoundaryTrace:
    """Points on the boundary ``Phi(-l1/sqrt(v1)) Phi(-l2/sqrt(v2)) = 1 - eps``.

    In normalized coordinates ``a_j = -l_j / sqrt(v_j)`` the curve is symmetric
    about ``a1 = a2``. Each half is sampled evenly in its larger coordinate,
    from the balanced point ``Phi^-1(sqrt(1-eps))`` out to ``Phi^-1(1-clip)``,
    and the other coordinate is solved in closed form. Points run from the
    right end (``a1`` smallest) to the top end; the sample set maps onto itself
    when the normalized coordinates are swapped.
    """
    if spec.case is not RegionCase.CORNER:
        raise UnsupportedRegimeError(f"boundary tracing needs the corner case, got {spec.case.value}")
    if grid < 2:
        raise ValueError("grid must be at least 2")
    target = 1.0 - spec.epsilon
    clip = max(clip, 1e-15)
    a_mid = float(std_normal_quantile(math.sqrt(target)))
    a_max = -float(std_normal_quantile(clip))
    if a_max <= a_mid:
        raise ValueError("clip too large for this epsilon")
    s = np.linspace(-1.0, 1.0, grid)
    s = 0.5 * (s - s[::-1])  # exact antisymmetry
    big = a_mid + np.abs(s) * (a_max - a_mid)
    small = np.asarray(std_normal_quantile(target / np.asarray(std_normal_cdf(big))))
    small = np.where(s == 0, a_mid, small)
    a1 = np.where(s <= 0, small, big)
    a2 = np.where(s <= 0, big, small)
    l1 = -math.sqrt(spec.v1) * a1
    l2 = -math.sqrt(spec.v2) * a2
    points = [SecondOrderPoint(float(a), float(b)) for a, b in zip(l1, l2)]
    meta = {"param": "larger_normalized_coordinate", "a_mid": a_mid, "a_max": a_max, "clip": clip}
    return BoundaryTrace(points=points, clip=clip, meta=meta)


def corner_product(spec: RegionSpec, pt: SecondOrderPoint) -> float:
    return std_normal_cdf(-pt.l1 / math.sqrt(spec.v1)) * std_normal_cdf(-pt.l2 / math.sqrt(spec.v2))


def normal_approximation(ch: ChannelParams, n: int, epsilon: float, user: int = 1) -> float:
    """``n C + sqrt(n V) Phi^-1(eps)`` for the direct link of ``user`` (nats)."""
    if n < 1:
        raise ValueError("n must be a positive integer")
    if user not in (1, 2):
        raise ValueError("user must be 1 or 2")
    snr = ch.snr1 if user == 1 else ch.snr2
    return n * gaussian_capacity(snr) + math.sqrt(n * gaussian_dispersion(snr)) * std_normal_quantile(epsilon)


def second_order_rate(v: float, epsilon: float) -> float:
    """Single-user optimal second-order rate ``sqrt(V) Phi^-1(eps)``."""
    return math.sqrt(v) * std_normal_quantile(epsilon)


def predicted_error(spec: RegionSpec, pt: SecondOrderPoint) -> float:
    """Asymptotic error probability implied at ``pt``: ``1 - Phi(-l1/sqrt V1) Phi(-l2/sqrt V2)``."""
    if spec.case is RegionCase.CORNER:
        return 1.0 - corner_product(spec, pt)
    if spec.case is RegionCase.VERTICAL:
        return std_normal_cdf(pt.l1 / math.sqrt(spec.v1))
    if spec.case is RegionCase.HORIZONTAL:
        return std_normal_cdf(pt.l2 / math.sqrt(spec.v2))
    return 0.0 if spec.case is RegionCase.INTERIOR else 1.0


def balanced_boundary_point(spec: RegionSpec) -> SecondOrderPoint:
    """Corner boundary point where both decoders succeed with probability ``sqrt(1 - eps)``."""
    if spec.case is not RegionCase.CORNER:
        raise UnsupportedRegimeError(f"balanced boundary point needs the corner case, got {spec.case.value}")
    q = std_normal_quantile(math.sqrt(1.0 - spec.epsilon))
    return SecondOrderPoint(-math.sqrt(spec.v1) * q, -math.sqrt(spec.v2) * q)
