"""Monte-Carlo evaluation of threshold-decoding achievability and converse bounds.

Both bounds are functions of the four information densities of a single
transmitted block, so they are estimated by sampling density vectors; no
codebook is ever built. With the same seed, both bounds see the same trials.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .analytic_bounds import k_estimate
from .channel import ChannelParams, UnsupportedRegimeError, first_order
from .densities import density_samples
from .region import RegionCase, SecondOrderPoint, TargetPoint, classify_target, predicted_error

MIN_TRIALS = 100
K_SAFETY = 2.0


class InsufficientTrialsError(ValueError):
    pass


class BoundKind(str, enum.Enum):
    ACHIEVABILITY_UPPER = "achievability_upper"
    CONVERSE_LOWER = "converse_lower"


@dataclass(frozen=True)
class CodeSpec:
    """Blocklength, log code sizes (nats) and threshold slack ``gamma`` per channel use."""

    n: int
    log_m1: float
    log_m2: float
    gamma: float | None = None

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError("n must be an integer >= 2")
        if self.log_m1 < 0 or self.log_m2 < 0:
            raise ValueError("log code sizes must be nonnegative")
        if self.gamma is None:
            object.__setattr__(self, "gamma", default_gamma(self.n))
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")


def default_gamma(n: int) -> float:
    """``log(n) / (2n)``, which makes ``exp(-n gamma) = 1/sqrt(n)``."""
    return math.log(n) / (2.0 * n)


@dataclass(frozen=True)
class BoundEstimate:
    """A bound on the error probability.

    ``value`` is ``event_probability`` plus ``additive`` (negative for the
    converse), clamped to ``[0, 1]``.
    """

    value: float
    std_error: float
    trials: int
    kind: BoundKind
    event_probability: float
    additive: float
    extra: dict = field(default_factory=dict)


def _binomial(indicator: np.ndarray) -> tuple[float, float]:
    p = float(indicator.mean())
    return p, math.sqrt(max(p * (1.0 - p), 0.0) / indicator.shape[0])


def achievability_events(spec: CodeSpec, samples: np.ndarray) -> np.ndarray:
    """Union of the four threshold events per trial (columns ``i11, i21, i12, i22``)."""
    slack = spec.n * spec.gamma
    t_single = np.array([spec.log_m1, spec.log_m2]) + slack
    t_joint = spec.log_m1 + spec.log_m2 + slack
    return np.any(samples[:, :2] <= t_single, axis=1) | np.any(samples[:, 2:] <= t_joint, axis=1)


def converse_events(spec: CodeSpec, samples: np.ndarray) -> np.ndarray:
    t = np.array([spec.log_m1, spec.log_m2]) - spec.n * spec.gamma
    return np.any(samples[:, :2] <= t, axis=1)


def _check_trials(trials: int):
    if trials < MIN_TRIALS:
        raise InsufficientTrialsError(f"need at least {MIN_TRIALS} trials, got {trials}")


def achievability_from_samples(spec: CodeSpec, samples: np.ndarray, k: float) -> BoundEstimate:
    p, se = _binomial(achievability_events(spec, samples))
    add = k * math.exp(-spec.n * spec.gamma)
    return BoundEstimate(
        value=min(1.0, p + add), std_error=se, trials=samples.shape[0],
        kind=BoundKind.ACHIEVABILITY_UPPER, event_probability=p, additive=add, extra={"k": k},
    )


def converse_from_samples(spec: CodeSpec, samples: np.ndarray) -> BoundEstimate:
    p, se = _binomial(converse_events(spec, samples))
    sub = 2.0 * math.exp(-spec.n * spec.gamma)
    return BoundEstimate(
        value=max(0.0, p - sub), std_error=se, trials=samples.shape[0],
        kind=BoundKind.CONVERSE_LOWER, event_probability=p, additive=-sub,
    )


def default_k(ch: ChannelParams, n: int) -> float:
    return K_SAFETY * k_estimate(ch, n)


def achievability_bound(ch: ChannelParams, spec: CodeSpec, trials: int, seed: int,
                        k: float | None = None, threads: int | None = None) -> BoundEstimate:
    """Upper bound ``P(E11 u E21 u E12 u E22) + K exp(-n gamma)`` on the error probability.

    ``K`` defaults to twice the numeric density-ratio estimate.
    """
    _check_trials(trials)
    if k is None:
        k = default_k(ch, spec.n)
    samples = density_samples(ch, spec.n, trials, seed, threads=threads)
    return achievability_from_samples(spec, samples, k)


def converse_bound(ch: ChannelParams, spec: CodeSpec, trials: int, seed: int,
                   threads: int | None = None) -> BoundEstimate:
    """Lower bound ``P(i11 <= log M1 - n gamma or i21 <= log M2 - n gamma) - 2 exp(-n gamma)``."""
    _check_trials(trials)
    samples = density_samples(ch, spec.n, trials, seed, threads=threads)
    return converse_from_samples(spec, samples)


@dataclass(frozen=True)
class ExperimentRow:
    n: int
    achievability_estimate: float
    achievability_stderr: float
    converse_estimate: float
    converse_stderr: float
    theorem_prediction: float
    achievability_union: float
    achievability_additive: float
    converse_event: float
    converse_additive: float

    COLUMNS = (
        "n", "achievability_estimate", "achievability_stderr", "converse_estimate",
        "converse_stderr", "theorem_prediction",
    )

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in self.COLUMNS)


def second_order_experiment(ch: ChannelParams, tp: TargetPoint, pt: SecondOrderPoint, n_list,
                            trials: int, seed: int, k: float | None = None,
                            threads: int | None = None) -> list[ExperimentRow]:
    """Both bounds at ``log M_j = n kappa_j + sqrt(n) l_j`` for each ``n`` in ``n_list``.

    The target must be the corner of the capacity rectangle.
    """
    region = classify_target(ch, tp)
    if region.case is not RegionCase.CORNER:
        raise UnsupportedRegimeError(f"experiments need the corner target, got {region.case.value}")
    _check_trials(trials)
    prediction = predicted_error(region, pt)
    rows = []
    for n in n_list:
        n = int(n)
        root = math.sqrt(n)
        spec = CodeSpec(n, max(0.0, n * tp.kappa1 + root * pt.l1), max(0.0, n * tp.kappa2 + root * pt.l2))
        samples = density_samples(ch, n, trials, seed, threads=threads)
        ach = achievability_from_samples(spec, samples, default_k(ch, n) if k is None else k)
        con = converse_from_samples(spec, samples)
        rows.append(ExperimentRow(
            n=n,
            achievability_estimate=ach.value,
            achievability_stderr=ach.std_error,
            converse_estimate=con.value,
            converse_stderr=con.std_error,
            theorem_prediction=prediction,
            achievability_union=ach.event_probability,
            achievability_additive=ach.additive,
            converse_event=con.event_probability,
            converse_additive=con.additive,
        ))
    return rows


def corner_target(ch: ChannelParams, epsilon: float) -> TargetPoint:
    fo = first_order(ch)
    return TargetPoint(fo.i11, fo.i21, epsilon)
