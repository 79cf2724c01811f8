"""Second-order analysis of the two-user Gaussian interference channel with very strong interference."""

from .channel import (
    EXAMPLE_CHANNEL,
    ChannelParams,
    RegimeTag,
    UnsupportedRegimeError,
    classify_regime,
    first_order,
    second_order,
)
from .region import RegionCase, SecondOrderPoint, TargetPoint, classify_target, trace_boundary

__all__ = [
    "EXAMPLE_CHANNEL",
    "ChannelParams",
    "RegimeTag",
    "UnsupportedRegimeError",
    "classify_regime",
    "first_order",
    "second_order",
    "RegionCase",
    "SecondOrderPoint",
    "TargetPoint",
    "classify_target",
    "trace_boundary",
]

__version__ = "0.1.0"
