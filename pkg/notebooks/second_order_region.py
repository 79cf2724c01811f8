"""
The second-order region at the corner of the capacity rectangle
================================================================

Writes corner_region.svg next to this script.
"""

import math
from pathlib import Path

import numpy as np

from icdisp import EXAMPLE_CHANNEL as ch
from icdisp import first_order
from icdisp.cli import region_svg
from icdisp.region import TargetPoint, classify_target, corner_product, trace_boundary
from icdisp.special import std_normal_quantile

fo = first_order(ch)
spec = classify_target(ch, TargetPoint(fo.i11, fo.i21, epsilon=0.001))
print(spec)

trace = trace_boundary(spec, 201)
pts = np.array([[p.l1, p.l2] for p in trace.points])

# every traced point meets the product equation
err = max(abs(corner_product(spec, p) - 0.999) for p in trace.points)
print("worst residual", err)

# the two asymptotes sit at -sqrt(V) Phi^-1(1 - eps)
print("ends", pts[0], pts[-1])

# with V1 = V2 the curve is its own mirror image
print("symmetric:", np.array_equal(pts, pts[::-1, ::-1]))
mid = pts[len(pts) // 2]
print("point on the diagonal", mid, "check", -math.sqrt(spec.v1) * std_normal_quantile(math.sqrt(0.999)))

out = Path(__file__).with_name("corner_region.svg")
out.write_text(region_svg(trace.points, spec))
print("wrote", out)
