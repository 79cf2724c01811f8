"""
Capacities and dispersions of a very strong interference channel
=================================================================

"""

import numpy as np

from icdisp import EXAMPLE_CHANNEL as ch
from icdisp import classify_regime, first_order, second_order

# gains hjk go from transmitter j to receiver k
print(ch)

# both slacks positive means interference is strictly very strong
reg = classify_regime(ch)
print(reg.tag.value, reg.slack1, reg.slack2)

# direct-link capacities set the rectangle; the joint ones are never binding here
fo = first_order(ch)
print("I11, I21 =", fo.i11, fo.i21)
print("I12, I22 =", fo.i12, fo.i22)
print("sum rate", fo.i11 + fo.i21, "< both of", fo.i12, fo.i22)

so = second_order(ch)
print("V1, V2 =", so.v1, so.v2)

# covariance of the four direct-part densities, per channel use
np.set_printoptions(precision=6, suppress=True)
print(so.vd)
print("eigenvalues", np.linalg.eigvalsh(so.vd))

# a weaker cross gain drops the channel out of the regime
from icdisp import ChannelParams

weak = ChannelParams(h11=1.0, h12=4.0, h21=1.2, h22=1.0, p1=1.0, p2=1.0)
print(classify_regime(weak).tag.value)
