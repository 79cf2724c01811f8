"""
Monte-Carlo statistics of the information densities
====================================================

"""

import numpy as np

from icdisp import EXAMPLE_CHANNEL as ch
from icdisp import first_order, second_order
from icdisp.densities import (
    closed_form_array,
    empirical_stats,
    fixed_codewords,
    ks_distance,
    log_ratio_array,
    sample_sphere_block,
)

# one block, two independent formulas for the same four numbers
s = sample_sphere_block(ch, 100, seed=1)
print(closed_form_array(ch, s))
print(log_ratio_array(ch, s))

fo, so = first_order(ch), second_order(ch)

# with the codewords held fixed only the noise is random
n = 100
for which in (0, 1):
    st = empirical_stats(ch, n, 50_000, seed=2, codewords=fixed_codewords(ch, n, which))
    print("codeword pair", which)
    print("  mean/n ", st.mean[:2], "target", fo.ic)
    print("  cov    ", st.cov[:2, :2].ravel(), "target", so.vc.ravel())

# random codewords: the full 4x4 covariance
st = empirical_stats(ch, 200, 50_000, seed=3)
print(np.round(st.cov, 3))
print(np.round(so.vd, 3))
print("largest z", np.max(np.abs(st.cov - so.vd) / st.cov_se))

# distance to the normal law shrinks with n
for n in (25, 100, 400):
    print(n, ks_distance(ch, n, 20_000, seed=4))
