"""
How large can the true-to-surrogate output density ratios get?
==============================================================

"""

import numpy as np

from icdisp import EXAMPLE_CHANNEL as ch
from icdisp.analytic_bounds import (
    finite_n_ratio_check,
    importance_sampling_mean,
    k_components,
    log_d11,
    log_d11_bound,
    phi_convergence_gap,
    scan_phi,
    scan_rho,
)

# limiting exponents peak at zero exactly where the two laws match
for rx in (1, 2):
    p, r = scan_phi(ch, rx), scan_rho(ch, rx)
    print(rx, "phi max", p.max_value, "at", p.argmax, "| rho max", r.max_value, "at", r.argmax)

# exact log ratio against its exponential bound on a grid of radii
n = 100
z = np.linspace(0.2, 6, 8)
print(np.c_[z, log_d11(ch, n, n * z), log_d11_bound(ch, n, n * z)])

for n in (50, 100, 200):
    rep = finite_n_ratio_check(ch, n, 10_000, seed=1)
    print(n, "violations", rep.violation_count, "max log ratio", rep.max_value,
          "E_Q ratio", importance_sampling_mean(ch, n, 10_000, seed=1))

print("finite-n exponent gap at n=1e4", phi_convergence_gap(ch, 10_000))

for n in (100, 200, 400):
    print(n, k_components(ch, n))
