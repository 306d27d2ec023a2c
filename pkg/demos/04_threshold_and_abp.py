"""The maximum-principle threshold and the ABP constant.

Shifting the operator by ``rho`` keeps solutions of ``-I u - rho u = f``
positive exactly up to the principal eigenvalue.  A scan over ``rho``
recovers that breakdown point.  The ABP ratio
``sup u+ / (|f|_inf |Omega|)`` stays bounded under grid refinement.
"""

import numpy as np

from nonlocal_eigs import (
    ControlFamily,
    EigenConfig,
    KernelClass,
    abp_ratio,
    interval_grid,
    inverse_power,
    max_principle_threshold,
    random_smooth_source,
)

k = KernelClass.fractional(0.5)
grid = interval_grid(-1.0, 1.0, 512)
fam = ControlFamily.linear()
lam = inverse_power(fam, k, EigenConfig(cw_gap_tol=1e-10), grid).lambda_
rep = max_principle_threshold(fam, k, np.arange(0.0, 10.0, 0.01), grid.function(np.ones(grid.size)))
print(f"lambda1 = {lam:.6f}; positivity holds up to rho = {rep.last_good_rho:.2f}, "
      f"breaks at {rep.breakdown_rho:.2f} ({rep.reason})")

pucci = KernelClass(1.0, 2.0, 0.75, c_plus=0.5)
rng = np.random.default_rng(7)
sources = [random_smooth_source(rng) for _ in range(10)]
for n in (128, 256, 512):
    g = interval_grid(-1.0, 1.0, n)
    ratios = [abp_ratio(g.function(f(g.x)), pucci) for f in sources]
    print(f"N={n:4d}: empirical ABP constant {max(ratios):.5f}")
