"""Barrier functions near the boundary.

The truncated power ``xi = min(d, delta)**beta`` is a supersolution of
``M+`` near the boundary when ``beta`` exceeds ``beta1`` and a subsolution
below it, with ``|M+ xi|`` growing like ``d**(beta - 2s)``.  Above ``beta2``
the same barrier sits under every solution with a positive source, which is
the cone condition used by the eigenvalue theory.
"""

import numpy as np

from nonlocal_eigs import (
    EXTREMAL_MINUS,
    ControlFamily,
    KernelClass,
    barrier_sign_check,
    boundary_exponent_fit,
    h_condition_check,
    interval_grid,
    solve,
)

k = KernelClass.fractional(0.75)
for row in barrier_sign_check(k):
    print(f"M{'+' if row.sign == 'plus' else '-'} beta={row.beta:.3f}: expected sign "
          f"{row.predicted:+d} at {row.sign_fraction:.0%} of {row.n_nodes} nodes, "
          f"slope {row.slope:.3f} (model {row.expected_slope:.3f})")

lin = KernelClass.fractional(0.5)
grid = interval_grid(-1.0, 1.0, 2048)
u = solve(grid.function(np.ones(grid.size)), ControlFamily.linear(), lin).u
print(f"torsion function of the half Laplacian grows like d^{boundary_exponent_fit(u, 0.05):.3f}")

pucci = KernelClass(1.0, 2.0, 0.75, c_plus=0.5)
g = interval_grid(-1.0, 1.0, 256)
rep = h_condition_check(g.function(np.ones(g.size)), pucci, 1.1, 0.2, fam=EXTREMAL_MINUS)
print(f"cone condition with beta=1.1 > beta2={rep.beta2:.4f}: {rep.status}, "
      f"K={rep.K:.4f}, worst margin {rep.worst_margin:.2e}")
