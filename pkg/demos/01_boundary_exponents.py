"""Boundary exponents of the extremal operators.

A power ``d**beta`` of the distance to the boundary is mapped by ``M+`` to
``c+(beta) d**(beta - 2s)``.  The constant changes sign once, at ``beta1``;
its counterpart ``c-`` changes sign at ``beta2``.  For the fractional
Laplacian both roots equal ``s``; a spread between the kernel bounds pulls
them apart.
"""

import numpy as np

from nonlocal_eigs import KernelClass, c_constant, find_beta_root, profile

print("fractional Laplacian: both roots sit at s")
for s in (0.55, 0.75, 0.9):
    k = KernelClass.fractional(s)
    print(f"  s={s:.2f}  beta1={find_beta_root(k, 'plus'):.6f}  beta2={find_beta_root(k, 'minus'):.6f}")

k = KernelClass(1.0, 2.0, 0.75)
prof = profile(k, 8)
print(f"\nkernel bounds [1, 2], s=0.75: beta1={prof.beta1:.6f} <= beta2={prof.beta2:.6f}")
print("   beta      c+(beta)      c-(beta)")
for beta, cp, cm in prof.samples:
    print(f"  {beta:.4f}  {cp:+.6e}  {cm:+.6e}")

# c+ vanishes at beta1 and is positive just above it.
for beta in (prof.beta1 - 0.05, prof.beta1 + 0.05):
    print(f"c+({beta:.4f}) = {c_constant(beta, k, 'plus'):+.4e}")
print("sign pattern holds:", bool(np.all(np.diff(np.sign(prof.samples[:, 1])) >= 0)))
