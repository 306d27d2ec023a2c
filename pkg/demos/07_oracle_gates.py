"""Independent reference checks.

The dense matrix is assembled by explicit loops, its eigenvalue is found by
textbook inverse iteration, and the boundary constants are recomputed with
25-digit tanh-sinh quadrature.  Each gate compares one of them with the
production code path.
"""

from nonlocal_eigs.oracle import run_gates

for gate in run_gates():
    print(f"{'PASS' if gate.passed else 'FAIL'}  {gate.name}: {gate.value:.2e} (tol {gate.tol:.0e})")
