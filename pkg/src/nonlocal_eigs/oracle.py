"""Independent reference computations for small instances.

These routines share no numerical code with the main path:

* :func:`assemble_dense` builds the matrix of a single-control operator by
  explicit loops from the closed-form cell masses;
* :func:`dense_principal_eigen` runs textbook inverse power iteration on it;
* :func:`quadrature_oracle` evaluates the boundary-exponent constants with
  mpmath's tanh-sinh quadrature at 25 digits.

:func:`run_gates` compares each of them with the main implementation.
"""

from dataclasses import dataclass

import mpmath
import numpy as np
import scipy.linalg as sla

from .beta_constants import c_constant
from .errors import ConfigurationError, OracleMismatch
from .grid import interval_grid
from .nonlocal_op import Control, ControlFamily, KernelClass, build_quadrature, eval_operator

__all__ = [
    "DenseOperator",
    "assemble_dense",
    "dense_principal_eigen",
    "quadrature_oracle",
    "GateResult",
    "run_gates",
]

MAX_ORACLE_NODES = 1024


@dataclass(frozen=True, eq=False)
class DenseOperator:
    matrix: np.ndarray
    control: Control
    grid: object


def assemble_dense(control, grid, q, k):
    """Matrix of ``u -> kappa L u + c u'`` (upwinded) for a single control.

    Entry ``(i, m)`` is ``kappa * w_|i-m|`` where ``w_j`` is the mass of the
    two cells ``+-[(j - 1/2) h, (j + 1/2) h]``; the diagonal collects
    ``-2 kappa`` times all cells and the exterior tail beyond ``q.R``.
    """
    if grid.dim != 1:
        raise ConfigurationError("dense assembly is implemented for 1-D grids only")
    n = grid.size
    if n > MAX_ORACLE_NODES:
        raise ConfigurationError(f"oracle grids are limited to {MAX_ORACLE_NODES} nodes")
    control.check(k)
    h, s, kap, c = grid.h, k.s, control.kappa, control.drift
    n_offsets = int(round(q.R / h - 0.5))

    def mass(j):
        return 2.0 * (((j - 0.5) * h) ** (-2 * s) - ((j + 0.5) * h) ** (-2 * s)) / (2 * s)

    A = np.zeros((n, n))
    total = sum(mass(j) for j in range(1, n_offsets + 1))
    tail = 2.0 * q.R ** (-2 * s) / (2 * s)
    for i in range(n):
        A[i, i] = -2.0 * kap * (total + tail)
        for m in range(n):
            if m != i and abs(m - i) <= n_offsets:
                A[i, m] += kap * mass(abs(m - i))
        if c > 0:
            A[i, i] -= c / h
            if i + 1 < n:
                A[i, i + 1] += c / h
        elif c < 0:
            A[i, i] += c / h
            if i - 1 >= 0:
                A[i, i - 1] -= c / h
    return DenseOperator(A, control, grid)


def dense_principal_eigen(A, tol=1e-13, max_iter=20_000):
    """Principal eigenpair of ``-A`` by inverse power iteration.

    Returns ``(lambda, vector)`` with the vector positive and of unit sup-norm.

    Raises
    ------
    OracleMismatch
        If the iteration does not settle within ``max_iter`` steps.
    """
    M = -np.asarray(A.matrix if isinstance(A, DenseOperator) else A, dtype=float)
    lu = sla.lu_factor(M)
    x = np.ones(len(M))
    lam_old = np.inf
    for _ in range(max_iter):
        y = sla.lu_solve(lu, x)
        y /= np.max(np.abs(y))
        lam = float(y @ (M @ y) / (y @ y))
        if abs(lam - lam_old) <= tol * abs(lam) and np.max(np.abs(y - x)) <= np.sqrt(tol):
            return lam, y * np.sign(y[np.argmax(np.abs(y))])
        x, lam_old = y, lam
    raise OracleMismatch("dense inverse power iteration did not converge")


def quadrature_oracle(beta, k, sign, dps=25):
    """``c+(beta)`` or ``c-(beta)`` by tanh-sinh quadrature in extended precision.

    The profile ``psi`` is summed from its Taylor series for ``t < 1/4``; the
    tail beyond ``T`` is mapped to ``[0, 1]`` through ``w = (t / T)**(beta - 2s)``
    so that the slowly decaying integrand becomes bounded.
    """
    s = k.s
    if not 0 < beta < 2 * s:
        raise ConfigurationError(f"beta={beta} must lie in (0, {2 * s})")
    if sign == "plus":
        pos, neg = k.lambda_hi, k.lambda_lo
    elif sign == "minus":
        pos, neg = k.lambda_lo, k.lambda_hi
    else:
        raise ConfigurationError(f"sign must be 'plus' or 'minus', got {sign!r}")
    with mpmath.workdps(dps):
        b = mpmath.mpf(beta)
        two_s = 2 * mpmath.mpf(s)
        pos, neg = mpmath.mpf(pos), mpmath.mpf(neg)
        coef = [2 * mpmath.binomial(b, 2 * m) for m in range(40, 0, -1)]

        def S(v):
            return pos * v if v > 0 else neg * v

        def psi(t):
            if t < mpmath.mpf(1) / 4:
                t2 = t * t
                acc = mpmath.mpf(0)
                for cf in coef:
                    acc = acc * t2 + cf
                return acc * t2
            return (1 + t) ** b + (max(1 - t, 0)) ** b - 2

        def body(t):
            return S(psi(t)) / t ** (1 + two_s)

        t_star = 2 ** (1 / b) - 1
        T = max(mpmath.mpf(10), 2 * t_star)
        pts = [0, mpmath.mpf(1) / 4, 1] + ([t_star] if t_star > 1 else []) + [T]
        head = mpmath.quad(body, pts)
        a = two_s - b

        def tail(w):
            if w == 0:
                return mpmath.mpf(0)
            t = T * w ** (-1 / a)
            return S((1 + 1 / t) ** b - 2 * t ** (-b))

        rest = T ** (-a) / a * mpmath.quad(tail, [0, 1])
        return float(2 * (head + rest))


@dataclass(frozen=True)
class GateResult:
    name: str
    value: float
    tol: float

    @property
    def passed(self):
        return bool(self.value <= self.tol)


def _assembly_gate(n_cells=64, s=0.75):
    k = KernelClass(1.0, 2.0, s, 0.5)
    grid = interval_grid(-1.0, 1.0, n_cells)
    q = build_quadrature(grid, k)
    worst = 0.0
    for ctrl in (Control(1.3, 0.4), Control(2.0, -0.5), Control(1.0, 0.0)):
        A = assemble_dense(ctrl, grid, q, k).matrix
        fam = ControlFamily.linear(ctrl.kappa, ctrl.drift)
        cols = np.stack([eval_operator(e, fam, q, k).values for e in np.eye(grid.size)], axis=1)
        worst = max(worst, float(np.max(np.abs(cols - A)) / np.max(np.abs(A))))
    return GateResult("dense assembly vs operator columns (relative)", worst, 1e-12)


def _eigen_gate(n_cells=512):
    from .eigensolver import EigenConfig, inverse_power

    k = KernelClass.fractional(0.5)
    grid = interval_grid(-1.0, 1.0, n_cells)
    q = build_quadrature(grid, k)
    lam_dense, _ = dense_principal_eigen(assemble_dense(Control(1.0), grid, q, k))
    res = inverse_power(ControlFamily.linear(), k, EigenConfig(cw_gap_tol=1e-10), grid, q)
    return GateResult("dense vs iterative principal eigenvalue", abs(res.lambda_ - lam_dense), 1e-8)


def _quadrature_gate(n_samples=20):
    k = KernelClass(1.0, 2.0, 0.75)
    worst = 0.0
    for beta in np.linspace(0.05, 1.45, n_samples):
        for sign in ("plus", "minus"):
            worst = max(worst, abs(quadrature_oracle(beta, k, sign) - c_constant(beta, k, sign)))
    return GateResult("quadrature oracle vs c_constant", float(worst), 1e-8)


def run_gates(raise_on_failure=False):
    """Run every oracle consistency gate; optionally raise on the first failure."""
    results = [_assembly_gate(), _eigen_gate(), _quadrature_gate()]
    if raise_on_failure:
        for r in results:
            if not r.passed:
                raise OracleMismatch(f"{r.name}: {r.value:.3e} exceeds {r.tol:.1e}")
    return results
