"""Principal half-eigenvalues by inverse power iteration.

For a monotone, positively 1-homogeneous operator ``I`` the solution map
``T(f) = u`` of ``-I u = f`` preserves positive functions.  Iterating
``u <- T(u / |u|)`` converges to the positive eigenfunction, and the
Collatz-Wielandt quotients ``(-I u)_i / u_i`` bracket the principal
eigenvalue ``lambda1+`` at every step.  The negative eigenpair is obtained
the same way from the conjugate operator ``u -> -I(-u)``.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dirichlet_solver import SolveConfig, new_cache, solve
from .errors import ConfigurationError, ConvergenceError, DomainError
from .grid import GridFunction, interval_grid
from .nonlocal_op import build_quadrature, eval_operator

__all__ = [
    "EigenConfig",
    "EigenResult",
    "collatz_wielandt",
    "inverse_power",
    "verify_simplicity",
    "domain_monotonicity",
]

CW_FLOOR = 1e-13


@dataclass(frozen=True)
class EigenConfig:
    """Settings for :func:`inverse_power`.

    The inner residual tolerance is tightened to ``cw_gap_tol / 10`` unless
    the supplied ``inner`` config is already stricter.
    """

    sign: str = "plus"
    cw_gap_tol: float = 1e-6
    max_outer_iters: int = 500
    inner: SolveConfig = field(default_factory=SolveConfig)
    seed: int = 0

    def __post_init__(self):
        if self.sign not in ("plus", "minus"):
            raise ConfigurationError(f"sign must be 'plus' or 'minus', got {self.sign!r}")
        if not self.cw_gap_tol > 0:
            raise ConfigurationError("cw_gap_tol must be positive")
        if self.max_outer_iters < 1:
            raise ConfigurationError("max_outer_iters must be at least 1")

    def inner_config(self):
        tol = min(self.inner.residual_tol, self.cw_gap_tol / 10)
        return replace(self.inner, residual_tol=tol, rho_shift=0.0)


@dataclass(frozen=True)
class EigenResult:
    lambda_: float
    cw_lo: float
    cw_hi: float
    phi: GridFunction
    outer_iters: int
    trace: tuple  # (cw_lo, cw_hi) per outer iteration
    converged: bool

    @property
    def gap(self):
        return self.cw_hi - self.cw_lo


def collatz_wielandt(u, fam, k, q=None):
    """Bracket ``(min_i, max_i)`` of ``(-I u)_i / u_i`` for a positive ``u``.

    Nodes with ``u_i < 1e-13 max u`` are left out to avoid ``0/0``.
    """
    vals = np.asarray(u)
    if np.any(vals <= 0):
        raise DomainError("Collatz-Wielandt quotients need u > 0 at every node")
    q = q or build_quadrature(u.grid, k)
    neg = -eval_operator(u, fam, q, k).values
    keep = vals >= CW_FLOOR * vals.max()
    ratio = neg[keep] / vals[keep]
    return float(ratio.min()), float(ratio.max())


def inverse_power(fam, k, cfg, grid, q=None, u0=None):
    """Principal eigenpair of ``-I`` on ``grid`` with the sign ``cfg.sign``.

    Parameters
    ----------
    fam : ControlFamily
    k : KernelClass
    cfg : EigenConfig
    grid : Grid
    q : QuadratureTable, optional
    u0 : array_like, optional
        Positive starting function; seeded uniform values in ``(0.5, 1)`` by default.

    Returns
    -------
    EigenResult
        ``phi`` has unit sup-norm and the sign of ``cfg.sign``.  When the
        bracket does not close within ``max_outer_iters`` the result is
        returned with ``converged=False``.

    Raises
    ------
    ConvergenceError
        If an inner solve fails to converge.
    """
    q = q or build_quadrature(grid, k)
    op_fam = fam if cfg.sign == "plus" else fam.conjugate()
    inner = cfg.inner_config()
    if u0 is None:
        u = np.random.default_rng(cfg.seed).uniform(0.5, 1.0, grid.size)
    else:
        u = np.abs(np.asarray(u0, dtype=float))
    u = u / u.max()
    cache = new_cache()
    warm = None
    trace = []
    lo = hi = np.nan
    converged = False
    it = 0
    for it in range(1, cfg.max_outer_iters + 1):
        rep = solve(GridFunction(grid, u), op_fam, k, inner, q, u0=warm, cache=cache)
        if not rep.converged:
            raise ConvergenceError(
                f"inner solve stopped at residual {rep.residual:.3e} in outer step {it}"
            )
        v = rep.u.values
        if np.any(v <= 0):
            raise ConvergenceError(f"inner solution lost positivity in outer step {it}")
        lo, hi = collatz_wielandt(rep.u, op_fam, k, q)
        trace.append((lo, hi))
        u = v / v.max()
        warm = u / (0.5 * (lo + hi))
        if hi - lo < cfg.cw_gap_tol:
            converged = True
            break
    phi = u if cfg.sign == "plus" else -u
    return EigenResult(
        0.5 * (lo + hi), lo, hi, GridFunction(grid, phi), it, tuple(trace), converged
    )


def verify_simplicity(fam, k, cfg, grid, n_restarts=5, seeds=None, workers=1):
    """Largest sup-norm distance between eigenfunctions from independent starts.

    ``seeds`` defaults to ``cfg.seed, cfg.seed + 1, ...``.  ``workers > 1``
    runs the restarts in a thread pool; the result does not depend on it.
    """
    if n_restarts < 2:
        raise ConfigurationError("simplicity check needs at least 2 restarts")
    seeds = list(seeds) if seeds is not None else [cfg.seed + i for i in range(n_restarts)]
    if len(seeds) != n_restarts:
        raise ConfigurationError("need one seed per restart")
    q = build_quadrature(grid, k)

    def run(seed):
        res = inverse_power(fam, k, replace(cfg, seed=seed), grid, q)
        if not res.converged:
            raise ConvergenceError(f"restart with seed {seed} did not converge")
        return res.phi.values

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            phis = list(pool.map(run, seeds))
    else:
        phis = [run(sd) for sd in seeds]
    dev = 0.0
    for a in range(n_restarts):
        for b in range(a + 1, n_restarts):
            dev = max(dev, float(np.max(np.abs(phis[a] - phis[b]))))
    return dev


@dataclass(frozen=True)
class MonotonicityTable:
    """``rows`` holds ``(a, lambda1+((-a, a)))``; ``decreasing`` is the strict check."""

    rows: tuple
    decreasing: bool


def domain_monotonicity(k, fam, radii, n_cells=256, cfg=None):
    """``lambda1+`` on ``(-a, a)`` for each radius, with the same number of cells.

    Using a fixed cell count makes the grids similar, so for a pure
    fractional operator the discrete eigenvalues scale exactly like ``a**(-2s)``.
    """
    radii = [float(a) for a in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ConfigurationError("radii must be strictly ascending")
    cfg = cfg or EigenConfig()
    rows = []
    for a in radii:
        res = inverse_power(fam, k, replace(cfg, sign="plus"), interval_grid(-a, a, n_cells))
        if not res.converged:
            raise ConvergenceError(f"eigen iteration on (-{a}, {a}) did not converge")
        rows.append((a, res.lambda_))
    lams = [lam for _, lam in rows]
    return MonotonicityTable(tuple(rows), all(x > y for x, y in zip(lams, lams[1:])))
