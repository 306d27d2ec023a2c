"""Discrete Dirichlet problem ``-I u - rho u = f`` with zero exterior data,
and the structural diagnostics built on it.

Two solvers are provided:

* **policy iteration** (Howard's algorithm) for one-sided families, i.e.
  a pure sup or a pure inf of linear operators, including the extremal
  operators.  Each step freezes the optimal control at every node and solves
  the resulting linear system with a dense LU factorization.
* **pseudo-time** relaxation ``u <- u + tau (I u + rho u + f)`` with
  ``tau = 0.9 / D``, where ``D`` bounds the dependence of the scheme on the
  centre value.  It works for any family, including genuine inf-sup ones,
  but needs many sweeps on fine grids.
"""

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .beta_constants import find_beta_root
from .errors import ConfigurationError, DomainError, InsufficientDataError
from .grid import BarrierParams, GridFunction, barrier_xi, distance_to_boundary, interval_grid
from .nonlocal_op import (
    EXTREMAL_MINUS,
    EXTREMAL_PLUS,
    best_response,
    build_quadrature,
    eval_extremal,
    eval_operator,
    scheme_diagonal_bound,
)

__all__ = [
    "SolveConfig",
    "SolveReport",
    "solve",
    "residual",
    "ComparisonReport",
    "check_comparison",
    "abp_ratio",
    "random_smooth_source",
    "ThresholdReport",
    "max_principle_threshold",
    "BarrierRow",
    "barrier_sign_check",
    "boundary_exponent_fit",
    "HConditionReport",
    "h_condition_check",
]

METHODS = ("auto", "policy_iteration", "pseudo_time")
DIVERGENCE_NORM = 1e12
DIVERGENCE_STREAK = 500
POSITIVITY_TOL = 1e-10


@dataclass(frozen=True)
class SolveConfig:
    """Solver settings.

    ``method="auto"`` picks policy iteration for one-sided families and
    pseudo-time otherwise.  ``max_iters=None`` means 200 policy steps or
    200000 pseudo-time sweeps.
    """

    method: str = "auto"
    residual_tol: float = 1e-10
    max_iters: int = None
    rho_shift: float = 0.0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigurationError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.residual_tol > 0:
            raise ConfigurationError("residual_tol must be positive")
        if self.max_iters is not None and self.max_iters < 1:
            raise ConfigurationError("max_iters must be at least 1")

    def iteration_budget(self, method):
        if self.max_iters is not None:
            return self.max_iters
        return 200 if method == "policy_iteration" else 200_000


@dataclass(frozen=True)
class SolveReport:
    u: GridFunction
    residual_history: tuple
    iterations: int
    converged: bool
    method_used: str
    diverged: bool = False

    @property
    def residual(self):
        return self.residual_history[-1] if self.residual_history else np.inf


def residual(u, f, fam, k, q, rho=0.0):
    """Sup-norm of ``I u + rho u + f``."""
    r = eval_operator(u, fam, q, k).values + rho * np.asarray(u) + np.asarray(f)
    return float(np.max(np.abs(r)))


class _FactorCache:
    """Reuses the last LU factorization while the frozen policy is unchanged."""

    def __init__(self):
        self.key = None
        self.lu = None

    @staticmethod
    def _key(op, rho):
        h = hashlib.blake2b(np.float64(rho).tobytes(), digest_size=16)
        for part in (op.kappa, op.kappa_tail, op.drift, op.kappa_pairs):
            h.update(b"-" if part is None else np.ascontiguousarray(part, dtype=float).tobytes())
        return h.digest()

    def factor(self, op, rho):
        key = self._key(op, rho)
        if key != self.key:
            A = op.matrix()
            A[np.diag_indices_from(A)] += rho
            self.lu = sla.lu_factor(A, check_finite=False)
            self.key = key
        return self.lu


def _linear_solve(op, rho, rhs, cache):
    """Solve ``(A + rho) u = rhs`` with one step of iterative refinement."""
    lu = cache.factor(op, rho)
    u = sla.lu_solve(lu, rhs, check_finite=False)
    r = rhs - (op.apply(u) + rho * u)
    return u + sla.lu_solve(lu, r, check_finite=False)


def _policy_iteration(f, fam, k, q, cfg, u0, cache):
    rho = cfg.rho_shift
    budget = cfg.iteration_budget("policy_iteration")
    u = np.zeros(q.grid.size) if u0 is None else np.array(u0, dtype=float)
    history = []
    prev_key = None
    for it in range(1, budget + 1):
        op = best_response(u, fam, q, k)
        key = _FactorCache._key(op, rho)
        if key == prev_key and history:
            # policy is stable: the last iterate is the discrete solution
            return u, history, it - 1, history[-1] <= cfg.residual_tol, False
        prev_key = key
        u = _linear_solve(op, rho, -f, cache)
        if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > DIVERGENCE_NORM:
            return np.nan_to_num(u), history + [np.inf], it, False, True
        history.append(residual(u, f, fam, k, q, rho))
        if history[-1] <= cfg.residual_tol:
            return u, history, it, True, False
    return u, history, budget, False, False


def _pseudo_time(f, fam, k, q, cfg, u0):
    rho = cfg.rho_shift
    budget = cfg.iteration_budget("pseudo_time")
    tau = 0.9 / scheme_diagonal_bound(fam, q, k, rho)
    u = np.zeros(q.grid.size) if u0 is None else np.array(u0, dtype=float)
    history = []
    streak = 0
    for it in range(1, budget + 1):
        r = eval_operator(u, fam, q, k).values + rho * u + f
        res = float(np.max(np.abs(r)))
        streak = streak + 1 if history and res > history[-1] else 0
        history.append(res)
        if res <= cfg.residual_tol:
            return u, history, it - 1, True, False
        if streak >= DIVERGENCE_STREAK or np.max(np.abs(u)) > DIVERGENCE_NORM:
            return u, history, it - 1, False, True
        u = u + tau * r
    history.append(residual(u, f, fam, k, q, rho))
    return u, history, budget, history[-1] <= cfg.residual_tol, False


def solve(f, fam, k, cfg=None, q=None, u0=None, cache=None):
    """Solve ``-I u - rho u = f`` on the grid of ``f`` with ``u = 0`` outside.

    Parameters
    ----------
    f : GridFunction
        Right-hand side.
    fam : ControlFamily
    k : KernelClass
    cfg : SolveConfig, optional
    q : QuadratureTable, optional
        Built from ``f.grid`` and ``k`` when omitted.
    u0 : array_like, optional
        Initial guess.
    cache : object, optional
        Opaque factorization cache from :func:`new_cache`, reused across calls
        (the eigensolver passes one to avoid refactoring a stable policy).

    Returns
    -------
    SolveReport
        ``converged`` is false with ``diverged`` set when the iterates blow up,
        which is expected when ``rho_shift`` exceeds the principal eigenvalue.
    """
    cfg = cfg or SolveConfig()
    grid = f.grid
    q = q or build_quadrature(grid, k)
    method = cfg.method
    if method == "auto":
        method = "policy_iteration" if fam.is_one_sided else "pseudo_time"
    if method == "policy_iteration" and not fam.is_one_sided:
        raise ConfigurationError(
            "policy iteration needs a one-sided (pure sup or pure inf) family"
        )
    fv = np.asarray(f.values, dtype=float)
    if method == "policy_iteration":
        u, hist, its, conv, div = _policy_iteration(
            fv, fam, k, q, cfg, u0, cache or _FactorCache()
        )
    else:
        u, hist, its, conv, div = _pseudo_time(fv, fam, k, q, cfg, u0)
    u = np.where(np.isfinite(u), u, 0.0)
    return SolveReport(GridFunction(grid, u), tuple(hist), its, conv, method, div)


def new_cache():
    """Factorization cache for repeated :func:`solve` calls on one grid."""
    return _FactorCache()


def random_smooth_source(rng, n_bumps=4, width=(0.05, 0.4)):
    """Random nonnegative sum of Gaussian bumps, returned as a function of ``x``.

    Sampling the same function on several grids gives matched right-hand
    sides for refinement studies.
    """
    centers = rng.uniform(-0.8, 0.8, n_bumps)
    widths = rng.uniform(*width, n_bumps)
    amps = rng.uniform(0.1, 1.0, n_bumps)

    def f(x):
        x = np.asarray(x, dtype=float)[..., None]
        return np.sum(amps * np.exp(-(((x - centers) / widths) ** 2)), axis=-1)

    return f


# ---------------------------------------------------------------------------
# comparison and ABP


@dataclass(frozen=True)
class ComparisonReport:
    """``worst_violation = max(v - u)^+``; ``precondition_gap = min(-Iu + Iv)``."""

    worst_violation: float
    n_violations: int
    precondition_gap: float

    @property
    def precondition_holds(self):
        return self.precondition_gap >= 0

    @property
    def ok(self):
        return self.n_violations == 0


def check_comparison(u, v, fam, k, q=None, atol=0.0):
    """Check ``u >= v`` nodewise for a supersolution/subsolution pair.

    The precondition ``-I u >= -I v`` is not enforced; its smallest margin is
    reported so that callers can tell a failed test from a bad pair.
    """
    q = q or build_quadrature(u.grid, k)
    gap = eval_operator(v, fam, q, k).values - eval_operator(u, fam, q, k).values
    diff = np.asarray(v) - np.asarray(u)
    bad = diff > atol
    return ComparisonReport(
        float(max(diff.max(initial=0.0), 0.0)), int(bad.sum()), float(gap.min())
    )


def abp_ratio(f, k, cfg=None, q=None):
    """``sup u^+ / (|f|_inf |Omega|^(1/n))`` for the extremal-plus solution of ``-I u = f``."""
    fnorm = f.sup_norm()
    if fnorm == 0:
        return 0.0
    rep = solve(f, EXTREMAL_PLUS, k, cfg, q)
    upos = max(float(np.max(rep.u.values)), 0.0)
    grid = f.grid
    return upos / (fnorm * grid.domain.measure ** (1.0 / grid.dim))


# ---------------------------------------------------------------------------
# maximum-principle threshold


@dataclass(frozen=True)
class ThresholdReport:
    """Scan of ``rho`` for the shifted problem; ``breakdown_rho`` is ``None`` if none failed."""

    breakdown_rho: float
    last_good_rho: float
    reason: str
    rows: tuple  # (rho, min_u / |u|_inf, converged)

    @property
    def open_ended(self):
        return self.breakdown_rho is None


def max_principle_threshold(fam, k, rho_grid, f, cfg=None, q=None):
    """Smallest ``rho`` in ``rho_grid`` at which ``(-I - rho) u = f`` loses positivity.

    ``f`` must be nonnegative and nonzero.  Positivity fails when some value
    drops below ``-1e-10 |u|_inf``; a diverging or non-converging solve, or a
    singular linear system, also counts as breakdown.
    """
    rho_grid = np.asarray(rho_grid, dtype=float)
    if np.any(np.diff(rho_grid) <= 0):
        raise ConfigurationError("rho_grid must be strictly ascending")
    fv = np.asarray(f)
    if np.any(fv < 0) or not np.any(fv > 0):
        raise DomainError("threshold scan needs f >= 0 with f not identically 0")
    cfg = cfg or SolveConfig()
    q = q or build_quadrature(f.grid, k)
    cache = _FactorCache()
    rows = []
    last_good = None
    for rho in rho_grid:
        run_cfg = SolveConfig(cfg.method, cfg.residual_tol, cfg.max_iters, float(rho))
        try:
            rep = solve(f, fam, k, run_cfg, q, cache=cache)
        except (np.linalg.LinAlgError, ValueError) as exc:
            rows.append((float(rho), np.nan, False))
            return ThresholdReport(float(rho), last_good, f"singular: {exc}", tuple(rows))
        vals = rep.u.values
        norm = float(np.max(np.abs(vals)))
        rel_min = float(vals.min() / norm) if norm > 0 else 0.0
        rows.append((float(rho), rel_min, rep.converged))
        if rel_min < -POSITIVITY_TOL:
            return ThresholdReport(float(rho), last_good, "positivity", tuple(rows))
        if rep.diverged or not rep.converged:
            return ThresholdReport(float(rho), last_good, "diverged", tuple(rows))
        last_good = float(rho)
    return ThresholdReport(None, last_good, "none", tuple(rows))


# ---------------------------------------------------------------------------
# barrier and boundary behaviour


@dataclass(frozen=True)
class BarrierRow:
    """Sign and growth of ``M+-(xi)`` on the evaluation collar for one exponent."""

    sign: str
    beta: float
    root: float
    predicted: int  # +1 or -1; 0 when skipped
    n_nodes: int
    sign_fraction: float
    slope: float
    expected_slope: float
    status: str

    @property
    def sign_ok(self):
        return self.status == "ok" and self.sign_fraction == 1.0

    @property
    def slope_error(self):
        return abs(self.slope - self.expected_slope)


def _fit_slope(d, y):
    return float(np.polyfit(np.log(d), np.log(y), 1)[0])


def barrier_sign_check(
    k,
    beta_list=None,
    collar=0.02,
    signs=("plus", "minus"),
    n_cells=16384,
    barrier_delta=0.9,
    margin=0.02,
    exclude=2,
):
    """Evaluate ``M+(xi)`` and ``M-(xi)`` near the boundary of ``(-1, 1)``.

    The barrier ``xi = min(d, barrier_delta)**beta`` is built on a grid with
    ``n_cells`` cells, and the extremal operators are evaluated only at the
    nodes with ``d < collar``.  Near the boundary ``M+(xi)`` behaves like
    ``c+(beta) d**(beta - 2s)``; away from it the plateau adds a bounded
    correction, so the evaluation collar should be small compared with
    ``barrier_delta``.  The growth exponent is the least-squares slope of
    ``log |M(xi)|`` against ``log d``, leaving out the ``exclude`` nodes
    nearest each boundary point.

    Exponents within ``margin`` of the relevant root are reported as skipped.
    Without ``beta_list`` each sign is tested at its own root plus and minus 0.1.
    """
    grid = interval_grid(-1.0, 1.0, n_cells)
    q = build_quadrature(grid, k)
    d = distance_to_boundary(grid).values
    nodes = np.nonzero(d < collar)[0]
    dn = d[nodes]
    fit = dn > (exclude + 0.5) * grid.h
    roots = {sg: find_beta_root(k, sg) for sg in signs}
    rows = []
    for sign in signs:
        root = roots[sign]
        betas = beta_list if beta_list is not None else (root - 0.1, root + 0.1)
        for beta in betas:
            expected = beta - 2 * k.s
            if abs(beta - root) < margin:
                rows.append(BarrierRow(sign, beta, root, 0, len(nodes), np.nan, np.nan,
                                       expected, "skipped: too close to the root"))
                continue
            xi = barrier_xi(grid, BarrierParams(beta, barrier_delta), s=k.s)
            M = eval_extremal(xi, q, k, sign, nodes=nodes)
            predicted = 1 if beta > root else -1
            frac = float(np.mean(np.sign(M) == predicted))
            if fit.sum() < 4 or np.any(M[fit] == 0):
                raise InsufficientDataError("too few collar nodes for the growth fit")
            slope = _fit_slope(dn[fit], np.abs(M[fit]))
            rows.append(BarrierRow(sign, beta, root, predicted, len(nodes), frac, slope,
                                   expected, "ok"))
    return tuple(rows)


def boundary_exponent_fit(u, collar, exclude=2):
    """Least-squares slope of ``log u`` against ``log d`` on nodes with ``d < collar``.

    The ``exclude`` distance levels nearest the boundary are left out.
    """
    d = distance_to_boundary(u.grid).values
    mask = (d < collar) & (d > (exclude + 0.5) * u.grid.h)
    if mask.sum() < 4:
        raise InsufficientDataError(
            f"only {int(mask.sum())} collar nodes available; at least 4 required"
        )
    vals = np.asarray(u)[mask]
    if np.any(vals <= 0):
        raise DomainError("boundary exponent fit needs u > 0 on the collar")
    return _fit_slope(d[mask], vals)


@dataclass(frozen=True)
class HConditionReport:
    status: str  # "ok", "violated" or "skipped: ..."
    K: float
    worst_margin: float  # min over nodes of u - K xi
    beta2: float
    delta: float  # collar width actually used (a multiple of h)

    @property
    def holds(self):
        return self.status == "ok"


def h_condition_check(f, k, beta, delta, fam=EXTREMAL_MINUS, cfg=None, q=None):
    """Check ``u >= K xi`` for ``u = solve(f)`` and ``K = inf_{d >= delta} u / cap``.

    Only meaningful for ``beta`` above the root ``beta2`` of ``c-``; below it
    the check is skipped.  ``delta`` is rounded down to a multiple of the grid
    spacing so that the plateau of ``xi`` starts exactly at the first node
    entering the infimum; otherwise the last collar node compares ``u`` at a
    distance below ``delta`` with the infimum taken further in.
    """
    fv = np.asarray(f)
    if np.any(fv < 0) or not np.any(fv > 0):
        raise DomainError("the (H) check needs f >= 0 with f not identically 0")
    h = f.grid.h
    delta = np.floor(delta / h + 1e-9) * h
    if delta < h:
        raise ConfigurationError("collar width must be at least one grid spacing")
    beta2 = find_beta_root(k, "minus")
    if not beta2 < beta < 2 * k.s:
        reason = f"skipped: beta={beta} outside ({beta2:.6g}, {2 * k.s:g})"
        return HConditionReport(reason, np.nan, np.nan, beta2, delta)
    p = BarrierParams(beta, delta)
    xi = barrier_xi(f.grid, p, s=k.s)
    u = solve(f, fam, k, cfg, q).u
    d = distance_to_boundary(f.grid).values
    interior = d >= delta - 1e-9 * h
    K = float(np.min(u.values[interior])) / p.cap
    margin = float(np.min(u.values - K * xi.values))
    status = "ok" if margin >= -1e-12 * K * p.cap else "violated"
    return HConditionReport(status, K, margin, beta2, delta)
