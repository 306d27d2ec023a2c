"""Explicit time stepping for ``u_t = I u`` with zero exterior data.

Forward Euler with ``tau <= 0.9 / D`` keeps the update monotone, so the
discrete evolution inherits comparison with respect to the initial data.  The
ratio ``max_i h(x_i, t) / (v(x_i) e^(-lambda t))`` against a positive
eigenfunction ``v`` is tracked to check that it never exceeds its initial
value ``r0+ = max_i h0+(x_i) / v(x_i)``.

Forward Euler damps an eigenmode by exactly ``1 - tau lambda`` per step
rather than by ``e^(-lambda tau)``.  The ratio therefore divides by the
discrete decay ``(1 - tau lambda)**n`` after ``n`` steps, which keeps it equal
to 1 for ``h0 = v``, and the fitted decay rate can be mapped back to
``lambda`` through ``(1 - e^(slope tau)) / tau``.  If ``-I v >= lambda v``
holds nodewise (take ``lambda`` as the lower Collatz-Wielandt bound of
``v``), comparison makes the ratio bound exact for the discrete scheme.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError, InsufficientDataError
from .grid import GridFunction
from .nonlocal_op import build_quadrature, eval_operator, scheme_diagonal_bound

__all__ = [
    "cfl_limit",
    "step",
    "ParabolicRun",
    "decay_ratio_series",
    "decay_rate_fit",
]

N_SNAPSHOTS = 64
CFL_SAFETY = 0.9


def cfl_limit(fam, k, q):
    """Largest admissible time step ``0.9 / D``."""
    return CFL_SAFETY / scheme_diagonal_bound(fam, q, k)


def step(h, fam, k, tau, q=None):
    """One explicit Euler step ``h + tau I h``."""
    q = q or build_quadrature(h.grid, k)
    if not 0 < tau <= cfl_limit(fam, k, q) * (1 + 1e-12):
        raise ConfigurationError(
            f"time step {tau} violates the bound {cfl_limit(fam, k, q):.6g}"
        )
    return GridFunction(h.grid, h.values + tau * eval_operator(h, fam, q, k).values)


@dataclass(frozen=True)
class ParabolicRun:
    """Sampled evolution.

    ``times``, ``sup_h`` (sup-norm of ``h``) and ``ratio`` share one entry per
    snapshot, the first at ``t = 0``.  ``eigen_ref`` is ``(lambda, v)``.
    """

    tau: float
    horizon: float
    times: np.ndarray
    sup_h: np.ndarray
    ratio: np.ndarray
    r0: float
    eigen_ref: tuple
    final: GridFunction

    @property
    def ratio_max(self):
        return float(np.max(self.ratio))

    def ratio_bound_holds(self, rtol=1e-8):
        return self.ratio_max <= self.r0 * (1 + rtol) + 1e-300


def decay_ratio_series(h0, eigen_ref, fam, k, tau=None, horizon=None, q=None,
                       n_snapshots=N_SNAPSHOTS):
    """Evolve ``h0`` and record the sup-norm and the eigenfunction ratio.

    Parameters
    ----------
    h0 : GridFunction
    eigen_ref : tuple
        ``(lambda, v)`` with ``v`` a positive eigenfunction of ``-I`` on the same grid.
    tau : float, optional
        Time step; defaults to the CFL limit.
    horizon : float, optional
        Final time; defaults to ``8 / lambda``.  It is rounded up to a whole
        number of steps per snapshot.
    """
    lam, v = eigen_ref
    v = np.asarray(v, dtype=float)
    if np.any(v <= 0):
        raise DomainError("the reference eigenfunction must be positive")
    if not lam > 0:
        raise ConfigurationError("the reference eigenvalue must be positive")
    q = q or build_quadrature(h0.grid, k)
    tau = tau or cfl_limit(fam, k, q)
    horizon = horizon or 8.0 / lam
    if not horizon > 0:
        raise ConfigurationError("horizon must be positive")
    per_snap = max(1, int(np.ceil(horizon / tau / n_snapshots)))
    damp = 1.0 - tau * lam
    if not damp > 0:
        raise ConfigurationError("time step too large for the reference eigenvalue")
    h = h0
    hv = np.asarray(h0, dtype=float)
    r0 = max(float(np.max(hv / v)), 0.0)
    times, sups, ratios = [0.0], [h.sup_norm()], [max(float(np.max(hv / v)), 0.0)]
    for m in range(1, n_snapshots + 1):
        for _ in range(per_snap):
            h = step(h, fam, k, tau, q)
        n_steps = m * per_snap
        scale = damp ** n_steps
        times.append(n_steps * tau)
        sups.append(h.sup_norm())
        ratios.append(float(np.max(h.values / v)) / scale if scale > 0 else np.inf)
    return ParabolicRun(
        tau, n_snapshots * per_snap * tau, np.array(times), np.array(sups),
        np.array(ratios), r0, (lam, v), h,
    )


def decay_rate_fit(times, sups, burn_in, tau=None, min_samples=10):
    """Least-squares slope of ``log sup|h|`` against ``t`` for ``t >= burn_in``.

    With ``tau`` the raw slope ``sigma`` is mapped to ``-(1 - e^(sigma tau)) / tau``,
    the eigenvalue whose explicit Euler evolution decays at that rate, so the
    result is ``-lambda`` for an exact eigenmode.
    """
    times = np.asarray(times, dtype=float)
    sups = np.asarray(sups, dtype=float)
    keep = (times >= burn_in) & (sups > 1e-300)
    if keep.sum() < min_samples:
        raise InsufficientDataError(
            f"{int(keep.sum())} usable samples after burn-in; {min_samples} required"
        )
    slope = float(np.polyfit(times[keep], np.log(sups[keep]), 1)[0])
    if tau is None:
        return slope
    return -(1.0 - np.exp(slope * tau)) / tau
