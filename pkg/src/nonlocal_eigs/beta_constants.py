"""Boundary-exponent constants of the extremal operators.

For ``phi(x) = (x_+)**beta`` the extremal operators satisfy
``M+-(phi) = c+-(beta) x**(beta - 2s)`` on ``x > 0`` with

    c+-(beta) = int_R S+-(psi(t)) / |t|**(1 + 2s) dt,
    psi(t) = (1 + t)_+**beta + (1 - t)_+**beta - 2.

``c+`` changes sign from negative to positive at ``beta1`` and ``c-`` at
``beta2 >= beta1``.  The integral is evaluated as ``2 * int_0^inf`` (``psi``
is even) on the pieces

* ``[0, eps]``: termwise integration of the even power series of ``psi``;
* ``[eps, T]``: adaptive Gauss-Kronrod (7/15), breakpoints at the kink
  ``t = 1`` and at the sign change ``t* = 2**(1/beta) - 1`` of ``psi``;
* ``[T, inf)``: the binomial expansion of ``(1 + t)**beta`` integrated in
  closed form, with a geometric remainder bound.
"""

from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, BracketError, ConfigurationError

__all__ = [
    "BetaProfile",
    "psi_beta",
    "c_constant",
    "find_beta_root",
    "profile",
]

EPS_SPLIT = 1e-3
T_MIN = 10.0
MAX_INTERVALS = 50_000

# Gauss-Kronrod 7/15 nodes on [-1, 1] (QUADPACK qk15)
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])
_NODES = np.concatenate((-_XGK[:-1], _XGK[::-1]))
_KW = np.concatenate((_WGK[:-1], _WGK[::-1]))
_GW = np.zeros(15)
_GW[1:15:2] = np.concatenate((_WG[:-1], _WG[::-1]))


@dataclass(frozen=True)
class BetaProfile:
    """Tabulated ``c+-(beta)`` with the two roots.

    ``samples`` has columns ``(beta, c_plus, c_minus)``, sorted by ``beta``.
    """

    s: float
    lambda_lo: float
    lambda_hi: float
    samples: np.ndarray
    beta1: float
    beta2: float


def psi_beta(t, beta):
    """``(1 + t)_+**beta + (1 - t)_+**beta - 2``.

    Written with ``expm1``/``log1p`` where both brackets are positive so that
    the ``O(t**2)`` value near ``t = 0`` keeps full relative accuracy.
    """
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    out = np.empty_like(a)
    small = a < 1
    ts = a[small]
    out[small] = np.expm1(beta * np.log1p(ts)) + np.expm1(beta * np.log1p(-ts))
    out[~small] = (1 + a[~small]) ** beta - 2.0
    return out if out.ndim else float(out)


def _multipliers(k, sign):
    """Factors applied by ``S`` to positive and negative arguments."""
    if sign == "plus":
        return k.lambda_hi, k.lambda_lo
    if sign == "minus":
        return k.lambda_lo, k.lambda_hi
    raise ConfigurationError(f"sign must be 'plus' or 'minus', got {sign!r}")


def _check_beta(beta, s):
    if not 0 < beta < 2 * s:
        raise ConfigurationError(f"beta={beta} must lie in (0, 2s={2 * s})")


def _near_zero(beta, s, eps, pos, neg):
    """``int_0^eps S(psi(t)) t**(-1-2s) dt`` from the even power series of ``psi``.

    ``psi`` has the sign of ``beta - 1`` on ``(0, 1)`` (concavity/convexity of
    ``t -> t**beta``), so ``S`` acts as a single multiplier here.
    """
    total = 0.0
    coeff = 1.0  # binom(beta, m)
    for m in range(1, 41):
        coeff *= (beta - m + 1) / m
        if m % 2:
            continue
        term = 2.0 * coeff * eps ** (m - 2 * s) / (m - 2 * s)
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-300):
            break
    return (pos if beta > 1 else neg) * total


def _tail(beta, s, T, pos):
    """``int_T^inf S(psi(t)) t**(-1-2s) dt`` for ``T > max(1, t*)`` where ``psi > 0``.

    Returns ``(value, remainder_bound)``.
    """
    total = -2.0 * T ** (-2 * s) / (2 * s)
    coeff = 1.0
    n_terms = 60
    for m in range(n_terms):
        if m:
            coeff *= (beta - m + 1) / m
        total += coeff * T ** (beta - m - 2 * s) / (2 * s + m - beta)
    # |binom(beta, m)| <= 1 for 0 < beta < 2 and m >= 2
    rem = T ** (beta - n_terms - 2 * s) / (2 * s + n_terms - beta) / (1 - 1 / T)
    return pos * total, pos * rem


def _integrand(t, beta, s, pos, neg):
    p = psi_beta(t, beta)
    return np.where(p > 0, pos * p, neg * p) * t ** (-1.0 - 2 * s)


def _gauss_kronrod(f, a, b):
    """Kronrod estimate and |Kronrod - Gauss| on each interval (vectorized)."""
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = f(x)
    kron = half * (fx @ _KW)
    gauss = half * (fx @ _GW)
    return kron, np.abs(kron - gauss)


def _adaptive(f, breaks, tol):
    """Globally adaptive GK15 over consecutive ``breaks``; returns ``(value, error)``."""
    a = np.asarray(breaks[:-1], dtype=float)
    b = np.asarray(breaks[1:], dtype=float)
    val, err = _gauss_kronrod(f, a, b)
    done_val = 0.0
    done_err = 0.0
    while True:
        total_err = done_err + err.sum()
        if total_err <= tol:
            return done_val + val.sum(), total_err
        if len(a) + 1 > MAX_INTERVALS:
            raise AccuracyError(
                f"quadrature budget exhausted at error {total_err:.3e} (tol {tol:.1e})",
                achieved=total_err,
            )
        # freeze intervals whose share of the error is negligible, split the rest
        share = (tol - done_err) / (2.0 * len(a))
        keep = err <= share
        done_val += val[keep].sum()
        done_err += err[keep].sum()
        a, b = a[~keep], b[~keep]
        m = 0.5 * (a + b)
        a, b = np.concatenate((a, m)), np.concatenate((m, b))
        val, err = _gauss_kronrod(f, a, b)


def c_constant(beta, k, sign, tol=1e-10, return_error=False):
    """Constant ``c+(beta)`` (``sign="plus"``) or ``c-(beta)`` for the kernel class ``k``.

    Parameters
    ----------
    beta : float
        Exponent in ``(0, 2s)``.
    k : KernelClass
        Only ``lambda_lo``, ``lambda_hi`` and ``s`` are used.
    tol : float
        Absolute accuracy target.
    return_error : bool
        Also return the certified error bound.

    Raises
    ------
    AccuracyError
        If the adaptive quadrature cannot reach ``tol``.
    """
    s = k.s
    _check_beta(beta, s)
    pos, neg = _multipliers(k, sign)
    eps = EPS_SPLIT
    t_star = 2.0 ** (1.0 / beta) - 1.0
    T = max(T_MIN, 2.0 * t_star)

    head = _near_zero(beta, s, eps, pos, neg)
    tail, tail_err = _tail(beta, s, T, pos)
    # geometric breakpoints above 1 keep the slowly decaying part well resolved
    upper = [1.0]
    while upper[-1] * 2 < T:
        upper.append(upper[-1] * 2)
    upper.append(T)
    breaks = sorted(set([eps, 0.5] + upper + ([t_star] if 1 < t_star < T else [])))
    body, body_err = _adaptive(
        lambda t: _integrand(t, beta, s, pos, neg), breaks, 0.5 * tol / 2
    )
    value = 2.0 * (head + body + tail)
    error = 2.0 * (body_err + tail_err) + 1e-15 * abs(value)
    if return_error:
        return value, error
    return value


def _c_sign(beta, k, sign, quad_tol):
    return np.sign(c_constant(beta, k, sign, tol=quad_tol))


def find_beta_root(k, sign, tol=1e-6, quad_tol=1e-10):
    """Root ``beta1`` (``sign="plus"``) or ``beta2`` (``sign="minus"``) of ``c+-``.

    The constant is negative below the root and positive above it.  A
    bracket is found by geometric sampling from both ends of ``(0, 2s)`` and
    refined by bisection until its width is below ``tol``.
    """
    two_s = 2 * k.s
    lo = hi = None
    for m in range(1, 40):
        beta = two_s * 0.5 ** m
        if _c_sign(beta, k, sign, quad_tol) < 0:
            lo = beta
            break
    for m in range(1, 40):
        beta = two_s * (1 - 0.5 ** m)
        if _c_sign(beta, k, sign, quad_tol) > 0:
            hi = beta
            break
    if lo is None or hi is None or not lo < hi:
        raise BracketError(
            f"no sign change of c_{sign} found in (0, {two_s}); check the quadrature setup"
        )
    while hi - lo >= tol:
        mid = 0.5 * (lo + hi)
        if _c_sign(mid, k, sign, quad_tol) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def profile(k, n_samples, tol=1e-10, root_tol=1e-6):
    """Tabulate ``c+-`` on ``n_samples`` exponents in ``(0.02*2s, 0.98*2s)`` plus both roots."""
    if n_samples < 2:
        raise ConfigurationError("profile needs at least 2 samples")
    two_s = 2 * k.s
    beta1 = find_beta_root(k, "plus", tol=root_tol)
    beta2 = find_beta_root(k, "minus", tol=root_tol)
    betas = np.union1d(np.linspace(0.02 * two_s, 0.98 * two_s, n_samples), [beta1, beta2])
    rows = [
        (b, c_constant(b, k, "plus", tol), c_constant(b, k, "minus", tol)) for b in betas
    ]
    return BetaProfile(k.s, k.lambda_lo, k.lambda_hi, np.array(rows), beta1, beta2)
