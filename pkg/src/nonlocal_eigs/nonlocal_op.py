"""Monotone discretization of nonlocal Bellman-Isaacs operators with drift.

The operator acting on a function ``u`` that vanishes outside ``Omega`` is

    I u(x) = inf_a sup_b { int delta(u, x, y) K_ab(y) dy + c_ab . grad u(x) },

    delta(u, x, y) = u(x + y) + u(x - y) - 2 u(x),

with kernels ``kappa / |y|**(n + 2s)``, ``lam <= kappa <= Lam``, and drifts
``|c| <= c_plus``.  On a 1-D grid with spacing ``h`` the integral becomes a
sum over the symmetric cells ``+-[(j - 1/2) h, (j + 1/2) h]`` sampled at
``y_j = j h``, plus an exact tail beyond the truncation radius ``R`` where
``delta = -2 u(x)``.  The inner ball ``|y| < h/2`` is dropped, which keeps
every discrete operator monotone: node ``i`` depends decreasingly on
``u_i`` and increasingly on every other value.  Drift terms are upwinded.

The extremal (Pucci) operators replace the kernel by its pointwise best or
worst choice, ``S+(t) = Lam t_+ - lam t_-`` and ``S-(t) = lam t_+ - Lam t_-``,
together with ``+- c_plus |Du|`` in upwind form.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigurationError
from .grid import GridFunction

__all__ = [
    "KernelClass",
    "Control",
    "ControlFamily",
    "EXTREMAL_PLUS",
    "EXTREMAL_MINUS",
    "QuadratureTable",
    "kernel_mass",
    "build_quadrature",
    "second_difference",
    "s_plus",
    "s_minus",
    "eval_extremal",
    "upwind_drift",
    "eval_operator",
    "FrozenOperator",
    "best_response",
    "scheme_diagonal_bound",
]


@dataclass(frozen=True)
class KernelClass:
    """Kernel bounds ``lam/|y|^(n+2s) <= K <= Lam/|y|^(n+2s)`` and drift bound ``c_plus``."""

    lambda_lo: float
    lambda_hi: float
    s: float
    c_plus: float = 0.0

    def __post_init__(self):
        if not 0 < self.lambda_lo <= self.lambda_hi:
            raise ConfigurationError("kernel bounds must satisfy 0 < lambda <= Lambda")
        if not 0 < self.s < 1:
            raise ConfigurationError("order s must lie in (0, 1)")
        if self.c_plus < 0:
            raise ConfigurationError("drift bound c_plus must be >= 0")
        if self.c_plus > 0 and not self.s > 0.5:
            raise ConfigurationError(
                "a drift term (c_plus > 0) requires s > 1/2"
            )

    @classmethod
    def fractional(cls, s):
        """The single kernel ``1/|y|^(n+2s)``, no drift."""
        return cls(1.0, 1.0, s, 0.0)

    @property
    def is_linear(self):
        return self.lambda_lo == self.lambda_hi and self.c_plus == 0


@dataclass(frozen=True)
class Control:
    """One linear operator of the family: ``kappa * L_s + drift . grad``."""

    kappa: float
    drift: float = 0.0

    def check(self, k, rtol=1e-12):
        lo, hi = k.lambda_lo * (1 - rtol), k.lambda_hi * (1 + rtol)
        if not lo <= self.kappa <= hi:
            raise ConfigurationError(
                f"kappa={self.kappa} outside [{k.lambda_lo}, {k.lambda_hi}]"
            )
        if abs(self.drift) > k.c_plus * (1 + rtol):
            raise ConfigurationError(f"|drift|={abs(self.drift)} exceeds c_plus={k.c_plus}")


@dataclass(frozen=True)
class ControlFamily:
    """Finite inf-sup family, or one of the extremal envelopes.

    ``controls[a][b]`` is combined as ``inf_a sup_b``.  The conjugate of an
    inf-sup family is a sup-inf family over the same table; ``sup_inf``
    records which order applies.  ``tag`` is ``"plus"`` or ``"minus"`` for
    the extremal operators ``M+`` and ``M-``, in which case ``controls`` is
    empty.
    """

    controls: tuple = ()
    sup_inf: bool = False
    tag: str = None

    def __post_init__(self):
        if self.tag is not None:
            if self.tag not in ("plus", "minus"):
                raise ConfigurationError(f"unknown extremal tag {self.tag!r}")
            return
        table = tuple(
            tuple(c if isinstance(c, Control) else Control(*c) for c in inner)
            for inner in self.controls
        )
        if not table or any(len(inner) == 0 for inner in table):
            raise ConfigurationError("control family lists must be non-empty")
        object.__setattr__(self, "controls", table)

    @classmethod
    def extremal(cls, sign):
        return cls(tag=sign)

    @classmethod
    def linear(cls, kappa=1.0, drift=0.0):
        return cls(((Control(kappa, drift),),))

    @classmethod
    def sup_of(cls, controls):
        """``sup_b L_b`` over a flat list of controls."""
        return cls((tuple(controls),))

    @classmethod
    def inf_of(cls, controls):
        """``inf_a L_a`` over a flat list of controls."""
        return cls(tuple((c,) for c in controls))

    @property
    def is_extremal(self):
        return self.tag is not None

    @property
    def kind(self):
        """``"linear"``, ``"sup"``, ``"inf"`` or ``"inf_sup"``/``"sup_inf"``."""
        if self.tag == "plus":
            return "sup"
        if self.tag == "minus":
            return "inf"
        outer = len(self.controls)
        inner = max(len(c) for c in self.controls)
        if outer == 1 and inner == 1:
            return "linear"
        if outer == 1:
            return "inf" if self.sup_inf else "sup"
        if inner == 1:
            return "sup" if self.sup_inf else "inf"
        return "sup_inf" if self.sup_inf else "inf_sup"

    @property
    def is_one_sided(self):
        return self.kind in ("linear", "sup", "inf")

    def all_controls(self):
        return [c for inner in self.controls for c in inner]

    def check(self, k):
        for c in self.all_controls():
            c.check(k)

    def conjugate(self):
        """Family of ``u -> -I(-u)``: swaps inf and sup, and ``M+`` with ``M-``."""
        if self.tag is not None:
            return ControlFamily(tag="minus" if self.tag == "plus" else "plus")
        return ControlFamily(self.controls, not self.sup_inf)

    def max_drift(self, k):
        if self.tag is not None:
            return k.c_plus
        return max(abs(c.drift) for c in self.all_controls())

    def max_kappa(self, k):
        if self.tag is not None:
            return k.lambda_hi
        return max(c.kappa for c in self.all_controls())


EXTREMAL_PLUS = ControlFamily(tag="plus")
EXTREMAL_MINUS = ControlFamily(tag="minus")


def kernel_mass(a, b, s):
    """``int_a^b y**(-1-2s) dy`` for ``0 < a < b <= inf``."""
    b_term = 0.0 if np.isinf(b) else b ** (-2 * s)
    return (a ** (-2 * s) - b_term) / (2 * s)


@dataclass(frozen=True, eq=False)
class QuadratureTable:
    """Cell weights for the singular kernel on a 1-D grid.

    ``weights[j-1]`` is the kernel mass of the symmetric pair of cells
    ``+-[(j-1/2)h, (j+1/2)h]``; ``tail_mass`` is the mass of ``|y| > R``.
    """

    grid: object
    s: float
    offsets: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    tail_mass: float
    R: float

    @property
    def total_mass(self):
        """Mass of ``|y| > h/2``: the full discrete kernel weight."""
        return float(self.weights.sum() + self.tail_mass)

    @property
    def n_offsets(self):
        return len(self.offsets)


def build_quadrature(grid, k):
    """Quadrature table for ``grid`` and the order ``k.s``."""
    if grid.dim != 1:
        raise ConfigurationError("nonlocal quadrature is implemented for 1-D grids only")
    h, s = grid.h, k.s
    diam = grid.domain.diameter
    # smallest J with (J + 1/2) h >= diam, so x +- y is exterior for |y| > R
    J = int(np.ceil(diam / h - 0.5 - 1e-12))
    offsets = np.arange(1, J + 1)
    R = (J + 0.5) * h
    lo = (offsets - 0.5) * h
    hi = (offsets + 0.5) * h
    weights = 2.0 * (lo ** (-2 * s) - hi ** (-2 * s)) / (2 * s)
    tail = 2.0 * R ** (-2 * s) / (2 * s)
    offsets.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureTable(grid, s, offsets, weights, tail, R)


def _values(u):
    return u.values if isinstance(u, GridFunction) else np.asarray(u, dtype=float)


def second_difference(u, i, j):
    """``u(x_i + j h) + u(x_i - j h) - 2 u(x_i)`` with zero extension."""
    vals = _values(u)
    n = len(vals)

    def at(m):
        return vals[m] if 0 <= m < n else 0.0

    return at(i + j) + at(i - j) - 2.0 * vals[i]


def _delta_table(vals, q, rows=None):
    """Second differences ``delta[i, j-1]``, shape ``(N, J)`` (or one row per entry of ``rows``)."""
    n, J = len(vals), q.n_offsets
    padded = np.concatenate((np.zeros(J), vals, np.zeros(J)))
    windows = sliding_window_view(padded, J)
    rows = np.arange(n) if rows is None else np.asarray(rows)
    forward = windows[J + 1 + rows]
    backward = windows[rows][:, ::-1]
    return forward + backward - 2.0 * vals[rows, None]


def s_plus(t, k):
    t = np.asarray(t, dtype=float)
    return k.lambda_hi * np.maximum(t, 0.0) - k.lambda_lo * np.maximum(-t, 0.0)


def s_minus(t, k):
    t = np.asarray(t, dtype=float)
    return k.lambda_lo * np.maximum(t, 0.0) - k.lambda_hi * np.maximum(-t, 0.0)


def _linear_nonlocal(vals, q):
    """Discrete ``L u`` for the unit kernel ``1/|y|^(1+2s)``."""
    return _delta_table(vals, q) @ q.weights - 2.0 * vals * q.tail_mass


def eval_extremal(u, q, k, sign, nodes=None):
    """Extremal operator ``M+_K u`` (``sign="plus"``) or ``M-_K u``, without drift.

    With ``nodes`` (an index array) only those nodes are evaluated and a plain
    array is returned; rows are processed in blocks to bound memory.
    """
    vals = _values(u)
    S = {"plus": s_plus, "minus": s_minus}[sign]
    if nodes is None:
        out = S(_delta_table(vals, q), k) @ q.weights + S(-2.0 * vals, k) * q.tail_mass
        return GridFunction(q.grid, out)
    nodes = np.asarray(nodes, dtype=int)
    block = max(1, 2**24 // max(q.n_offsets, 1))
    out = np.empty(len(nodes))
    for start in range(0, len(nodes), block):
        rows = nodes[start:start + block]
        out[start:start + block] = (
            S(_delta_table(vals, q, rows), k) @ q.weights
            + S(-2.0 * vals[rows], k) * q.tail_mass
        )
    return out


def _one_sided(vals, h):
    right = np.append(vals[1:], 0.0)
    left = np.insert(vals[:-1], 0, 0.0)
    return (right - vals) / h, (vals - left) / h


def upwind_drift(u, c, h=None):
    """Upwind ``c * u'``: forward difference where ``c > 0``, backward where ``c < 0``.

    ``c`` may be a scalar or one value per node.
    """
    if isinstance(u, GridFunction):
        h = u.grid.h
        grid = u.grid
    else:
        grid = None
    vals = _values(u)
    dplus, dminus = _one_sided(vals, h)
    c = np.broadcast_to(np.asarray(c, dtype=float), vals.shape)
    out = np.maximum(c, 0.0) * dplus + np.minimum(c, 0.0) * dminus
    return GridFunction(grid, out) if grid is not None else out


def _check(fam, k):
    if fam.max_drift(k) > 0 and not k.s > 0.5:
        raise ConfigurationError("a drift term requires s > 1/2")
    if not fam.is_extremal:
        fam.check(k)


def _control_values(vals, fam, q):
    """Per-control linear values, as nested lists of arrays."""
    base = _linear_nonlocal(vals, q)
    dplus, dminus = _one_sided(vals, q.grid.h)
    return [
        [c.kappa * base + max(c.drift, 0.0) * dplus + min(c.drift, 0.0) * dminus for c in inner]
        for inner in fam.controls
    ]


def eval_operator(u, fam, q, k):
    """Evaluate the discrete operator ``I u`` at every node."""
    _check(fam, k)
    vals = _values(u)
    if fam.is_extremal:
        nonlocal_part = eval_extremal(vals, q, k, fam.tag).values
        dplus, dminus = _one_sided(vals, q.grid.h)
        if fam.tag == "plus":
            drift = k.c_plus * np.maximum(np.maximum(dplus, -dminus), 0.0)
        else:
            drift = -k.c_plus * np.maximum(np.maximum(-dplus, dminus), 0.0)
        return GridFunction(q.grid, nonlocal_part + drift)
    table = _control_values(vals, fam, q)
    inner_op, outer_op = (np.min, np.max) if fam.sup_inf else (np.max, np.min)
    inner = [inner_op(np.stack(row), axis=0) for row in table]
    return GridFunction(q.grid, outer_op(np.stack(inner), axis=0))


@dataclass(frozen=True, eq=False)
class FrozenOperator:
    """A linear operator obtained by fixing the controls node by node.

    ``kappa_pairs`` (shape ``(N, J)``) gives a kernel multiplier per node and
    offset; when it is ``None`` the scalar ``kappa`` is used for every offset.
    ``kappa_tail`` multiplies the exterior tail and ``drift`` is the upwinded
    drift velocity per node.
    """

    q: QuadratureTable
    kappa: np.ndarray
    kappa_tail: np.ndarray
    drift: np.ndarray
    kappa_pairs: np.ndarray = None

    def apply(self, vals):
        delta = _delta_table(vals, self.q)
        if self.kappa_pairs is None:
            nl = self.kappa * (delta @ self.q.weights)
        else:
            nl = (self.kappa_pairs * delta) @ self.q.weights
        nl = nl - 2.0 * self.kappa_tail * vals * self.q.tail_mass
        return nl + upwind_drift(vals, self.drift, self.q.grid.h)

    def matrix(self):
        """Dense matrix ``A`` with ``A @ u == apply(u)``."""
        q = self.q
        n = q.grid.size
        w = q.weights
        A = np.zeros((n, n))
        flat = A.reshape(-1)
        if self.kappa_pairs is None:
            kp = None
            diag = -2.0 * self.kappa * w.sum()
        else:
            kp = self.kappa_pairs
            diag = -2.0 * (kp @ w)
        for j in range(1, min(n, q.n_offsets + 1)):
            upper = flat[j : n * (n - j) : n + 1]  # entries (i, i + j)
            lower = flat[j * n :: n + 1]  # entries (i, i - j)
            if kp is None:
                upper[:] = self.kappa[: n - j] * w[j - 1]
                lower[:] = self.kappa[j:] * w[j - 1]
            else:
                upper[:] = kp[: n - j, j - 1] * w[j - 1]
                lower[:] = kp[j:, j - 1] * w[j - 1]
        diag = diag - 2.0 * self.kappa_tail * q.tail_mass
        h = q.grid.h
        cp = np.maximum(self.drift, 0.0) / h
        cm = np.minimum(self.drift, 0.0) / h
        diag = diag - cp + cm
        A[np.arange(n), np.arange(n)] = diag
        A[np.arange(n - 1), np.arange(1, n)] += cp[:-1]
        A[np.arange(1, n), np.arange(n - 1)] -= cm[1:]
        return A


def best_response(u, fam, q, k):
    """Controls attaining ``I u`` node by node, as a :class:`FrozenOperator`.

    Only one-sided families (pure sup, pure inf, linear, extremal) have a
    single optimal control per node.
    """
    _check(fam, k)
    vals = _values(u)
    n = len(vals)
    lam, Lam = k.lambda_lo, k.lambda_hi
    if fam.is_extremal:
        delta = _delta_table(vals, q)
        dplus, dminus = _one_sided(vals, q.grid.h)
        c = k.c_plus
        if fam.tag == "plus":
            pairs = np.where(delta >= 0, Lam, lam)
            tail = np.where(vals <= 0, Lam, lam)
            cand = np.stack([np.zeros(n), c * dplus, -c * dminus])
            choice = np.argmax(cand, axis=0)
        else:
            pairs = np.where(delta >= 0, lam, Lam)
            tail = np.where(vals <= 0, lam, Lam)
            cand = np.stack([np.zeros(n), c * dplus, -c * dminus])
            choice = np.argmin(cand, axis=0)
        drift = np.array([0.0, c, -c])[choice]
        return FrozenOperator(q, None, tail, drift, pairs)
    kind = fam.kind
    if kind not in ("linear", "sup", "inf"):
        raise ConfigurationError("best response needs a one-sided control family")
    controls = fam.all_controls()
    if kind == "linear":
        idx = np.zeros(n, dtype=int)
    else:
        vals_per = np.stack([v for row in _control_values(vals, fam, q) for v in row])
        idx = np.argmax(vals_per, axis=0) if kind == "sup" else np.argmin(vals_per, axis=0)
    kappa = np.array([controls[i].kappa for i in idx])
    drift = np.array([controls[i].drift for i in idx], dtype=float)
    return FrozenOperator(q, kappa, kappa, drift)


def scheme_diagonal_bound(fam, q, k, rho=0.0):
    """Upper bound for the total dependence ``D_i`` of the scheme on ``u_i``."""
    kappa = fam.max_kappa(k)
    drift = fam.max_drift(k)
    return 2.0 * kappa * q.total_mass + q.grid.dim * drift / q.grid.h + abs(rho)
