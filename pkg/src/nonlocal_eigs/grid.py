"""Uniform grids on intervals and boxes, with zero extension outside the domain.

Nodes are the strictly interior lattice points ``a + i*h``; the boundary and
everything beyond it carries the value 0, so a grid function is determined by
its interior values alone.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError

__all__ = [
    "Domain",
    "Grid",
    "GridFunction",
    "BarrierParams",
    "build_grid",
    "interval_grid",
    "distance_to_boundary",
    "barrier_xi",
]


@dataclass(frozen=True)
class Domain:
    """An open interval (``dim=1``) or rectangle (``dim=2``)."""

    bounds: tuple

    def __post_init__(self):
        bounds = tuple((float(a), float(b)) for a, b in self.bounds)
        if len(bounds) not in (1, 2):
            raise ConfigurationError("only dimensions 1 and 2 are supported")
        for a, b in bounds:
            if not a < b:
                raise ConfigurationError(f"empty axis interval ({a}, {b})")
        object.__setattr__(self, "bounds", bounds)

    @classmethod
    def interval(cls, a, b):
        return cls(((a, b),))

    @property
    def dim(self):
        return len(self.bounds)

    @property
    def widths(self):
        return np.array([b - a for a, b in self.bounds])

    @property
    def measure(self):
        """Lebesgue measure |Omega|."""
        return float(np.prod(self.widths))

    @property
    def diameter(self):
        return float(np.linalg.norm(self.widths))

    def contains(self, points):
        """Boolean mask of points lying in the open domain."""
        pts = np.atleast_2d(np.asarray(points, dtype=float).reshape(-1, self.dim))
        inside = np.ones(len(pts), dtype=bool)
        for d, (a, b) in enumerate(self.bounds):
            inside &= (pts[:, d] > a) & (pts[:, d] < b)
        return inside


@dataclass(frozen=True, eq=False)
class Grid:
    """Interior lattice of a :class:`Domain` with uniform spacing ``h``.

    ``nodes`` has shape ``(N, dim)`` in lexicographic order (last axis fastest).
    """

    domain: Domain
    h: float
    shape: tuple
    nodes: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.domain.dim

    @property
    def size(self):
        return len(self.nodes)

    @property
    def n_cells(self):
        """Number of lattice cells per axis (interior nodes + 1)."""
        return tuple(m + 1 for m in self.shape)

    @property
    def x(self):
        """Node coordinates of a 1-D grid as a flat array."""
        if self.dim != 1:
            raise ConfigurationError("x is only defined for 1-D grids")
        return self.nodes[:, 0]

    def axis_coords(self, d):
        a = self.domain.bounds[d][0]
        return a + self.h * np.arange(1, self.shape[d] + 1)

    def index_of(self, point, atol=1e-9):
        """Flat index of the node at ``point``; ``KeyError`` if there is none."""
        point = np.asarray(point, dtype=float).reshape(self.dim)
        idx = []
        for d, (a, _) in enumerate(self.domain.bounds):
            k = (point[d] - a) / self.h
            kr = int(round(k))
            if abs(k - kr) > atol / self.h or not 1 <= kr <= self.shape[d]:
                raise KeyError(f"{point} is not a grid node")
            idx.append(kr - 1)
        return int(np.ravel_multi_index(tuple(idx), self.shape))

    def function(self, values):
        return GridFunction(self, values)

    def zeros(self):
        return GridFunction(self, np.zeros(self.size))

    def sample(self, func):
        """Evaluate ``func`` at the nodes; 1-D grids pass a flat coordinate array."""
        pts = self.x if self.dim == 1 else self.nodes
        return GridFunction(self, np.asarray(func(pts), dtype=float).reshape(self.size))


class GridFunction:
    """Values at the interior nodes of a grid; identically 0 outside the domain."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values):
        values = np.array(values, dtype=float).reshape(-1)
        if values.shape != (grid.size,):
            raise ConfigurationError(
                f"expected {grid.size} node values, got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("grid function values must be finite")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    def __repr__(self):
        return f"GridFunction(size={self.grid.size}, sup={self.sup_norm():.6g})"

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return self.grid.size

    def _coerce(self, other):
        if isinstance(other, GridFunction):
            if other.grid is not self.grid:
                raise ConfigurationError("grid functions live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return GridFunction(self.grid, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - self._coerce(other))

    def __rsub__(self, other):
        return GridFunction(self.grid, self._coerce(other) - self.values)

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFunction(self.grid, self.values / self._coerce(other))

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def sup_norm(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def normalized(self):
        """Rescaled to unit sup-norm (positive scaling only)."""
        return self / self.sup_norm()

    def __call__(self, points):
        """Evaluate at arbitrary points: piecewise (multi)linear inside, 0 outside."""
        grid = self.grid
        pts = np.asarray(points, dtype=float)
        scalar = pts.ndim == 0 or (grid.dim == 2 and pts.ndim == 1)
        pts = pts.reshape(-1, grid.dim)
        inside = grid.domain.contains(pts)
        out = np.zeros(len(pts))
        if grid.dim == 1:
            (a, b), = grid.domain.bounds
            xs = np.concatenate(([a], grid.x, [b]))
            vs = np.concatenate(([0.0], self.values, [0.0]))
            out[inside] = np.interp(pts[inside, 0], xs, vs)
        else:
            from scipy.interpolate import RegularGridInterpolator

            axes = [
                np.concatenate(([a], grid.axis_coords(d), [b]))
                for d, (a, b) in enumerate(grid.domain.bounds)
            ]
            padded = np.pad(self.values.reshape(grid.shape), 1)
            interp = RegularGridInterpolator(axes, padded)
            out[inside] = interp(pts[inside])
        return float(out[0]) if scalar else out


def build_grid(domain, h):
    """Interior lattice of ``domain`` with spacing ``h``.

    ``h`` must divide every axis length (up to rounding) and leave at least
    three interior nodes per axis.
    """
    h = float(h)
    if not h > 0:
        raise ConfigurationError("grid spacing must be positive")
    shape = []
    for a, b in domain.bounds:
        cells = (b - a) / h
        n = int(round(cells))
        if abs(cells - n) > 1e-9 * max(1.0, cells):
            raise ConfigurationError(
                f"spacing {h} does not divide the axis length {b - a}"
            )
        if n - 1 < 3:
            raise ConfigurationError(
                f"spacing {h} leaves {max(n - 1, 0)} interior nodes; at least 3 required"
            )
        shape.append(n - 1)
    axes = [a + h * np.arange(1, m + 1) for (a, _), m in zip(domain.bounds, shape)]
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.reshape(-1) for m in mesh], axis=1)
    nodes.setflags(write=False)
    return Grid(domain, h, tuple(shape), nodes)


def interval_grid(a, b, n_cells):
    """Grid on ``(a, b)`` with ``n_cells`` cells (``n_cells - 1`` nodes)."""
    return build_grid(Domain.interval(a, b), (b - a) / n_cells)


def distance_to_boundary(grid):
    """Exact Euclidean distance from each node to the boundary of the box."""
    d = np.full(grid.size, np.inf)
    for k, (a, b) in enumerate(grid.domain.bounds):
        xk = grid.nodes[:, k]
        d = np.minimum(d, np.minimum(xk - a, b - xk))
    return GridFunction(grid, d)


@dataclass(frozen=True)
class BarrierParams:
    """Power-of-distance barrier: ``d**beta`` on the collar ``d < delta``, ``cap`` inside."""

    beta: float
    delta: float
    cap: float = None

    def __post_init__(self):
        if not 0 < self.beta < 2:
            raise ConfigurationError("barrier exponent must lie in (0, 2s)")
        if not self.delta > 0:
            raise ConfigurationError("collar width must be positive")
        if self.cap is None:
            object.__setattr__(self, "cap", self.delta ** self.beta)
        elif not np.isclose(self.cap, self.delta ** self.beta, rtol=1e-12):
            raise ConfigurationError("cap must equal delta**beta")


def barrier_xi(grid, p, s=None):
    """Barrier ``xi = min(d, delta)**beta`` at the nodes (0 outside the domain).

    Pass the kernel order ``s`` to enforce ``beta < 2s``.
    """
    if s is not None and not p.beta < 2 * s:
        raise ConfigurationError(f"barrier exponent {p.beta} must lie in (0, 2s={2 * s})")
    if not p.delta < 0.5 * float(np.min(grid.domain.widths)):
        raise ConfigurationError("collar width must be below half the domain width")
    d = distance_to_boundary(grid).values
    xi = np.where(d < p.delta, d ** p.beta, p.cap)
    return GridFunction(grid, xi)
