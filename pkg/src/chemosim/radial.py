"""Radial grids on a truncated ball and nonnegative cell-averaged density fields.

All fields are finite-volume cell averages over spherical shells in R^d,
so mass, Lp norms and moments are plain weighted sums and discrete mass
conservation is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatchError, InvalidParameterError, OutOfRangeError


def sphere_surface_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} in R^d, d >= 3."""
    _check_dimension(d)
    return 2.0 * math.pi ** (d / 2.0) / math.gamma(d / 2.0)


def newtonian_constant(d: int) -> float:
    """Constant kappa_d with -Delta(kappa_d |x|^{2-d}) = delta_0, i.e. 1/((d-2) sigma_{d-1})."""
    _check_dimension(d)
    return 1.0 / ((d - 2) * sphere_surface_area(d))


def _check_dimension(d) -> None:
    if not isinstance(d, (int, np.integer)) or d < 3:
        raise InvalidParameterError(f"dimension must be an integer >= 3, got {d!r}")


class RadialGrid:
    """Strictly increasing cell edges r_0=0 < ... < r_N = R with shell volumes.

    Derived arrays are precomputed once: `centers`, `widths`, `volumes`,
    `face_areas` (sigma r^{d-1} at every edge) and the second-moment weights
    sigma (r_{i+1}^{d+2} - r_i^{d+2})/(d+2).
    """

    def __init__(self, d: int, edges: np.ndarray):
        _check_dimension(d)
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2:
            raise InvalidParameterError("edges must be a 1-d array with at least two entries")
        if edges[0] != 0.0:
            raise InvalidParameterError("first edge must sit at r=0")
        if not np.all(np.diff(edges) > 0):
            raise InvalidParameterError("edges must be strictly increasing")
        self.d = int(d)
        self.sigma = sphere_surface_area(self.d)
        self.kappa = newtonian_constant(self.d)
        self.edges = edges
        self.centers = 0.5 * (edges[1:] + edges[:-1])
        self.widths = np.diff(edges)
        self.volumes = self.sigma * (edges[1:] ** d - edges[:-1] ** d) / d
        self.face_areas = self.sigma * edges ** (d - 1)
        self.second_moment_weights = (
            self.sigma * (edges[1:] ** (d + 2) - edges[:-1] ** (d + 2)) / (d + 2)
        )
        # spacing between adjacent cell centers, used for face gradients
        self.center_spacing = np.diff(self.centers)
        for a in (self.edges, self.centers, self.widths, self.volumes,
                  self.face_areas, self.second_moment_weights, self.center_spacing):
            a.setflags(write=False)

    @classmethod
    def uniform(cls, d: int, r_max: float, n_cells: int) -> "RadialGrid":
        if n_cells < 2 or r_max <= 0:
            raise InvalidParameterError("need n_cells >= 2 and r_max > 0")
        return cls(d, np.linspace(0.0, float(r_max), n_cells + 1))

    @classmethod
    def graded(cls, d: int, r_max: float, n_cells: int, ratio: float) -> "RadialGrid":
        """Geometrically graded cells, finest at the origin (ratio > 1 widens outward)."""
        if ratio <= 0:
            raise InvalidParameterError("grading ratio must be positive")
        if abs(ratio - 1.0) < 1e-12:
            return cls.uniform(d, r_max, n_cells)
        w0 = r_max * (ratio - 1.0) / (ratio ** n_cells - 1.0)
        widths = w0 * ratio ** np.arange(n_cells)
        edges = np.concatenate(([0.0], np.cumsum(widths)))
        edges[-1] = r_max
        return cls(d, edges)

    @property
    def r_max(self) -> float:
        return float(self.edges[-1])

    @property
    def n_cells(self) -> int:
        return len(self.volumes)

    def __eq__(self, other):
        return (
            isinstance(other, RadialGrid)
            and self.d == other.d
            and self.edges.shape == other.edges.shape
            and bool(np.all(self.edges == other.edges))
        )

    def __repr__(self):
        return f"RadialGrid(d={self.d}, R={self.r_max}, N={self.n_cells})"


class RadialField:
    """Nonnegative cell-averaged density on a RadialGrid, immutable after construction."""

    def __init__(self, grid: RadialGrid, values: np.ndarray):
        values = np.array(values, dtype=float)
        if values.shape != (grid.n_cells,):
            raise InvalidParameterError(
                f"values shape {values.shape} does not match grid with {grid.n_cells} cells"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("field values must be finite")
        if np.any(values < 0.0):
            worst = int(np.argmin(values))
            raise InvalidParameterError(
                f"field values must be nonnegative, cell {worst} holds {values[worst]:.3e}"
            )
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def zeros(cls, grid: RadialGrid) -> "RadialField":
        return cls(grid, np.zeros(grid.n_cells))

    def with_values(self, values: np.ndarray) -> "RadialField":
        return RadialField(self.grid, values)

    def __repr__(self):
        return f"RadialField({self.grid!r}, mass={mass(self):.6g})"


@dataclass(frozen=True)
class SystemState:
    """The evolving pair (u, w) at time t on a shared grid."""

    u: RadialField
    w: RadialField
    t: float

    def __post_init__(self):
        if self.u.grid != self.w.grid:
            raise GridMismatchError("u and w must live on the same grid")
        if self.t < 0.0:
            raise InvalidParameterError(f"time must be nonnegative, got {self.t}")

    @property
    def grid(self) -> RadialGrid:
        return self.u.grid


def mass(f: RadialField) -> float:
    """Total mass, the integral of f over the truncated ball."""
    return float(f.values @ f.grid.volumes)


def lp_norm(f: RadialField, p: float) -> float:
    """Lp norm of the piecewise-constant field; p = inf takes the cell maximum."""
    if p == np.inf or p == math.inf:
        return float(np.max(f.values, initial=0.0))
    if p < 1:
        raise OutOfRangeError(f"Lp norm requires p >= 1, got {p}")
    if p == 1:
        return mass(f)
    return float((f.values ** p) @ f.grid.volumes) ** (1.0 / p)


def second_moment(f: RadialField) -> float:
    """Integral of |x|^2 f(x), evaluated exactly for cell averages."""
    return float(f.values @ f.grid.second_moment_weights)


def rescale(state: SystemState, lam: float, params) -> SystemState:
    """Apply the two-species scaling family to a state snapshot.

    The grid is rescaled rather than resampled, so the mass factors of the
    scaling family hold to round-off. The returned time is the u-equation
    clock t/lam^{m1}; for lam != 1 and m1 != m2 the two species' rescaled
    clocks agree only at t = 0.
    """
    if lam <= 0.0:
        raise InvalidParameterError(f"scale factor must be positive, got {lam}")
    beta = (params.m1 + params.m2 - params.m1 * params.m2) / 2.0
    new_grid = RadialGrid(state.grid.d, state.grid.edges / lam ** beta)
    u_new = RadialField(new_grid, state.u.values * lam ** params.m2)
    w_new = RadialField(new_grid, state.w.values * lam ** params.m1)
    return SystemState(u=u_new, w=w_new, t=state.t / lam ** params.m1)


def write_field_csv(f: RadialField, path) -> None:
    """Serialize as two-column CSV (cell center radius, value) with a grid header."""
    g = f.grid
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# d={g.d} R={g.r_max!r} N={g.n_cells}\n")
        for r, v in zip(g.centers, f.values):
            fh.write(f"{float(r)!r},{float(v)!r}\n")


def read_field_csv(path, grid: RadialGrid | None = None) -> RadialField:
    """Read the CSV format of `write_field_csv`.

    When `grid` is given the file must describe the same uniform layout;
    otherwise a uniform grid is reconstructed from the header.
    """
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("#"):
            raise InvalidParameterError(f"{path}: missing '# d=.. R=.. N=..' header")
        meta = dict(tok.split("=") for tok in header.lstrip("# ").split())
        d, r_max, n = int(meta["d"]), float(meta["R"]), int(meta["N"])
        rows = [line.strip().split(",") for line in fh if line.strip()]
    if len(rows) != n:
        raise InvalidParameterError(f"{path}: expected {n} rows, found {len(rows)}")
    values = np.array([float(v) for _, v in rows])
    if grid is None:
        grid = RadialGrid.uniform(d, r_max, n)
    else:
        if grid.d != d or grid.n_cells != n or not math.isclose(grid.r_max, r_max):
            raise GridMismatchError(
                f"{path}: header (d={d}, R={r_max}, N={n}) does not match target grid {grid!r}"
            )
    return RadialField(grid, values)
