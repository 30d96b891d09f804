"""Velocity-space meshes, quadrature and the discrete distribution state.

Two geometries are supported: a 1-D Cartesian box [-R, R] and the radial
reduction of an N-dimensional rotationally symmetric problem on [0, R],
where the quadrature weights carry the N omega_N r^(N-1) dr measure.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

CARTESIAN_1D = "cartesian1d"
RADIAL_ND = "radialNd"

GEOMETRIES = (CARTESIAN_1D, RADIAL_ND)

# Slack admitted by DistributionState around [0, 1].  The finite-volume
# solver keeps states exactly inside; the integral-equation solver only
# bounds the violation (see solver_duhamel), so the constructor tolerates
# a small overshoot instead of hard-failing.
BOUNDS_TOL = 1e-5


def unit_ball_volume(dim: int) -> float:
    """Volume of the unit ball in `dim` dimensions."""
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1)


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform cell-centered velocity mesh with quadrature weights.

    `qweight[i]` is the measure of cell i, so that sum(qweight * f) is the
    discrete integral of f over the (truncated) velocity domain.
    """

    geometry: str
    dim: int
    extent: float
    cells: int
    node: np.ndarray      # cell centers, length `cells`
    width: float          # uniform cell width h
    qweight: np.ndarray   # cell measures, length `cells`

    def matches(self, other: "Grid") -> bool:
        return (
            self.geometry == other.geometry
            and self.dim == other.dim
            and self.extent == other.extent
            and self.cells == other.cells
        )

    @cached_property
    def edges(self) -> np.ndarray:
        """Cell edge coordinates, length cells + 1."""
        lo = -self.extent if self.geometry == CARTESIAN_1D else 0.0
        return lo + self.width * np.arange(self.cells + 1)

    @cached_property
    def speed(self) -> np.ndarray:
        """|v| at cell centers (equals the radial coordinate on radial grids)."""
        return np.abs(self.node)

    @cached_property
    def interface_area(self) -> np.ndarray:
        """Area factor of each cell interface, length cells + 1.

        Cartesian interfaces have unit area; radial interfaces carry
        N omega_N r^(N-1), which vanishes at r = 0 for N >= 2.
        """
        if self.geometry == CARTESIAN_1D:
            return np.ones(self.cells + 1)
        coef = self.dim * unit_ball_volume(self.dim)
        return coef * self.edges ** (self.dim - 1)


@dataclass(frozen=True, eq=False)
class DistributionState:
    """Cell averages of a density f constrained to the invariant region [0, 1]."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.cells,):
            raise ValueError(
                f"values shape {vals.shape} does not match grid with {self.grid.cells} cells"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("state values must be finite")
        if vals.min() < -BOUNDS_TOL or vals.max() > 1.0 + BOUNDS_TOL:
            raise ValueError(
                f"state values outside [0, 1]: min={vals.min():.3g}, max={vals.max():.3g}"
            )
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def make_grid(geometry: str, dim: int, extent: float, cells: int) -> Grid:
    """Build a uniform velocity grid.

    cartesian1d covers [-extent, extent] (dim must be 1); radialNd covers
    [0, extent] with weights N omega_N r^(N-1) h.
    """
    if geometry not in GEOMETRIES:
        raise ValueError(f"unknown geometry {geometry!r}; expected one of {GEOMETRIES}")
    if not extent > 0:
        raise ValueError("extent must be positive")
    if cells < 8:
        raise ValueError("at least 8 cells required")
    dim = int(dim)
    if geometry == CARTESIAN_1D and dim != 1:
        raise ValueError("cartesian1d requires dim = 1")
    if dim < 1:
        raise ValueError("dim must be >= 1")
    if extent < 4:
        warnings.warn(
            "extent < 4 truncates the Gaussian-decaying tails noticeably; "
            "extent >= 4 (typically 8) is recommended",
            stacklevel=2,
        )
    if geometry == CARTESIAN_1D:
        h = 2 * extent / cells
        node = -extent + (np.arange(cells) + 0.5) * h
        qweight = np.full(cells, h)
    else:
        h = extent / cells
        node = (np.arange(cells) + 0.5) * h
        qweight = dim * unit_ball_volume(dim) * node ** (dim - 1) * h
    node.setflags(write=False)
    qweight.setflags(write=False)
    return Grid(geometry=geometry, dim=dim, extent=float(extent), cells=cells,
                node=node, width=h, qweight=qweight)


def integrate(state: DistributionState) -> float:
    """Discrete mass: sum of qweight * values."""
    return float(np.dot(state.grid.qweight, state.values))


def moment(state: DistributionState, order: int) -> float:
    """Discrete moment sum(qweight * |v|^order * f) for even order >= 0."""
    if order != int(order) or order < 0 or int(order) % 2 != 0:
        raise ValueError(f"moment order must be an even integer >= 0, got {order!r}")
    order = int(order)
    if order == 0:
        return integrate(state)
    return float(np.dot(state.grid.qweight, state.grid.speed ** order * state.values))


def l1_distance(a: DistributionState, b: DistributionState) -> float:
    """Weighted L1 distance between two states on the same grid."""
    if not a.grid.matches(b.grid):
        raise ValueError("states live on different grids")
    return float(np.dot(a.grid.qweight, np.abs(a.values - b.values)))


def boundary_density(state: DistributionState) -> float:
    """Largest |f| in the outermost cells; a proxy for truncation error."""
    if state.grid.geometry == CARTESIAN_1D:
        return float(max(abs(state.values[0]), abs(state.values[-1])))
    return float(abs(state.values[-1]))
