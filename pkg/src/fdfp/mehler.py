"""Fundamental solution of the linear Fokker-Planck equation and its operators.

The kernel is a Gaussian in the rescaled variable a(t)^(-1/2) v - w with
a(t) = exp(-2t) and nu(t) = exp(2t) - 1; applied to a density it realizes
the linear semigroup (an Ornstein-Uhlenbeck/Mehler kernel).  Two families
of discrete operators are provided:

* midpoint-quadrature `apply_kernel` / `apply_kernel_gradient`, valid once
  nu(t)^(1/2) is resolvable on the mesh (guarded below by T_MIN), and
* cell-edge integrated variants that integrate the kernel exactly against
  the piecewise-constant reconstruction, uniformly accurate down to t -> 0;
  these are what the integral-equation solver uses inside its singular
  time quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .equilibrium import equilibrium_state
from .grid import CARTESIAN_1D, DistributionState, Grid, integrate

T_MIN = 1e-6  # below this the midpoint quadrature cannot resolve the kernel


@dataclass(frozen=True)
class MehlerFactors:
    """Time-dependent scaling factors of the kernel."""

    t: float
    a: float
    nu: float

    @classmethod
    def from_time(cls, t: float) -> "MehlerFactors":
        if not t > 0:
            raise ValueError("kernel time must be positive")
        return cls(t=float(t), a=math.exp(-2 * t), nu=math.expm1(2 * t))


def kernel_eval(t: float, v, w, dim: int = 1):
    """Pointwise kernel value; integrates to 1 over v for fixed w.

    For dim = 1, v and w are scalars or arrays of coordinates.  For dim > 1
    they must carry the coordinates along the last axis.
    """
    fac = MehlerFactors.from_time(t)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    scale = fac.a ** -0.5
    if dim == 1:
        sq = (scale * v - w) ** 2
    else:
        diff = scale * v - w
        if diff.shape[-1] != dim:
            raise ValueError(f"expected coordinates of dimension {dim} on the last axis")
        sq = np.sum(diff * diff, axis=-1)
    norm = fac.a ** (-dim / 2) * (2 * math.pi * fac.nu) ** (-dim / 2)
    out = norm * np.exp(-sq / (2 * fac.nu))
    return float(out) if out.ndim == 0 else out


def _require_cartesian(grid: Grid):
    if grid.geometry != CARTESIAN_1D:
        raise ValueError("kernel operators require a cartesian1d grid")


def _apply_kernel_raw(t: float, grid: Grid, values: np.ndarray) -> np.ndarray:
    """Midpoint-quadrature kernel application on plain arrays.

    The linear semigroup does not preserve the [0, 1] region (only
    nonnegativity), so solver internals use this unwrapped form.
    """
    _require_cartesian(grid)
    if t < T_MIN:
        raise ValueError(f"apply_kernel needs t >= {T_MIN}; use the identity for smaller t")
    v = grid.node
    K = kernel_eval(t, v[:, None], v[None, :], dim=1)
    return K @ (grid.qweight * np.asarray(values, dtype=float))


def apply_kernel(t: float, g: DistributionState) -> DistributionState:
    """Linear semigroup applied to g by midpoint quadrature in w.

    Refuses t < T_MIN, where the kernel is narrower than the mesh; callers
    should use the identity there instead.
    """
    return DistributionState(g.grid, _apply_kernel_raw(t, g.grid, g.values))


def apply_kernel_gradient(t: float, g, grid: Grid | None = None) -> np.ndarray:
    """Gradient (in v) of the kernel applied to g, by midpoint quadrature.

    Accepts a DistributionState, or a plain value array together with its
    grid (the integrand of the mild equation is not a density).
    """
    if isinstance(g, DistributionState):
        grid, values = g.grid, g.values
    else:
        if grid is None:
            raise ValueError("grid required when g is a plain array")
        values = np.asarray(g, dtype=float)
    _require_cartesian(grid)
    if t < T_MIN:
        raise ValueError(f"apply_kernel_gradient needs t >= {T_MIN}")
    fac = MehlerFactors.from_time(t)
    scale = fac.a ** -0.5
    v = grid.node
    diff = scale * v[:, None] - v[None, :]
    K = kernel_eval(t, v[:, None], v[None, :], dim=1)
    G = K * (-scale * diff / fac.nu)
    return G @ (grid.qweight * values)


def _gaussian_cdf_factor(x: np.ndarray, nu: float) -> np.ndarray:
    return 0.5 * (1.0 + erf(x / math.sqrt(2 * nu)))


def apply_kernel_edges(t: float, grid: Grid, values: np.ndarray) -> np.ndarray:
    """Kernel applied to the piecewise-constant reconstruction, exactly.

    The w-integral over each cell is an erf difference at the cell edges,
    so the result stays accurate for arbitrarily small t.
    """
    _require_cartesian(grid)
    fac = MehlerFactors.from_time(t)
    c = (fac.a ** -0.5) * grid.node
    P = _gaussian_cdf_factor(c[:, None] - grid.edges[None, :], fac.nu)
    return (fac.a ** -0.5) * ((P[:, :-1] - P[:, 1:]) @ np.asarray(values, dtype=float))


def apply_kernel_gradient_edges(t: float, grid: Grid, values: np.ndarray) -> np.ndarray:
    """v-gradient of the kernel against the piecewise-constant reconstruction.

    The cell integrals reduce to Gaussian density differences at the cell
    edges; no small-t guard is needed.
    """
    _require_cartesian(grid)
    fac = MehlerFactors.from_time(t)
    c = (fac.a ** -0.5) * grid.node
    x = c[:, None] - grid.edges[None, :]
    P = np.exp(-x * x / (2 * fac.nu)) / math.sqrt(2 * math.pi * fac.nu)
    return (1.0 / fac.a) * ((P[:, :-1] - P[:, 1:]) @ np.asarray(values, dtype=float))


def weighted_norm(g, p: float, m: float, grid: Grid | None = None) -> float:
    """Discrete (1 + |v|^m)-weighted p-norm; p = inf is the weighted max.

    m = 0 is the plain (unweighted) norm.
    """
    if isinstance(g, DistributionState):
        grid, values = g.grid, g.values
    else:
        if grid is None:
            raise ValueError("grid required when g is a plain array")
        values = np.asarray(g, dtype=float)
    if p < 1:
        raise ValueError("p must be >= 1")
    if m < 0:
        raise ValueError("m must be >= 0")
    weight = 1.0 if m == 0 else 1.0 + grid.speed ** m
    weighted = weight * np.abs(values)
    if math.isinf(p):
        return float(weighted.max())
    return float(np.dot(grid.qweight, weighted ** p) ** (1.0 / p))


@dataclass(frozen=True)
class SmoothingBoundSpec:
    """Exponent/weight combination for one smoothing-bound measurement."""

    p: float
    q: float
    m: float
    alpha_order: int
    dim: int

    def __post_init__(self):
        if not 1 <= self.q <= self.p:
            raise ValueError("need 1 <= q <= p")
        if self.m < 0:
            raise ValueError("m must be >= 0")
        if self.alpha_order not in (0, 1):
            raise ValueError("only derivative orders 0 and 1 are supported")


def smoothing_bound_ratio(spec: SmoothingBoundSpec, t: float, g: DistributionState) -> float:
    """Measured smoothing-bound ratio.

    Returns ||D^alpha K(t) g||_{p,m} * nu^{(N/2)(1/q - 1/p) + |alpha|/2}
    * exp(-(N/p' + |alpha|) t) / ||g||_{q,m}; the claim is that this stays
    bounded by a constant independent of t.
    """
    fac = MehlerFactors.from_time(t)
    den = weighted_norm(g, spec.q, spec.m)
    if den == 0.0:
        raise ValueError("bound ratio undefined for the zero state")
    if spec.alpha_order == 0:
        out = apply_kernel(t, g)
        num = weighted_norm(out, spec.p, spec.m)
    else:
        out = apply_kernel_gradient(t, g)
        num = weighted_norm(out, spec.p, spec.m, grid=g.grid)
    inv_p = 0.0 if math.isinf(spec.p) else 1.0 / spec.p
    inv_q = 0.0 if math.isinf(spec.q) else 1.0 / spec.q
    inv_p_conj = 1.0 - inv_p
    exponent = fac.nu ** (spec.dim / 2 * (inv_q - inv_p) + spec.alpha_order / 2)
    damping = math.exp(-(spec.dim * inv_p_conj + spec.alpha_order) * t)
    return num * exponent * damping / den


def kernel_mass(t: float, g: DistributionState) -> float:
    """Mass after one kernel application (should match the input mass)."""
    return integrate(apply_kernel(t, g))


def bound_test_family(grid: Grid, mass: float = 1.5162560428865945) -> list[tuple[str, DistributionState]]:
    """Fixed family probing the smoothing bounds: a Gaussian, a narrow
    (delta-like) indicator that saturates the L1 -> Lp rates, and an
    equilibrium profile."""
    gauss = DistributionState(grid, 0.8 * np.exp(-grid.node ** 2 / 2))
    mid = grid.cells // 2
    vals = np.zeros(grid.cells)
    vals[max(mid - 1, 0):mid + 2] = 0.8
    narrow = DistributionState(grid, vals)
    return [("gaussian", gauss), ("narrow_indicator", narrow),
            ("equilibrium", equilibrium_state(mass, grid))]


@dataclass(frozen=True)
class BoundSweepCase:
    spec: SmoothingBoundSpec
    envelope: tuple[float, ...]   # max ratio over the family, per sweep time
    max_ratio: float
    spread: float                 # max/min of the envelope over the sweep


def kernel_bound_sweep(grid: Grid, specs, times) -> list[BoundSweepCase]:
    """Measure the rescaled smoothing ratios over a t-sweep.

    For each exponent combination the reported quantity is the envelope of
    the measured ratios over the test family (per-function ratios decay to
    zero at t -> 0 whenever that function cannot saturate the rate, which
    says nothing about the bound's constant)."""
    family = bound_test_family(grid)
    out = []
    for spec in specs:
        envelope = tuple(
            max(smoothing_bound_ratio(spec, t, g) for _, g in family) for t in times
        )
        out.append(BoundSweepCase(
            spec=spec,
            envelope=envelope,
            max_ratio=max(envelope),
            spread=max(envelope) / min(envelope),
        ))
    return out


def standard_bound_specs(dim: int = 1) -> list[SmoothingBoundSpec]:
    """The {1, 2, inf}^2 x {0, 1} x {0, 1} test matrix with q <= p."""
    specs = []
    for p in (1.0, 2.0, math.inf):
        for q in (1.0, 2.0, math.inf):
            if q > p:
                continue
            for m in (0.0, 1.0):
                for alpha in (0, 1):
                    specs.append(SmoothingBoundSpec(p=p, q=q, m=m, alpha_order=alpha, dim=dim))
    return specs
