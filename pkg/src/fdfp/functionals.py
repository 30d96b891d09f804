"""Entropy and energy functionals, dissipation, and the moment-bound polynomials.

The free energy H = S + E with mixing entropy density
s(r) = (1-r)log(1-r) + r log(r) is the Lyapunov functional of the flow.
The discrete dissipation below uses the same interface mobility as the
finite-volume flux, so the semi-discrete chain rule dH/dt = -D is an
algebraic identity rather than an approximation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.special import expit, xlogy

from .equilibrium import beta_of_mass, equilibrium_state
from .grid import DistributionState, Grid, integrate, l1_distance, moment, unit_ball_volume

DEFAULT_CLAMP_DELTA = 1e-14


def entropy_density(r):
    """Mixing entropy density s(r) = (1-r)log(1-r) + r log r, <= 0 on [0, 1].

    The endpoint values are the analytic limits s(0) = s(1) = 0.
    """
    arr = np.asarray(r, dtype=float)
    if np.any(arr < 0) or np.any(arr > 1):
        raise ValueError("entropy density is defined on [0, 1]")
    out = xlogy(arr, arr) + xlogy(1 - arr, 1 - arr)
    return float(out) if np.isscalar(r) else out


def entropy(state: DistributionState) -> float:
    """S = sum qweight * s(f)."""
    return float(np.dot(state.grid.qweight, entropy_density(np.clip(state.values, 0.0, 1.0))))


def kinetic_energy(state: DistributionState) -> float:
    """E = (1/2) * second moment."""
    return 0.5 * moment(state, 2)


def free_energy(state: DistributionState) -> float:
    """H = S + E."""
    return entropy(state) + kinetic_energy(state)


def potential(values: np.ndarray, grid: Grid, clamp_delta: float = DEFAULT_CLAMP_DELTA) -> np.ndarray:
    """Discrete driving potential |v|^2/2 + log(f/(1-f)) with f clamped to
    [delta, 1-delta] so the log stays finite; the state itself is never clamped."""
    f = np.clip(values, clamp_delta, 1.0 - clamp_delta)
    return grid.speed ** 2 / 2 + np.log(f / (1.0 - f))


def upwind_mobility(values: np.ndarray, xi: np.ndarray) -> np.ndarray:
    """Cross-upwind interface mobility f_donor * (1 - f_receiver).

    The donor is the higher-potential cell.  Unclamped values are used, so
    the mobility vanishes exactly for an empty donor or a full receiver,
    which is what keeps the scheme inside [0, 1].
    """
    left, right = values[:-1], values[1:]
    dxi = xi[1:] - xi[:-1]
    return np.where(dxi < 0, left * (1.0 - right), right * (1.0 - left))


def dissipation(state: DistributionState, clamp_delta: float = DEFAULT_CLAMP_DELTA) -> float:
    """Discrete entropy dissipation D >= 0.

    D = sum over interior interfaces of (h * area) * mobility * (dxi/h)^2,
    matching the finite-volume flux so that dH/dt = -D semi-discretely.
    """
    grid = state.grid
    xi = potential(state.values, grid, clamp_delta)
    mob = upwind_mobility(state.values, xi)
    dxi = np.diff(xi)
    iw = grid.width * grid.interface_area[1:-1]
    return float(np.dot(iw, mob * (dxi / grid.width) ** 2))


@lru_cache(maxsize=512)
def equilibrium_free_energy(mass: float, dim: int) -> float:
    """H of the equilibrium with the given mass, by converged radial quadrature.

    Computed independently of any solver grid so relative-entropy decay is
    measured against a grid-free reference.
    """
    spec = beta_of_mass(mass, dim)
    log_beta = math.log(spec.beta)
    coef = dim * unit_ball_volume(dim)
    r_max = math.sqrt(2 * max(0.0, -log_beta)) + 15.0 + dim

    def integrand(r: float) -> float:
        f = expit(-(r * r / 2 + log_beta))
        return r ** (dim - 1) * (r * r / 2 * f + xlogy(f, f) + xlogy(1 - f, 1 - f))

    value, abserr = quad(integrand, 0.0, r_max, epsabs=1e-14, epsrel=1e-11, limit=200)
    if abserr > max(1e-9 * abs(value), 1e-12):
        raise RuntimeError(f"free-energy quadrature did not converge (error {abserr:.2e})")
    return coef * value


def relative_entropy(state: DistributionState, mass: float) -> float:
    """H(state) - H(F_mass), with the reference from quadrature.

    Nonnegative for same-mass states up to discretization error.
    """
    if not mass > 0:
        raise ValueError("mass must be positive")
    actual = integrate(state)
    if abs(actual - mass) > 0.01 * mass:
        warnings.warn(
            f"state mass {actual:.6g} differs from reference mass {mass:.6g} by more than 1%",
            stacklevel=2,
        )
    return free_energy(state) - equilibrium_free_energy(float(mass), state.grid.dim)


def entropy_control_constant(eps: float, dim: int) -> float:
    """C_eps = integral of exp(-eps |v|^2 / 2) = (2 pi / eps)^(dim/2)."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return (2 * math.pi / eps) ** (dim / 2)


@dataclass(frozen=True)
class EntropyControlReport:
    eps: float
    max_pointwise_violation: float
    neg_entropy: float            # -S >= 0
    integrated_bound: float       # eps*E + C_eps
    pointwise_holds: bool
    integrated_holds: bool


def check_entropy_control(state: DistributionState, eps: float,
                          tol: float = 1e-12) -> EntropyControlReport:
    """Verify -s(f(v)) <= (eps |v|^2/2) f(v) + exp(-eps |v|^2/2) at every node
    and the integrated form 0 <= -S <= eps E + C_eps."""
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    f = np.clip(state.values, 0.0, 1.0)
    half_sq = state.grid.speed ** 2 / 2
    lhs = -(xlogy(f, f) + xlogy(1 - f, 1 - f))
    rhs = eps * half_sq * f + np.exp(-eps * half_sq)
    max_violation = float(np.max(lhs - rhs))
    neg_s = -entropy(state)
    bound = eps * kinetic_energy(state) + entropy_control_constant(eps, state.grid.dim)
    return EntropyControlReport(
        eps=eps,
        max_pointwise_violation=max_violation,
        neg_entropy=neg_s,
        integrated_bound=bound,
        pointwise_holds=max_violation <= tol,
        integrated_holds=(neg_s >= -tol) and (neg_s <= bound + tol),
    )


@dataclass(frozen=True)
class CsiszarKullbackReport:
    lhs: float   # ||f - F_M||_1^2
    rhs: float   # 2 M (H(f) - H(F_M))
    holds: bool


def csiszar_kullback_check(state: DistributionState, mass: float) -> CsiszarKullbackReport:
    """Check ||f - F_M||_1^2 <= 2 M (H(f) - H(F_M)) on the state's grid.

    Both sides are evaluated discretely against the sampled equilibrium so
    the inequality is exact at the discrete minimizer.
    """
    eq = equilibrium_state(mass, state.grid)
    lhs = l1_distance(state, eq) ** 2
    rhs = 2 * mass * (free_energy(state) - free_energy(eq))
    return CsiszarKullbackReport(lhs=lhs, rhs=rhs, holds=lhs <= rhs * (1 + 1e-6) + 1e-10)


@dataclass(frozen=True)
class MomentBoundPolynomial:
    """Upper bound P(t) for the moment of order 2*gamma, as ascending coefficients."""

    gamma: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if not np.all(np.isfinite(c)):
            raise ValueError("polynomial coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    def __call__(self, t):
        return np.polynomial.polynomial.polyval(t, self.coeffs)


def moment_bound_polynomial(gamma: int, initial_moments, mass: float, dim: int) -> MomentBoundPolynomial:
    """Polynomial bound for the 2*gamma moment along the flow.

    P_1(t) = m2(0) + 2*dim*mass*t, and each further order integrates the
    previous bound scaled by 2*gamma*(2*(gamma-1) + dim).
    `initial_moments[k]` must hold the 2k-moment of the initial state for
    k = 0..gamma.
    """
    if gamma != int(gamma) or gamma < 1:
        raise ValueError("gamma must be an integer >= 1")
    gamma = int(gamma)
    moments = [float(m) for m in initial_moments]
    if len(moments) < gamma + 1:
        raise ValueError(f"need initial moments up to order {2 * gamma} (got {len(moments)} entries)")
    coeffs = np.array([moments[1], 2.0 * dim * mass])  # P_1
    for g in range(2, gamma + 1):
        factor = 2.0 * g * (2.0 * (g - 1) + dim)
        integrated = np.concatenate(([0.0], coeffs / np.arange(1, coeffs.size + 1)))
        coeffs = factor * integrated
        coeffs[0] = moments[g]
    return MomentBoundPolynomial(gamma=gamma, coeffs=coeffs)


@dataclass(frozen=True)
class DiagnosticsRow:
    """Per-time diagnostics of a trajectory."""

    time: float
    mass: float
    energy: float
    entropy: float
    free_energy: float
    dissipation: float
    rel_entropy: float
    l1_to_eq: float

    def __post_init__(self):
        if self.free_energy != self.entropy + self.energy:
            raise ValueError("free_energy must equal entropy + energy exactly")
        if self.dissipation < -1e-12:
            raise ValueError("dissipation must be nonnegative up to roundoff")


def compute_diagnostics(state: DistributionState, time: float,
                        eq_state: DistributionState, eq_free_energy: float,
                        clamp_delta: float = DEFAULT_CLAMP_DELTA) -> DiagnosticsRow:
    """Assemble one diagnostics row against a fixed equilibrium reference."""
    s = entropy(state)
    e = kinetic_energy(state)
    return DiagnosticsRow(
        time=time,
        mass=integrate(state),
        energy=e,
        entropy=s,
        free_energy=s + e,
        dissipation=dissipation(state, clamp_delta),
        rel_entropy=(s + e) - eq_free_energy,
        l1_to_eq=l1_distance(state, eq_state),
    )
