import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fdfp
from fdfp.mehler import (
    SmoothingBoundSpec,
    MehlerFactors,
    smoothing_bound_ratio,
    apply_kernel,
    apply_kernel_edges,
    apply_kernel_gradient,
    apply_kernel_gradient_edges,
    kernel_bound_sweep,
    kernel_eval,
    standard_bound_specs,
    weighted_norm,
)

from conftest import MASS_BETA1_N1


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-6, 20.0))
def test_factors_identity(t):
    fac = MehlerFactors.from_time(t)
    assert 0 < fac.a < 1 and fac.nu > 0
    assert fac.a * (1 + fac.nu) == pytest.approx(1.0, rel=1e-12)


def test_factors_validation():
    with pytest.raises(ValueError):
        MehlerFactors.from_time(0.0)
    with pytest.raises(ValueError):
        kernel_eval(-1.0, 0.0, 0.0)


def test_kernel_value_large_time():
    # at large t the kernel at the origin approaches the Maxwellian peak
    assert kernel_eval(10.0, 0.0, 0.0, dim=1) == pytest.approx(
        (2 * math.pi) ** -0.5, abs=1e-9)


def test_kernel_integrates_to_one_over_v(grid512):
    for t in (0.1, 1.0):
        for w in (0.0, 1.5, -2.0):
            vals = kernel_eval(t, grid512.node, w, dim=1)
            assert float(np.dot(grid512.qweight, vals)) == pytest.approx(1.0, abs=1e-8)


def test_maxwellian_is_fixed_point(grid256):
    maxw = fdfp.DistributionState(grid256, (2 * math.pi) ** -0.5 * np.exp(-grid256.node ** 2 / 2))
    out = apply_kernel(0.7, maxw)
    assert fdfp.l1_distance(out, maxw) <= 1e-10


def test_apply_kernel_small_time_is_near_identity():
    # needs a mesh fine enough to resolve nu(1e-4)^(1/2) ~ 0.014
    fine = fdfp.make_grid("cartesian1d", 1, 8.0, 4096)
    g = fdfp.DistributionState(fine, 0.6 * np.exp(-(fine.node - 1.0) ** 2))
    t = 1e-4
    out = apply_kernel(t, g)
    assert fdfp.l1_distance(out, g) <= 10 * t


def test_apply_kernel_guard_and_geometry(grid256, radial256):
    g = fdfp.DistributionState(grid256, 0.5 * np.exp(-grid256.node ** 2))
    with pytest.raises(ValueError):
        apply_kernel(1e-7, g)
    gr = fdfp.DistributionState(radial256, 0.5 * np.exp(-radial256.node ** 2))
    with pytest.raises(ValueError):
        apply_kernel(0.5, gr)


def test_apply_kernel_equilibration(grid256):
    g = fdfp.DistributionState(grid256, np.where(np.abs(grid256.node) <= 1, 0.5, 0.0))
    m = fdfp.integrate(g)
    out = apply_kernel(10.0, g)
    maxw = fdfp.DistributionState(grid256, m * (2 * math.pi) ** -0.5 * np.exp(-grid256.node ** 2 / 2))
    assert fdfp.l1_distance(out, maxw) <= 1e-3


def test_second_moment_law(grid256):
    # oracle: the closed-form solution of d m2/dt = -2 m2 + 2 N mass
    g = fdfp.DistributionState(grid256, 0.6 * np.exp(-(grid256.node - 1.0) ** 2))
    m0, m2_0 = fdfp.integrate(g), fdfp.moment(g, 2)
    for t in (0.3, 1.0):
        out = apply_kernel(t, g)
        expected = math.exp(-2 * t) * m2_0 + m0 * (1 - math.exp(-2 * t))
        assert fdfp.moment(out, 2) == pytest.approx(expected, abs=1e-5)


def test_mass_conservation_and_positivity(grid256, rng):
    for _ in range(5):
        vals = np.minimum(0.9, np.abs(rng.normal(0.3, 0.2)) * np.exp(-(grid256.node - rng.uniform(-2, 2)) ** 2))
        g = fdfp.DistributionState(grid256, vals)
        out = apply_kernel(rng.uniform(0.05, 1.5), g)
        assert fdfp.integrate(out) == pytest.approx(fdfp.integrate(g), abs=1e-8)
        assert out.values.min() >= 0.0


def test_semigroup_composition(grid256):
    g = fdfp.DistributionState(grid256, 0.6 * np.exp(-(grid256.node - 1.0) ** 2))
    for s in (0.1, 0.5):
        for t in (0.1, 0.5):
            ab = apply_kernel(t, apply_kernel(s, g))
            c = apply_kernel(s + t, g)
            assert fdfp.l1_distance(ab, c) <= 1e-6


def test_gradient_parity(grid256):
    g = fdfp.DistributionState(grid256, 0.5 * np.exp(-grid256.node ** 2))  # even
    grad = apply_kernel_gradient(0.4, g)
    assert np.abs(grad + grad[::-1]).max() <= 1e-12  # odd


def test_gradient_matches_finite_differences(grid256, grid512):
    errs = []
    for grid in (grid256, grid512):
        g = fdfp.DistributionState(grid, 0.6 * np.exp(-(grid.node - 1.0) ** 2))
        out = apply_kernel(0.3, g)
        grad = apply_kernel_gradient(0.3, g)
        fd = np.gradient(out.values, grid.width)
        errs.append(np.abs(grad - fd)[2:-2].max())
    assert errs[0] / errs[1] > 3.0  # centered differences are O(h^2)


def test_gradient_of_maxwellian(grid256):
    maxw = fdfp.DistributionState(grid256, (2 * math.pi) ** -0.5 * np.exp(-grid256.node ** 2 / 2))
    grad = apply_kernel_gradient(0.7, maxw)
    assert np.abs(grad + grid256.node * maxw.values).max() <= 1e-10


def test_edge_operators_match_midpoint_when_resolvable(grid256):
    g = fdfp.DistributionState(grid256, 0.6 * np.exp(-(grid256.node - 1.0) ** 2))
    t = 0.3
    a = apply_kernel(t, g).values
    b = apply_kernel_edges(t, grid256, g.values)
    assert np.abs(a - b).max() <= 1e-3
    ga = apply_kernel_gradient(t, g)
    gb = apply_kernel_gradient_edges(t, grid256, g.values)
    assert np.abs(ga - gb).max() <= 1e-3


def test_edge_gradient_small_time_no_blowup(grid256):
    # the edge-integrated gradient stays finite and of the size of the data's
    # own gradient down to times where the midpoint quadrature is unusable
    g = 0.6 * np.exp(-(grid256.node - 1.0) ** 2)
    slope_scale = np.abs(np.gradient(g, grid256.width)).max()
    for t in (1e-8, 1e-5, 1e-3):
        grad = apply_kernel_gradient_edges(t, grid256, g)
        assert np.all(np.isfinite(grad))
        assert np.abs(grad).max() <= 2 * slope_scale


def test_weighted_norm_basics(grid256, eq_beta1):
    assert weighted_norm(eq_beta1, 1, 0) == pytest.approx(fdfp.integrate(eq_beta1), rel=1e-13)
    assert weighted_norm(eq_beta1, math.inf, 0) == eq_beta1.values.max()
    # oracle: quadrature of (1+|v|)^2 e^{-v^2}, frozen; the |v| kink needs a
    # fine mesh before the midpoint sum reaches 1e-6 agreement
    fine = fdfp.make_grid("cartesian1d", 1, 8.0, 8192)
    g = fdfp.DistributionState(fine, np.exp(-fine.node ** 2 / 2))
    assert weighted_norm(g, 2, 1) == pytest.approx(2.158397733588106, abs=1e-6)
    with pytest.raises(ValueError):
        weighted_norm(eq_beta1, 0.5, 0)


def test_smoothing_ratio_scale_invariance(grid256, eq_beta1):
    spec = SmoothingBoundSpec(p=2.0, q=1.0, m=1.0, alpha_order=1, dim=1)
    r1 = smoothing_bound_ratio(spec, 0.5, eq_beta1)
    half = fdfp.DistributionState(grid256, 0.5 * eq_beta1.values)
    r2 = smoothing_bound_ratio(spec, 0.5, half)
    assert r1 == pytest.approx(r2, rel=1e-12)


def test_smoothing_contraction_cases(grid256, eq_beta1):
    # alpha = 0, p = q, m = 0: the rescaled kernel is essentially a
    # contraction; the measured ratio stays below a modest constant
    for p in (1.0, 2.0, math.inf):
        spec = SmoothingBoundSpec(p=p, q=p, m=0.0, alpha_order=0, dim=1)
        for t in (0.01, 0.1, 1.0, 2.0):
            assert smoothing_bound_ratio(spec, t, eq_beta1) <= 3.0


def test_smoothing_gradient_no_small_time_blowup(grid256, eq_beta1):
    spec = SmoothingBoundSpec(p=2.0, q=2.0, m=0.0, alpha_order=1, dim=1)
    r_small = smoothing_bound_ratio(spec, 0.01, eq_beta1)
    r_one = smoothing_bound_ratio(spec, 1.0, eq_beta1)
    assert max(r_small, r_one) / min(r_small, r_one) <= 10.0


def test_bound_sweep_full_matrix(grid256):
    cases = kernel_bound_sweep(grid256, standard_bound_specs(1), (0.01, 0.1, 1.0, 2.0))
    assert len(cases) == 24
    for case in cases:
        assert math.isfinite(case.max_ratio)
        assert case.spread <= 10.0


def test_smoothing_spec_validation():
    with pytest.raises(ValueError):
        SmoothingBoundSpec(p=1.0, q=2.0, m=0.0, alpha_order=0, dim=1)
    with pytest.raises(ValueError):
        SmoothingBoundSpec(p=2.0, q=1.0, m=-1.0, alpha_order=0, dim=1)
    with pytest.raises(ValueError):
        SmoothingBoundSpec(p=2.0, q=1.0, m=0.0, alpha_order=2, dim=1)


def test_zero_state_rejected(grid256):
    zero = fdfp.DistributionState(grid256, np.zeros(256))
    spec = SmoothingBoundSpec(p=2.0, q=1.0, m=0.0, alpha_order=0, dim=1)
    with pytest.raises(ValueError):
        smoothing_bound_ratio(spec, 0.5, zero)
