import math

import numpy as np
import pytest
from scipy.integrate import quad

from acsusy import (
    Cylinder, Disk, OverflowGuardError, Plane, Ring, SlabGap,
    ThresholdViolation, classify_susy, closed_form_axial, coupling_for,
    field_profile, make_axial_grid, make_radial_grid, make_unit_context,
    norm_growth_ratio, normalization_cylinder, probability_outside,
    zero_mode_axial, zero_mode_radial,
)
from acsusy.ground_state import normalization_cylinder_quadrature

CTX = make_unit_context("natural")
KAPPA = CTX.default_kappa  # -1.913..., so negative charges give decaying modes


def make(config, kappa=KAPPA):
    return config, coupling_for(config, CTX, kappa=kappa), field_profile(config)


# ---------------------------------------------------------------------------
# Axial zero modes
# ---------------------------------------------------------------------------

def test_plane_zero_mode_shape():
    config, coupling, profile = make(Plane(surface_density=-1.1))
    grid = make_axial_grid(config, 12.0, 1001)
    wf = zero_mode_axial(profile, coupling, grid)
    expected = np.exp(-0.5 * abs(coupling.value) * np.abs(grid))
    ratio = np.real(wf.samples) / expected
    np.testing.assert_allclose(ratio, ratio[0], rtol=1e-12)


def test_zero_field_gives_constant():
    config, coupling, profile = make(Plane(surface_density=0.0))
    grid = make_axial_grid(config, 5.0, 101)
    wf = zero_mode_axial(profile, coupling, grid)
    np.testing.assert_allclose(np.real(wf.samples), 1.0, rtol=1e-15)


def test_ring_zero_mode_matches_closed_form_pointwise():
    config, coupling, profile = make(Ring(total_charge=-2.0, radius=1.0))
    grid = make_axial_grid(config, 15.0, 801)
    wf = zero_mode_axial(profile, coupling, grid)
    closed = closed_form_axial(config, coupling, grid)
    scale = np.real(closed.samples[400]) / np.real(wf.samples[400])
    np.testing.assert_allclose(np.real(wf.samples) * scale,
                               np.real(closed.samples), rtol=1e-10)


@pytest.mark.parametrize("config", [
    Ring(total_charge=-1.4, radius=0.9),
    Disk(total_charge=-2.2, radius=1.3),
    Plane(surface_density=-0.7),
    SlabGap(volume_density=-0.5, gap_width=1.6),
])
def test_quadrature_path_agrees_with_analytic_path(config):
    config, coupling, profile = make(config)
    grid = make_axial_grid(config, 8.0, 161)
    analytic = zero_mode_axial(profile, coupling, grid, method="analytic")
    quadrature = zero_mode_axial(profile, coupling, grid, method="quadrature")
    np.testing.assert_allclose(np.real(quadrature.samples),
                               np.real(analytic.samples), rtol=1e-8)


@pytest.mark.parametrize("config", [
    Ring(total_charge=-1.4, radius=0.9),
    Disk(total_charge=-2.2, radius=1.3),
    Plane(surface_density=-0.7),
    SlabGap(volume_density=-0.5, gap_width=1.6),
])
def test_oracle_equivalence_zero_mode_vs_closed_form(config):
    # quadrature construction and explicit formulas agree pointwise up to
    # one global constant, on every axial geometry
    from acsusy import characteristic_length
    config, coupling, profile = make(config)
    extent = min(20.0 * characteristic_length(config, coupling), 40.0)
    grid = make_axial_grid(config, extent, 2001)
    built = zero_mode_axial(profile, coupling, grid, method="quadrature")
    closed = closed_form_axial(config, coupling, grid)
    keep = np.ones(len(grid), dtype=bool)
    for b in profile.breakpoints:
        keep &= ~np.isclose(grid, b)
    a = np.real(built.samples)[keep]
    b = np.real(closed.samples)[keep]
    scale = float(np.dot(a, b) / np.dot(a, a))  # least-squares global constant
    np.testing.assert_allclose(scale * a, b, rtol=1e-8)


def test_wrong_sign_sector_is_reciprocal():
    # with kappa*charge < 0 the tau3=+1 zero mode is the growing branch,
    # the reciprocal of the closed form
    config = Ring(total_charge=+2.0, radius=1.0)
    coupling = coupling_for(config, CTX, kappa=KAPPA)
    profile = field_profile(config)
    grid = make_axial_grid(config, 6.0, 201)
    wf = zero_mode_axial(profile, coupling, grid)
    closed = closed_form_axial(config, coupling, grid)
    product = np.real(wf.samples) * np.real(closed.samples)
    np.testing.assert_allclose(product, product[0], rtol=1e-10)


def test_overflow_guard_reports():
    config, coupling, profile = make(SlabGap(volume_density=-40.0, gap_width=0.0))
    grid = make_axial_grid(config, 60.0, 4001)
    with pytest.raises(OverflowGuardError, match="extent"):
        zero_mode_axial(profile, coupling, grid)


def test_closed_form_disk_at_origin():
    config = Disk(total_charge=-3.0, radius=1.2)
    coupling = coupling_for(config, CTX)
    grid = np.array([-1.0, 0.0, 1.0])
    wf = closed_form_axial(config, coupling, grid)
    # exponent at z=0 is +|beta| r0 / (pi r0^2) = |beta|/(pi r0)
    expected = math.exp(abs(coupling.value) / (math.pi * 1.2))
    assert np.real(wf.samples[1]) == pytest.approx(expected, rel=1e-14)


def quadrature_norm(config, coupling, extent):
    """Adaptive-quadrature norm of the closed-form density (oracle)."""
    def density(z):
        wf = closed_form_axial(config, coupling, np.array([z]))
        return float(np.abs(wf.samples[0]) ** 2)
    bps = sorted(field_profile(config).breakpoints)
    total, lo = 0.0, -extent
    for hi in list(bps) + [extent]:
        total += quad(density, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=300)[0]
        lo = hi
    return total


def test_closed_form_plane_is_normalized():
    config = Plane(surface_density=-1.3)
    coupling = coupling_for(config, CTX)
    a = abs(coupling.value)
    wf = closed_form_axial(config, coupling, make_axial_grid(config, 5.0, 101))
    assert wf.norm_kind == "normalized"
    assert quadrature_norm(config, coupling, 40.0 / a) == pytest.approx(1.0, abs=1e-8)


def test_closed_form_slab_is_normalized_and_continuous():
    config = SlabGap(volume_density=-0.9, gap_width=2.4)
    coupling = coupling_for(config, CTX)
    a = abs(coupling.value)
    extent = config.gap_width / 2 + 30.0 / math.sqrt(a)
    assert quadrature_norm(config, coupling, extent) == pytest.approx(1.0, abs=1e-8)
    # continuity at |z| = L/2: interior value equals boundary value
    grid = make_axial_grid(config, extent, 8001)
    wf = closed_form_axial(config, coupling, grid)
    inside = np.abs(grid) < 0.5 * config.gap_width
    boundary = np.isclose(grid, 0.5 * config.gap_width)
    assert np.real(wf.samples[inside]).max() == pytest.approx(
        np.real(wf.samples[boundary])[0], rel=1e-12)


def test_closed_form_ring_tends_to_constant():
    config = Ring(total_charge=-1.0, radius=1.0)
    coupling = coupling_for(config, CTX)
    grid = np.linspace(-400.0, 400.0, 2001)
    wf = closed_form_axial(config, coupling, grid)
    assert np.real(wf.samples[0]) == pytest.approx(1.0, abs=2e-3)
    assert wf.norm_kind == "non_normalizable"


# ---------------------------------------------------------------------------
# Radial zero mode
# ---------------------------------------------------------------------------

def cylinder_with_s(s, r0=1.0, kappa=KAPPA):
    # choose rho so that beta * r0^2 = s
    rho = s * 4.0 / (-CTX.electron_charge * kappa * r0 * r0)
    config = Cylinder(volume_density=rho, radius=r0)
    coupling = coupling_for(config, CTX, kappa=kappa)
    assert coupling.value * r0 * r0 == pytest.approx(s, rel=1e-12)
    return config, coupling


def test_radial_zero_mode_continuity():
    config, coupling = cylinder_with_s(-2.3, r0=1.1)
    rg = make_radial_grid(1.1, 10.0, 400)
    wf = zero_mode_radial(config, coupling, rg.r)
    j = rg.radius_index
    f = np.real(wf.samples)
    h = rg.spacing
    left = (3 * f[j] - 4 * f[j - 1] + f[j - 2]) / (2 * h)
    right = (-3 * f[j] + 4 * f[j + 1] - f[j + 2]) / (2 * h)
    expected = coupling.value * 1.1 * f[j]  # phi' = beta r phi at r0
    assert left == pytest.approx(expected, rel=1e-4)
    assert right == pytest.approx(expected, rel=1e-4)


def test_radial_zero_mode_power_law():
    config, coupling = cylinder_with_s(-2.0)
    grid = np.array([0.5, 1.0, 2.0, 4.0])
    wf = zero_mode_radial(config, coupling, grid)
    f = np.real(wf.samples)
    assert f[2] / f[1] == pytest.approx(2.0 ** (-2.0), rel=1e-12)
    assert f[3] / f[1] == pytest.approx(4.0 ** (-2.0), rel=1e-12)


def test_radial_zero_mode_zero_coupling_constant():
    config = Cylinder(volume_density=0.0, radius=1.0)
    coupling = coupling_for(config, CTX)
    wf = zero_mode_radial(config, coupling, np.array([0.5, 1.0, 2.0]))
    np.testing.assert_allclose(np.real(wf.samples), 1.0)
    assert wf.norm_kind == "non_normalizable"


def test_radial_zero_mode_normalized_when_unbroken():
    config, coupling = cylinder_with_s(-3.0)
    rg = make_radial_grid(1.0, 50.0, 600)
    wf = zero_mode_radial(config, coupling, rg.r)
    assert wf.norm_kind == "normalized"
    assert wf.norm_squared() == pytest.approx(1.0, abs=1e-5)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

def test_classification_verdicts():
    ring = Ring(total_charge=-1.0, radius=1.0)
    assert classify_susy(ring, coupling_for(ring, CTX)).status == "broken"
    assert classify_susy(ring, coupling_for(ring, CTX)).divergence_mode == "constant_tail"
    disk = Disk(total_charge=-2.0, radius=1.0)
    assert classify_susy(disk, coupling_for(disk, CTX)).divergence_mode == "constant_tail"
    plane = Plane(surface_density=-1.0)
    assert classify_susy(plane, coupling_for(plane, CTX)).status == "unbroken"
    slab = SlabGap(volume_density=-0.5, gap_width=2.0)
    assert classify_susy(slab, coupling_for(slab, CTX)).status == "unbroken"
    zero = Plane(surface_density=0.0)
    verdict = classify_susy(zero, coupling_for(zero, CTX))
    assert verdict.status == "broken" and verdict.divergence_mode == "constant_tail"


def test_classification_cylinder_threshold():
    config, coupling = cylinder_with_s(-0.5)
    verdict = classify_susy(config, coupling)
    assert verdict.status == "broken"
    assert verdict.divergence_mode == "threshold_violation"
    config, coupling = cylinder_with_s(-2.0)
    verdict = classify_susy(config, coupling)
    assert verdict.status == "unbroken"
    assert verdict.constants["A_squared"] > 0.0
    config, coupling = cylinder_with_s(1.5)
    verdict = classify_susy(config, coupling)
    assert verdict.status == "broken" and verdict.divergence_mode == "power_tail"


def test_classification_agrees_with_expanding_norm():
    rng = np.random.default_rng(42)
    for _ in range(20):
        pick = rng.integers(0, 5)
        if pick == 0:
            config = Ring(total_charge=-float(rng.uniform(0.5, 3.0)),
                          radius=float(rng.uniform(0.5, 2.0)))
        elif pick == 1:
            config = Disk(total_charge=-float(rng.uniform(0.5, 3.0)),
                          radius=float(rng.uniform(0.5, 2.0)))
        elif pick == 2:
            config = Plane(surface_density=-float(rng.uniform(0.3, 2.0)))
        elif pick == 3:
            config = SlabGap(volume_density=-float(rng.uniform(0.3, 2.0)),
                             gap_width=float(rng.uniform(0.5, 3.0)))
        else:
            s = float(rng.choice([rng.uniform(-4.0, -1.3), rng.uniform(-0.75, -0.1)]))
            config, coupling = cylinder_with_s(s)
        if pick != 4:
            coupling = coupling_for(config, CTX)
        verdict = classify_susy(config, coupling)
        extent = 30.0 * (getattr(config, "radius", None) or 1.0)
        ratio = norm_growth_ratio(config, coupling, extent)
        if verdict.unbroken:
            assert ratio < 1.2, (config, ratio)
        else:
            assert ratio > 1.3, (config, ratio)


# ---------------------------------------------------------------------------
# Cylinder normalization: closed form vs quadrature oracle
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("s", [1.1, 1.5, 2.0, 5.0, 20.0])
def test_normalization_closed_form_vs_quadrature(s):
    beta, r0 = -s, 1.0
    closed, _ = normalization_cylinder(beta, r0)
    oracle = normalization_cylinder_quadrature(beta, r0)
    assert closed == pytest.approx(oracle, rel=1e-10)


def test_normalization_with_nonunit_radius():
    beta, r0 = -2.0 / 1.7**2, 1.7
    closed, _ = normalization_cylinder(beta, r0)
    oracle = normalization_cylinder_quadrature(beta, r0)
    assert closed == pytest.approx(oracle, rel=1e-10)


def test_normalization_frozen_value():
    # |A|^2 at |beta| r0^2 = 2, r0 = 1, frozen from the quadrature oracle
    a2, _ = normalization_cylinder(-2.0, 1.0)
    assert a2 == pytest.approx(0.5607328352843, rel=1e-10)


def test_normalization_threshold_behaviour():
    with pytest.raises(ThresholdViolation):
        normalization_cylinder(-0.99, 1.0)
    with pytest.raises(ThresholdViolation):
        normalization_cylinder(-1.0, 1.0)
    a2, _ = normalization_cylinder(-(1.0 + 1e-9), 1.0)
    assert 0.0 < a2 < 1e-8  # (|beta| r0^2 - 1) factor vanishes at threshold


@pytest.mark.parametrize("s", [1.5, 2.0, 5.0])
def test_total_probability_is_one(s):
    beta, r0 = -s, 1.0
    a2, b2 = normalization_cylinder(beta, r0)
    inside = 2.0 * math.pi * a2 * quad(
        lambda r: r * math.exp(beta * r * r), 0.0, r0, epsrel=1e-13)[0]
    outside = 2.0 * math.pi * b2 * quad(
        lambda r: r ** (2.0 * s * -1.0 + 1.0), r0, np.inf, epsrel=1e-13)[0]
    assert inside + outside == pytest.approx(1.0, abs=1e-10)
    assert probability_outside(beta, r0) == pytest.approx(outside, rel=1e-10)


def test_probability_outside_monotone():
    values = [probability_outside(-s, 1.0) for s in (1.2, 2.0, 5.0, 10.0)]
    assert all(a > b for a, b in zip(values, values[1:]))
    assert probability_outside(-80.0, 1.0) < 1e-20
    with pytest.raises(ThresholdViolation):
        probability_outside(-0.5, 1.0)
