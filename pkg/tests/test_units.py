import math

import pytest

from acsusy import (
    ConfigError, Cylinder, Plane, Ring, convert_coupling, convert_energy,
    coupling_for, lambda_min, lambda_min_report, make_unit_context,
)
from acsusy.units import (
    ELEMENTARY_CHARGE_NATURAL, KAPPA_NEUTRON, KAPPA_REFERENCE_MAGNITUDE,
    REFERENCE_LAMBDA_MIN_C_PER_CM,
)

NATURAL = make_unit_context("natural")
GAUSSIAN = make_unit_context("gaussian")
SI = make_unit_context("si")


def test_natural_hbar_c_is_one():
    assert NATURAL.hbar_c == 1.0


def test_gaussian_electron_charge_matches_codata():
    # e = 1.602176634e-19 C * 2.99792458e9 esu/C, computed independently
    assert GAUSSIAN.electron_charge == pytest.approx(4.8032047125702626e-10, rel=1e-12)


def test_si_energy_round_trip():
    m0 = NATURAL.default_mass
    there = convert_energy(m0, NATURAL, SI)
    back = convert_energy(there, SI, NATURAL)
    assert abs(back - m0) / m0 < 1e-12


def test_unknown_system_rejected():
    with pytest.raises(ConfigError):
        make_unit_context("imperial")


@pytest.mark.parametrize("config", [
    Ring(total_charge=-1.3, radius=0.7),
    Plane(surface_density=-2.1),
    Cylinder(volume_density=-4.2, radius=1.1),
])
def test_coupling_round_trips(config):
    coupling = coupling_for(config, NATURAL)
    for ctx in (GAUSSIAN, SI):
        there = convert_coupling(coupling, NATURAL, ctx)
        back = convert_coupling(there, ctx, NATURAL)
        assert abs(back.value - coupling.value) <= 1e-12 * abs(coupling.value)
        assert abs(back.moment_scale - coupling.moment_scale) \
            <= 1e-12 * abs(coupling.moment_scale)


def test_plane_zero_charge_gives_zero_coupling():
    coupling = coupling_for(Plane(surface_density=0.0), NATURAL)
    assert coupling.value == 0.0
    assert coupling.kind == "alpha_plane"


def test_ring_sign_algebra():
    # beta = -e*Q*kappa/(4M): Q > 0 and kappa < 0 give beta > 0
    coupling = coupling_for(Ring(total_charge=2.0, radius=1.0), NATURAL, kappa=-1.913)
    assert coupling.value > 0.0
    assert coupling.kind == "beta_ring_disk"


def test_cylinder_coupling_hand_evaluation():
    # rho chosen so |beta| r0^2 = 2 at kappa = 2, M = 1, r0 = 1:
    # beta = -e*rho*kappa/4 = -2 exactly when rho = 4/e.
    e = ELEMENTARY_CHARGE_NATURAL
    coupling = coupling_for(Cylinder(volume_density=4.0 / e, radius=1.0),
                            NATURAL, kappa=2.0, mass=1.0)
    assert coupling.value == pytest.approx(-2.0, rel=1e-14)
    assert coupling.kind == "beta_cylinder"


def test_sign_flips_under_kappa_and_charge():
    for config in (Ring(1.5, 1.0), Plane(-0.7), Cylinder(2.2, 0.5)):
        plus = coupling_for(config, NATURAL, kappa=1.3)
        minus = coupling_for(config, NATURAL, kappa=-1.3)
        assert plus.value == pytest.approx(-minus.value, rel=1e-14)
    q_plus = coupling_for(Ring(1.5, 1.0), NATURAL, kappa=1.3)
    q_minus = coupling_for(Ring(-1.5, 1.0), NATURAL, kappa=1.3)
    assert q_plus.value == pytest.approx(-q_minus.value, rel=1e-14)


def test_nonpositive_mass_rejected():
    with pytest.raises(ConfigError, match="mass"):
        coupling_for(Ring(1.0, 1.0), NATURAL, mass=-2.0)
    with pytest.raises(ConfigError, match="mass"):
        lambda_min(NATURAL, mass=0.0)


def test_lambda_min_natural_exact():
    kappa = -1.913
    expected = 4.0 * math.pi * NATURAL.default_mass / abs(
        NATURAL.electron_charge * kappa)
    assert lambda_min(NATURAL, kappa=kappa) == expected


def test_lambda_min_zero_kappa_distinct_error():
    with pytest.raises(ConfigError, match="kappa"):
        lambda_min(NATURAL, kappa=0.0)


def test_lambda_min_inverse_proportionality():
    one = lambda_min(NATURAL, kappa=-1.0)
    ten = lambda_min(NATURAL, kappa=-10.0)
    assert ten == pytest.approx(one / 10.0, rel=1e-14)
    # lambda_min * |kappa| independent of kappa
    products = {k: lambda_min(NATURAL, kappa=k) * abs(k) for k in (-0.3, 1.9, 42.0)}
    values = list(products.values())
    assert max(values) - min(values) <= 1e-12 * values[0]


def test_lambda_min_physical_pipeline():
    report = lambda_min_report()
    neutron = report["presets"]["neutron_kappa"]["coulomb_per_cm"]
    reference = report["presets"]["reference_kappa"]["coulomb_per_cm"]
    # Gaussian evaluation frozen from CODATA inputs
    assert neutron == pytest.approx(6.867060e-3, rel=1e-5)
    # the published estimate is reproduced by the reference preset ...
    assert abs(reference - REFERENCE_LAMBDA_MIN_C_PER_CM) \
        < 0.01 * REFERENCE_LAMBDA_MIN_C_PER_CM
    # ... and NOT by the neutron moment; the discrepancy is real
    assert abs(neutron - REFERENCE_LAMBDA_MIN_C_PER_CM) \
        > 0.3 * REFERENCE_LAMBDA_MIN_C_PER_CM
    assert report["kappa"] == KAPPA_NEUTRON
    assert KAPPA_REFERENCE_MAGNITUDE == pytest.approx(2.7928, abs=1e-3)
