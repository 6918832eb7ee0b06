import math

import numpy as np
import pytest

from acsusy import (
    ConfigError, Cylinder, ScatteringContinuumError, SlabGap, coupling_for,
    eigensolve, field_profile, find_discrete_levels, make_axial_grid,
    make_radial_grid, make_unit_context, match_at_boundary, richardson_pair,
)

CTX = make_unit_context("natural")
KAPPA = CTX.default_kappa


def cylinder_with_s(s, r0=1.0):
    rho = s * 4.0 / (-CTX.electron_charge * KAPPA * r0 * r0)
    config = Cylinder(volume_density=rho, radius=r0)
    coupling = coupling_for(config, CTX, kappa=KAPPA)
    return config, coupling, field_profile(config)


def test_unbroken_cylinder_min_energy_converges_to_zero():
    # beta r0^2 = -2, m = 0, up sector: the zero mode; min eps -> 0 in h
    config, coupling, profile = cylinder_with_s(-2.0)
    grid = make_radial_grid(1.0, 25.0, 60)
    minima = []
    for g in (grid, grid.refined(), grid.refined().refined()):
        res = eigensolve(profile, coupling, g, m=0, sector=(1, 1), k=2,
                         error_estimate=False, store_wavefunctions=False)
        minima.append(res.energies[0])
    # h-convergence at order >= 1.9 toward the (tiny) wall-limited value
    d1, d2 = abs(minima[0] - minima[1]), abs(minima[1] - minima[2])
    order = math.log(d1 / d2) / math.log(3.0)
    assert order >= 1.9, (minima, order)
    assert minima[-1] < 5e-4


def test_eigensolve_statuses():
    config, coupling, profile = cylinder_with_s(-2.5)
    grid = make_radial_grid(1.0, 14.0, 150)
    res = eigensolve(profile, coupling, grid, m=0, sector=(1, 1), k=3)
    assert res.susy_status == "unbroken"
    assert res.energies[0] <= res.tolerance
    assert np.all(np.diff(res.energies) >= 0.0)
    config, coupling, profile = cylinder_with_s(-0.5)
    res = eigensolve(profile, coupling, grid, m=0, sector=(1, 1), k=3)
    assert res.susy_status == "broken"
    assert res.energies[0] > res.tolerance


def test_no_negative_energies_over_random_draws():
    rng = np.random.default_rng(11)
    for _ in range(50):
        s = float(rng.uniform(-4.0, -0.2))
        r0 = float(rng.uniform(0.6, 1.5))
        m = int(rng.integers(0, 3))
        tau = int(rng.choice([1, -1]))
        sigma = int(rng.choice([1, -1]))
        config, coupling, profile = cylinder_with_s(s, r0)
        grid = make_radial_grid(r0, 10.0 * r0, 60)
        res = eigensolve(profile, coupling, grid, m=m, sector=(tau, sigma),
                         k=3, store_wavefunctions=False)
        assert res.energies.min() >= -res.tolerance, (s, r0, m, tau, sigma)


def test_oscillator_spectrum():
    # gap-free uniform volume: eps_n = n*omega (up) and (n+1)*omega (down)
    rho = -1.1
    config = SlabGap(volume_density=rho, gap_width=0.0)
    coupling = coupling_for(config, CTX, kappa=KAPPA, mass=1.0)
    profile = field_profile(config)
    omega = abs(coupling.moment_scale * rho)
    extent = 11.0 / math.sqrt(omega)
    grid = make_axial_grid(config, extent, 4001)
    up = eigensolve(profile, coupling, grid, sector=(1, 1), k=4,
                    store_wavefunctions=False)
    down = eigensolve(profile, coupling, grid, sector=(-1, 1), k=4,
                      store_wavefunctions=False)
    for n_level, value in enumerate(up.energies):
        assert value == pytest.approx(n_level * omega, abs=1e-4 * omega)
    for n_level, value in enumerate(down.energies):
        assert value == pytest.approx((n_level + 1) * omega, abs=1e-4 * omega)
    assert up.susy_status == "unbroken"
    # superpartner pairing: up excited levels match down levels within
    # discretization tolerance (the sector stencils differ at O(h^2))
    np.testing.assert_allclose(up.energies[1:], down.energies[:-1], rtol=2e-5)


def test_radial_zero_mode_unpaired():
    # the eps = 0 zero mode of the up sector has no partner: the paired
    # (l,-) block of the same m-family starts well above zero.  (The eps > 0
    # truncated levels are wall-quantized continuum states, and the Dirichlet
    # wall breaks their pairing: the intertwined partner of a wall state does
    # not vanish at the wall.  Discrete-spectrum pairing is exercised by the
    # oscillator test above.)
    config, coupling, profile = cylinder_with_s(-3.0)
    grid = make_radial_grid(1.0, 12.0, 120)
    up, up_est, up_res = richardson_pair(profile, coupling, grid, m=0,
                                         sector=(1, 1), k=4)
    down, _, down_res = richardson_pair(profile, coupling, grid, m=0,
                                        sector=(-1, -1), k=4)
    assert up[0] < 1e-6
    assert up_res.susy_status == "unbroken"
    assert down[0] > 1e3 * max(up[0], up_est[0])
    assert down_res.susy_status == "broken"


def test_truncation_sensitivity_reported():
    config, coupling, profile = cylinder_with_s(-2.0)
    grid = make_radial_grid(1.0, 10.0, 80)
    with pytest.warns(UserWarning, match="truncation|domain"):
        res = eigensolve(profile, coupling, grid, m=0, sector=(1, 1), k=3,
                         check_truncation=True)
    assert res.metadata["truncation_sensitive"]
    assert res.metadata["truncation_shift"] > 1e-8


# ---------------------------------------------------------------------------
# Boundary matching
# ---------------------------------------------------------------------------

def test_zero_mode_root_mismatch():
    config, coupling, profile = cylinder_with_s(-2.0)
    mm = match_at_boundary(config, coupling, 0.0, wall=12.0)
    assert abs(mm) < 1e-8


def test_scattering_continuum_rejected():
    config, coupling, profile = cylinder_with_s(-2.0)
    with pytest.raises(ScatteringContinuumError):
        match_at_boundary(config, coupling, +0.05, wall=12.0)
    with pytest.raises(ScatteringContinuumError):
        find_discrete_levels(config, coupling, window=(-0.1, 0.1), wall=12.0)


def test_mismatch_changes_sign_across_grid_eigenvalues():
    config, coupling, profile = cylinder_with_s(-2.2)
    grid = make_radial_grid(1.0, 11.0, 220)
    extrap, _, _ = richardson_pair(profile, coupling, grid, m=0, sector=(1, 1), k=3)
    for target in extrap[1:3]:
        lo = match_at_boundary(config, coupling, target - 5e-3 * target,
                               wall=grid.wall, outer_boundary="dirichlet")
        hi = match_at_boundary(config, coupling, target + 5e-3 * target,
                               wall=grid.wall, outer_boundary="dirichlet")
        assert lo * hi < 0.0


def test_find_discrete_levels_unbroken_flags_zero_mode():
    config, coupling, profile = cylinder_with_s(-1.8)
    res = find_discrete_levels(config, coupling, window=(-0.3, 0.0), wall=12.0)
    assert res.susy_status == "unbroken"
    assert len(res.entries) == 1
    assert res.entries[0].energy == 0.0
    wf = res.entries[0].wavefunction
    assert wf is not None
    assert wf.norm_squared() == pytest.approx(1.0, abs=1e-6)


def test_find_discrete_levels_broken_is_empty():
    config, coupling, profile = cylinder_with_s(-0.6)
    res = find_discrete_levels(config, coupling, window=(-0.3, 0.0), wall=12.0,
                               n_scan=40)
    assert res.susy_status == "broken"
    assert res.entries == []
    assert res.metadata["rejected_roots"]  # the non-normalizable eps=0 match


def test_find_discrete_levels_zero_coupling():
    config = Cylinder(volume_density=0.0, radius=1.0)
    coupling = coupling_for(config, CTX)
    res = find_discrete_levels(config, coupling, window=(-0.4, 0.0), wall=10.0,
                               n_scan=40)
    assert res.entries == []
    assert res.susy_status == "broken"


def test_window_validation():
    config, coupling, profile = cylinder_with_s(-2.0)
    with pytest.raises(ConfigError):
        find_discrete_levels(config, coupling, window=(0.0, -0.5), wall=12.0)


def test_discrete_level_stable_under_domain_doubling():
    config, coupling, profile = cylinder_with_s(-2.4)
    roots = []
    for wall in (12.0, 24.0):
        res = find_discrete_levels(config, coupling, window=(-0.2, 0.0),
                                   wall=wall, n_scan=30,
                                   store_wavefunctions=False)
        roots.append(res.energies)
    assert len(roots[0]) == len(roots[1]) == 1
    assert abs(roots[0][0] - roots[1][0]) < 1e-8
