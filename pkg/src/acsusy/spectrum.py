"""Eigenvalue solvers: grid diagonalization and boundary matching.

Two independent routes to the spectrum of the sector Hamiltonians:

* `eigensolve` diagonalizes the symmetric tridiagonal form of one sector
  on a finite grid with a Dirichlet outer wall;
* `match_at_boundary` integrates the radial equation outward from the
  regular origin and inward from the outer boundary and measures the
  Wronskian mismatch of the two solutions at the cylinder surface r0.
  Zeros of the mismatch in the energy are eigenvalues, which realises
  the value-and-derivative continuity condition at r0 as a quantization
  condition.

Energies are the nonrelativistic eps = (E^2 - M^2)/(2M).  Because the
Hamiltonian is an anticommutator {Q, Q+}, its spectrum is non-negative;
outside the cylinder the effective potential is a pure inverse square,
so the scattering continuum starts at eps = 0 and genuinely discrete
levels can only sit at eps = 0 (the SUSY zero modes).  The inward
integration therefore supports a `decaying` mode for eps <= 0 and a
`dirichlet` mode that reproduces the wall-truncated spectrum for
cross-validation against `eigensolve`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigh_tridiagonal
from scipy.special import kv, kvp

from .configurations import (
    ChargeConfig, Cylinder, RadialGrid, field_profile, make_axial_grid,
    make_radial_grid,
)
from .errors import (
    ConfigError, ScatteringContinuumError, SolverFailure,
)
from .ground_state import WaveFunction
from .susy_algebra import build_operators, sector_tridiagonal
from .units import Coupling

__all__ = [
    "SpectrumEntry", "SpectrumResult", "eigensolve", "richardson_pair",
    "match_at_boundary", "find_discrete_levels",
]


@dataclass(frozen=True)
class SpectrumEntry:
    energy: float
    m: int
    sector: tuple
    wavefunction: Optional[WaveFunction] = None


@dataclass
class SpectrumResult:
    """Eigenvalues sorted ascending, with the SUSY verdict of the run.

    `tolerance` is the discretization-error scale used both for the
    positivity guard (no energy below -tolerance is ever emitted) and for
    deciding whether the lowest level counts as a zero mode.
    """

    entries: list
    susy_status: str
    method: str
    tolerance: float
    metadata: dict = field(default_factory=dict)

    @property
    def energies(self) -> np.ndarray:
        return np.array([e.energy for e in self.entries])


# ---------------------------------------------------------------------------
# Grid diagonalization
# ---------------------------------------------------------------------------

def _as_radial_grid(grid, radius: float) -> RadialGrid:
    if isinstance(grid, RadialGrid):
        return grid
    r = np.asarray(grid, dtype=float)
    h = float(np.mean(np.diff(r)))
    j = int(np.argmin(np.abs(r - radius)))
    if abs(r[j] - radius) > 1e-9 * radius:
        raise ConfigError("radial grid must contain r0 as a node")
    return RadialGrid(r, h, (len(r) + 0.5) * h, j)


def _tail_decays(domain: str, grid: np.ndarray, samples: np.ndarray) -> bool:
    """Normalizability heuristic for the lowest truncated eigenstate."""
    f = np.abs(samples)
    peak = f.max()
    if peak == 0.0:
        return False
    if domain == "axial":
        outer = (np.abs(grid) > 0.92 * np.abs(grid).max())
        return float(f[outer].mean()) < 1e-3 * peak
    wall = grid[-1]
    sel = (grid > 0.55 * wall) & (grid < 0.85 * wall) & (f > 1e-280 * peak)
    if sel.sum() < 8:
        return False
    slope = np.polyfit(np.log(grid[sel]), np.log(f[sel]), 1)[0]
    return slope < -1.0


def eigensolve(profile, coupling: Coupling, grid, m: int = 0,
               sector: tuple = (1, 1), k: int = 4,
               error_estimate: bool = True,
               check_truncation: bool = False,
               truncation_tol: float = 1e-8,
               store_wavefunctions: bool = True) -> SpectrumResult:
    """Lowest k eigenpairs of one sector Hamiltonian (Dirichlet wall).

    With `error_estimate` a coarser companion grid provides a per-level
    discretization-error estimate (Richardson differences); the result's
    tolerance is 10x the largest estimate.  With `check_truncation` the
    domain is doubled and any level moving more than `truncation_tol`
    flags the result as truncation-sensitive (warning + metadata).
    """
    if k < 1:
        raise ConfigError("k must be at least 1")
    tau, sigma = sector
    config = profile.config

    def solve_on(g):
        garr = g.r if isinstance(g, RadialGrid) else np.asarray(g, dtype=float)
        ops = build_operators(profile, coupling, garr, m=m)
        diag, off = sector_tridiagonal(ops, tau, sigma)
        kk = min(k, len(diag))
        try:
            vals, vecs = eigh_tridiagonal(diag, off, select="i",
                                          select_range=(0, kk - 1))
        except np.linalg.LinAlgError as exc:  # pragma: no cover
            raise SolverFailure(f"eigenvalue iteration failed: {exc}") from exc
        return garr, ops, vals, vecs

    garr, ops, vals, vecs = solve_on(grid)

    estimates = None
    if error_estimate:
        if profile.domain == "axial":
            coarse_n = max(9, (len(garr) + 1) // 2)
            coarse = make_axial_grid(config, float(garr[-1]), coarse_n)
        else:
            rg = _as_radial_grid(grid, config.radius)
            coarse = make_radial_grid(config.radius, rg.wall,
                                      max(4, rg.radius_index // 2))
        cg, _, cvals, _ = solve_on(coarse)
        h_f = float(np.mean(np.diff(garr)))
        h_c = float(np.mean(np.diff(cg.r if isinstance(cg, RadialGrid) else cg)))
        ratio = (h_c / h_f) ** 2
        nshared = min(len(vals), len(cvals))
        estimates = np.abs(vals[:nshared] - cvals[:nshared]) / max(ratio - 1.0, 1.0)

    floor = 1e-12 * max(1.0, float(np.abs(vals).max()))
    # a zero mode on a truncated domain picks up a small wall-induced shift;
    # anything far below the first excited level still counts as zero
    gap_scale = 0.02 * float(vals[1]) if len(vals) > 1 and vals[1] > 0.0 else 0.0
    if estimates is not None:
        tolerance = float(max(10.0 * estimates.max(), gap_scale, floor))
        if vals.min() < -tolerance:
            raise SolverFailure(
                f"negative energy {vals.min():.3e} below tolerance {tolerance:.3e}: "
                "discretization inconsistent with H = {Q,Q+} >= 0")
    else:
        # no error estimate requested: report the raw discretization dip as
        # the tolerance instead of guessing one
        tolerance = float(max(-vals.min(), gap_scale, floor))

    def to_samples(u):
        if profile.domain == "axial":
            return u / math.sqrt(np.sum(u * u) * ops.spacing)
        return (u / np.sqrt(garr)) / math.sqrt(
            2.0 * math.pi * np.sum(u * u) * ops.spacing)

    entries = []
    m_s = m if (profile.domain == "axial" or sigma == 1) else m + 1
    for i in range(len(vals)):
        wf = None
        if store_wavefunctions:
            wf = WaveFunction(profile.domain, garr,
                              to_samples(vecs[:, i]).astype(complex),
                              sector=sector, norm_kind="normalized",
                              angular_momentum=m_s)
        entries.append(SpectrumEntry(float(vals[i]), m, sector, wf))

    unbroken = bool(vals[0] <= tolerance) and _tail_decays(
        profile.domain, garr, to_samples(vecs[:, 0]))

    metadata = {"grid_points": len(garr)}
    if estimates is not None:
        metadata["error_estimates"] = estimates.tolist()
    if check_truncation:
        if profile.domain == "axial":
            big = make_axial_grid(config, 2.0 * float(garr[-1]), 2 * len(garr) - 1)
        else:
            rg = _as_radial_grid(grid, config.radius)
            big = make_radial_grid(config.radius, 2.0 * rg.wall, rg.radius_index)
        _, _, bvals, _ = solve_on(big)
        shift = float(np.abs(vals - bvals[:len(vals)]).max())
        metadata["truncation_shift"] = shift
        metadata["truncation_sensitive"] = shift > truncation_tol
        if shift > truncation_tol:
            warnings.warn(
                f"doubling the domain moved an eigenvalue by {shift:.3e} "
                f"(> {truncation_tol:.1e}): truncated-spectrum levels are "
                "not converged discrete states", stacklevel=2)

    return SpectrumResult(entries, "unbroken" if unbroken else "broken",
                          "grid_diag", tolerance, metadata)


def richardson_pair(profile, coupling: Coupling, grid, m: int = 0,
                    sector: tuple = (1, 1), k: int = 4):
    """Eigenvalues on `grid` and its exact refinement, extrapolated.

    Radial grids refine 3x (cylinder surface stays on a node and the wall
    stays put, see RadialGrid.refined); axial grids refine 2x at fixed
    extent.  Returns (extrapolated values, error estimates of the fine
    values, fine SpectrumResult).
    """
    if profile.domain == "radial":
        base = _as_radial_grid(grid, profile.config.radius)
        fine = base.refined()
        h_ratio = 3.0
    else:
        base = np.asarray(grid, dtype=float)
        fine = make_axial_grid(profile.config, float(base[-1]), 2 * len(base) - 1)
        h_ratio = 2.0
    coarse_res = eigensolve(profile, coupling, base, m, sector, k,
                            error_estimate=False, store_wavefunctions=False)
    fine_res = eigensolve(profile, coupling, fine, m, sector, k,
                          error_estimate=False, store_wavefunctions=True)
    e_c, e_f = coarse_res.energies, fine_res.energies
    n = min(len(e_c), len(e_f))
    r2 = h_ratio ** 2
    extrapolated = (r2 * e_f[:n] - e_c[:n]) / (r2 - 1.0)
    estimates = np.abs(e_f[:n] - e_c[:n]) / (r2 - 1.0)
    fine_res.tolerance = float(max(10.0 * estimates.max(), fine_res.tolerance))
    if e_f.min() < -fine_res.tolerance:
        raise SolverFailure(
            f"negative energy {e_f.min():.3e} below tolerance "
            f"{fine_res.tolerance:.3e}: discretization inconsistent with "
            "H = {Q,Q+} >= 0")
    return extrapolated, estimates, fine_res


# ---------------------------------------------------------------------------
# Shooting / boundary matching
# ---------------------------------------------------------------------------

def _radial_terms(config: Cylinder, coupling: Coupling, m: int, sector: tuple):
    """Scalar radial problem data for one (tau, sigma) block."""
    tau, sigma = sector
    if tau not in (1, -1) or sigma not in (1, -1):
        raise ConfigError(f"invalid sector {sector!r}")
    m_s = m if sigma == 1 else m + 1
    beta = coupling.value
    r0 = config.radius
    s = beta * r0 * r0
    mass = coupling.mass
    # W = a E: -beta*r inside, -s/r outside (a rho = -2 beta)
    def v_inside(r):
        w = -beta * r
        return m_s * m_s / (r * r) - tau * (-2.0 * beta) - 2.0 * tau * sigma * m_s * w / r + w * w

    def v_outside(r):
        w = -s / r
        return m_s * m_s / (r * r) - 2.0 * tau * sigma * m_s * w / r + w * w

    nu = abs(m_s + tau * sigma * s)
    return m_s, mass, v_inside, v_outside, nu


def _integrate(rhs, r_from, r_to, y0, rtol):
    sol = solve_ivp(rhs, (r_from, r_to), y0, method="DOP853",
                    rtol=rtol, atol=1e-280,
                    first_step=abs(r_to - r_from) * 1e-3 or None)
    if not sol.success:
        raise SolverFailure(f"radial integration stalled: {sol.message}",
                            radius=float(sol.t[-1]))
    return float(sol.y[0, -1]), float(sol.y[1, -1])


def match_at_boundary(config: Cylinder, coupling: Coupling, eps: float,
                      m: int = 0, sector: tuple = (1, 1), *,
                      wall: float = 12.0,
                      outer_boundary: str = "decaying",
                      rtol: float = 1e-11,
                      r_start_scale: float = 1e-8) -> float:
    """Normalized Wronskian mismatch of the matched radial solutions at r0.

    The outward solution starts regular (~ r^m_s) near the origin; the
    inward solution starts at `wall` either on the decaying tail
    (`outer_boundary="decaying"`, requires eps <= 0: the continuum starts
    at zero) or as a Dirichlet wall state ("dirichlet", any eps; its
    mismatch zeros are the wall-truncated eigenvalues).  The mismatch is
    scaled so a sign change brackets an eigenvalue.
    """
    if not isinstance(config, Cylinder):
        raise ConfigError("boundary matching is defined for the cylinder")
    r0 = config.radius
    if wall <= 1.5 * r0:
        raise ConfigError("wall must sit well outside r0")
    m_s, mass, v_in, v_out, nu = _radial_terms(config, coupling, m, sector)
    two_m_eps = 2.0 * mass * eps

    def rhs_in(r, y):
        return (y[1], (v_in(r) - two_m_eps) * y[0] - y[1] / r)

    def rhs_out(r, y):
        return (y[1], (v_out(r) - two_m_eps) * y[0] - y[1] / r)

    r_start = r_start_scale * r0
    y0 = (1.0, 0.0) if m_s == 0 else (r_start ** m_s, m_s * r_start ** (m_s - 1))
    f_out, fp_out = _integrate(rhs_in, r_start, r0, y0, rtol)

    if outer_boundary == "dirichlet":
        y_wall = (0.0, -1.0)
        start = wall
    elif outer_boundary == "decaying":
        if eps > 0.0:
            raise ScatteringContinuumError(
                f"eps = {eps:.3g} > 0 lies in the scattering continuum: "
                "no decaying outer solution exists")
        if eps == 0.0:
            start = wall
            y_wall = (1.0, -nu / wall)
        else:
            kappa_e = math.sqrt(-two_m_eps)
            start = min(wall, r0 + 650.0 / kappa_e)
            x = kappa_e * start
            k_val = kv(nu, x)
            if not (np.isfinite(k_val) and k_val > 0.0):
                raise SolverFailure(
                    f"Bessel-K start value unusable at nu={nu:.3g}, x={x:.3g}",
                    radius=start)
            y_wall = (1.0, kappa_e * float(kvp(nu, x)) / float(k_val))
    else:
        raise ConfigError(f"unknown outer boundary {outer_boundary!r}")

    f_in, fp_in = _integrate(rhs_out, start, r0, y_wall, rtol)
    norm = math.hypot(f_out, fp_out) * math.hypot(f_in, fp_in)
    if norm == 0.0:
        raise SolverFailure("matched solutions vanished at r0", radius=r0)
    return (fp_out * f_in - fp_in * f_out) / norm


def _shooting_wavefunction(config, coupling, eps, m, sector, wall, rtol,
                           n_points=1200) -> WaveFunction:
    """Reconstruct and normalize the matched eigenfunction."""
    r0 = config.radius
    m_s, mass, v_in, v_out, nu = _radial_terms(config, coupling, m, sector)
    two_m_eps = 2.0 * mass * eps

    def rhs_in(r, y):
        return (y[1], (v_in(r) - two_m_eps) * y[0] - y[1] / r)

    def rhs_out(r, y):
        return (y[1], (v_out(r) - two_m_eps) * y[0] - y[1] / r)

    grid = np.linspace(r0 * 1e-6, wall, n_points)
    k_node = int(np.argmin(np.abs(grid - r0)))
    grid[k_node] = r0
    inner, outer = grid[:k_node + 1], grid[k_node:]
    y0 = (1.0, 0.0) if m_s == 0 else (inner[0] ** m_s, m_s * inner[0] ** (m_s - 1))
    sol_in = solve_ivp(rhs_in, (inner[0], r0), y0, t_eval=inner,
                       method="DOP853", rtol=rtol, atol=1e-280,
                       first_step=(r0 - inner[0]) * 1e-3)
    if eps == 0.0:
        y_wall = (1.0, -nu / wall)
    else:
        kappa_e = math.sqrt(-two_m_eps)
        x = kappa_e * wall
        y_wall = (1.0, kappa_e * float(kvp(nu, x)) / float(kv(nu, x)))
    sol_out = solve_ivp(rhs_out, (wall, r0), y_wall, t_eval=outer[::-1],
                        method="DOP853", rtol=rtol, atol=1e-280,
                        first_step=(wall - r0) * 1e-3)
    if not (sol_in.success and sol_out.success):
        raise SolverFailure("eigenfunction reconstruction failed", radius=r0)
    f_inner = sol_in.y[0]
    f_outer = sol_out.y[0][::-1]
    if f_outer[0] == 0.0:
        raise SolverFailure("outer solution vanished at r0", radius=r0)
    f_outer = f_outer * (f_inner[-1] / f_outer[0])
    samples = np.concatenate([f_inner, f_outer[1:]]).astype(complex)
    wf = WaveFunction("radial", grid, samples, sector=sector,
                      norm_kind="unnormalized", angular_momentum=m_s)
    return wf.normalized()


def find_discrete_levels(config: Cylinder, coupling: Coupling, m: int = 0,
                         sector: tuple = (1, 1),
                         window: tuple = (-0.5, 0.0), *,
                         wall: float = 12.0,
                         outer_boundary: str = "decaying",
                         n_scan: int = 200,
                         eps_tol: float = 1e-10,
                         zero_mode_mismatch_tol: float = 1e-6,
                         rtol: float = 1e-11,
                         store_wavefunctions: bool = True) -> SpectrumResult:
    """Roots of the boundary-matching condition inside `window`.

    Sign changes of the mismatch over an `n_scan`-point scan are refined
    by bisection to `eps_tol`.  Every root's eigenfunction is checked for
    normalizability; in particular the eps = 0 candidate (the closed-form
    zero mode, whose mismatch vanishes for any coupling) only counts when
    its tail power makes it square integrable on the plane, i.e. when
    beta*r0^2 < -1.  An empty result means a clean scan with no roots;
    solver breakdowns raise SolverFailure instead.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ConfigError(f"empty window {window!r}")
    if outer_boundary == "decaying" and hi > 0.0:
        raise ScatteringContinuumError(
            "window extends into the scattering continuum (eps > 0); "
            "decaying tails only exist for eps <= 0")

    def mm(x):
        return match_at_boundary(config, coupling, x, m, sector, wall=wall,
                                 outer_boundary=outer_boundary, rtol=rtol)

    m_s, _, _, _, nu = _radial_terms(config, coupling, m, sector)
    entries = []
    metadata = {"window": [lo, hi], "wall": wall, "n_scan": n_scan,
                "outer_boundary": outer_boundary, "rejected_roots": []}

    # eps = 0 candidate handled separately: it sits on the continuum edge.
    scan_hi = min(hi, -eps_tol) if outer_boundary == "decaying" else hi
    found_zero_mode = False
    if outer_boundary == "decaying" and hi >= 0.0:
        mismatch0 = mm(0.0)
        metadata["zero_mismatch"] = mismatch0
        if abs(mismatch0) < zero_mode_mismatch_tol:
            if nu > 1.0:
                found_zero_mode = True
                wf = (_shooting_wavefunction(config, coupling, 0.0, m, sector,
                                             wall, rtol)
                      if store_wavefunctions else None)
                entries.append(SpectrumEntry(0.0, m, sector, wf))
            else:
                metadata["rejected_roots"].append(
                    {"energy": 0.0, "reason": f"tail power nu={nu:.6g} <= 1 "
                                              "(not normalizable on the plane)"})

    if scan_hi > lo:
        xs = np.linspace(lo, scan_hi, n_scan)
        vals = np.array([mm(x) for x in xs])
        for i in range(len(xs) - 1):
            if not (np.isfinite(vals[i]) and np.isfinite(vals[i + 1])):
                continue
            if vals[i] == 0.0 or vals[i] * vals[i + 1] > 0.0:
                continue
            a, b = xs[i], xs[i + 1]
            fa = vals[i]
            while b - a > eps_tol:
                mid = 0.5 * (a + b)
                fm = mm(mid)
                if fa * fm <= 0.0:
                    b = mid
                else:
                    a, fa = mid, fm
            root = 0.5 * (a + b)
            wf = None
            if store_wavefunctions and outer_boundary == "decaying":
                wf = _shooting_wavefunction(config, coupling, root, m, sector,
                                            wall, rtol)
            entries.append(SpectrumEntry(root, m, sector, wf))

    entries.sort(key=lambda e: e.energy)
    negative_floor = -1e4 * eps_tol
    bad = [e.energy for e in entries if e.energy < negative_floor]
    if bad:
        raise SolverFailure(
            f"roots {bad} below {negative_floor:.1e} contradict H = {{Q,Q+}} >= 0; "
            "integration tolerances are inconsistent")
    susy = "unbroken" if found_zero_mode else "broken"
    return SpectrumResult(entries, susy, "shooting", eps_tol, metadata)
