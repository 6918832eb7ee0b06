"""Charge geometries and their electric-field profiles.

Five source geometries are supported.  Four live on the symmetry axis
(coordinate z): a charged ring, a charged disk, an infinite charged plane,
and an infinite uniformly charged volume with a symmetric gap of width L.
The fifth is the planar problem of an infinite charged cylinder (radial
coordinate r).  All fields follow the rationalised convention div E = rho;
the cylinder field is

    E(r) = rho*r/2          for r <= r0,
    E(r) = rho*r0^2/(2 r)   for r >= r0,

and the axial on-axis fields are fixed so that the generic zero mode
exp(-(e kappa/2M) * integral of E) reproduces the closed-form ground
states exactly.

Points where a profile is not smooth (z = 0 for surface sources,
z = +-L/2 for the gapped volume, r = r0 for the cylinder) are carried as
explicit breakpoint data so solvers can place grid nodes on them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .errors import ConfigError

__all__ = [
    "Ring", "Disk", "Plane", "SlabGap", "Cylinder", "ChargeConfig",
    "FieldProfile", "field_profile", "divergence_at", "charge_parameter",
    "characteristic_length", "make_axial_grid", "RadialGrid", "make_radial_grid",
]


def _require_positive(name: str, value: float) -> None:
    if not value > 0.0:
        raise ConfigError(f"{name} must be positive, got {value}")


@dataclass(frozen=True)
class Ring:
    """Uniformly charged ring of radius `radius` and total charge `total_charge`."""
    total_charge: float
    radius: float
    geometry = "ring"
    domain = "axial"

    def __post_init__(self):
        _require_positive("r0", self.radius)


@dataclass(frozen=True)
class Disk:
    """Uniformly charged disk; `total_charge` spread over radius `radius`."""
    total_charge: float
    radius: float
    geometry = "disk"
    domain = "axial"

    def __post_init__(self):
        _require_positive("r0", self.radius)

    @property
    def surface_density(self) -> float:
        return self.total_charge / (math.pi * self.radius**2)


@dataclass(frozen=True)
class Plane:
    """Infinite plane with charge `surface_density` per unit area."""
    surface_density: float
    geometry = "plane"
    domain = "axial"


@dataclass(frozen=True)
class SlabGap:
    """Infinite uniform volume charge with a symmetric slab of width
    `gap_width` removed.  gap_width = 0 degenerates to the gap-free
    uniform volume (linear field, oscillator spectrum)."""
    volume_density: float
    gap_width: float
    geometry = "slab_gap"
    domain = "axial"

    def __post_init__(self):
        if self.gap_width < 0.0:
            raise ConfigError(f"L must be non-negative, got {self.gap_width}")


@dataclass(frozen=True)
class Cylinder:
    """Infinite cylinder of radius `radius` with uniform `volume_density`."""
    volume_density: float
    radius: float
    geometry = "cylinder"
    domain = "radial"

    def __post_init__(self):
        _require_positive("r0", self.radius)


ChargeConfig = Ring | Disk | Plane | SlabGap | Cylinder


def charge_parameter(config: ChargeConfig) -> float:
    """The single charge parameter of a geometry (Q, sigma, or rho)."""
    if isinstance(config, (Ring, Disk)):
        return config.total_charge
    if isinstance(config, Plane):
        return config.surface_density
    return config.volume_density


@dataclass(frozen=True)
class FieldProfile:
    """Closed-form electric field of one geometry.

    `field_derivative` and `divergence` are the smooth parts only; surface
    sources additionally carry a delta contribution to dE/dx recorded in
    `surface_deltas` (breakpoint -> jump of E).  `antiderivative` is the
    exact integral of E from 0 to x.
    """

    domain: str
    field: Callable
    field_derivative: Callable
    divergence: Callable
    antiderivative: Callable
    breakpoints: tuple
    surface_deltas: dict
    config: ChargeConfig = field(repr=False, default=None)

    def divergence_two_sided(self, x: float) -> tuple:
        """One-sided limits (left, right) of the smooth divergence at x."""
        eps = 1e-9 * max(abs(x), 1.0)
        return (float(self.divergence(x - eps)), float(self.divergence(x + eps)))

    def antiderivative_quadrature(self, x) -> np.ndarray:
        """Integral of E from 0 to x by adaptive quadrature, split at
        breakpoints.  Kept as an independent cross-check of the analytic
        antiderivative."""
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(xs)
        for i, xi in enumerate(xs):
            pts = [b for b in self.breakpoints if 0.0 < abs(b) < abs(xi)]
            total, lo = 0.0, 0.0
            bounds = sorted({xi} | {math.copysign(abs(b), xi) for b in pts}, key=abs)
            for hi in bounds:
                val, _ = quad(self.field, lo, hi, limit=200)
                total += val
                lo = hi
            out[i] = total
        return out if np.ndim(x) else float(out[0])


def field_profile(config: ChargeConfig) -> FieldProfile:
    """Closed-form field, derivative, divergence and antiderivative of E."""
    if isinstance(config, Ring):
        q, r0 = config.total_charge, config.radius

        def E(z):
            z = np.asarray(z, dtype=float)
            return 0.5 * q * z / (z * z + r0 * r0) ** 1.5

        def dE(z):
            z = np.asarray(z, dtype=float)
            return 0.5 * q * (r0 * r0 - 2.0 * z * z) / (z * z + r0 * r0) ** 2.5

        def anti(z):
            z = np.asarray(z, dtype=float)
            return 0.5 * q * (1.0 / r0 - 1.0 / np.sqrt(z * z + r0 * r0))

        return FieldProfile("axial", E, dE, dE, anti, (), {}, config)

    if isinstance(config, Disk):
        sigma, r0 = config.surface_density, config.radius

        def E(z):
            z = np.asarray(z, dtype=float)
            return 0.5 * sigma * (np.sign(z) - z / np.sqrt(z * z + r0 * r0))

        def dE(z):
            # smooth part; the sign jump adds sigma*delta(z)
            z = np.asarray(z, dtype=float)
            return -0.5 * sigma * r0 * r0 / (z * z + r0 * r0) ** 1.5

        def anti(z):
            z = np.asarray(z, dtype=float)
            return 0.5 * sigma * (np.abs(z) - np.sqrt(z * z + r0 * r0) + r0)

        return FieldProfile("axial", E, dE, dE, anti, (0.0,), {0.0: sigma}, config)

    if isinstance(config, Plane):
        sigma = config.surface_density

        def E(z):
            return 0.5 * sigma * np.sign(np.asarray(z, dtype=float))

        def dE(z):
            return np.zeros_like(np.asarray(z, dtype=float))

        def anti(z):
            return 0.5 * sigma * np.abs(np.asarray(z, dtype=float))

        return FieldProfile("axial", E, dE, dE, anti, (0.0,), {0.0: sigma}, config)

    if isinstance(config, SlabGap):
        rho, L = config.volume_density, config.gap_width
        half = 0.5 * L

        def E(z):
            z = np.asarray(z, dtype=float)
            out = rho * (z - np.sign(z) * half)
            return np.where(np.abs(z) < half, 0.0, out)

        def dE(z):
            z = np.asarray(z, dtype=float)
            return np.where(np.abs(z) < half, 0.0, rho)

        def anti(z):
            z = np.asarray(z, dtype=float)
            out = 0.5 * rho * (np.abs(z) - half) ** 2
            return np.where(np.abs(z) < half, 0.0, out)

        bps = (-half, half) if L > 0.0 else ()
        return FieldProfile("axial", E, dE, dE, anti, bps, {}, config)

    if isinstance(config, Cylinder):
        rho, r0 = config.volume_density, config.radius

        def E(r):
            r = np.asarray(r, dtype=float)
            inner = 0.5 * rho * r
            with np.errstate(divide="ignore", invalid="ignore"):
                outer = 0.5 * rho * r0 * r0 / np.where(r == 0.0, np.nan, r)
            return np.where(r <= r0, inner, outer)

        def dE(r):
            r = np.asarray(r, dtype=float)
            with np.errstate(divide="ignore", invalid="ignore"):
                outer = -0.5 * rho * r0 * r0 / np.where(r == 0.0, np.nan, r) ** 2
            return np.where(r < r0, 0.5 * rho, outer)

        def div(r):
            # planar divergence (1/r) d(r E)/dr
            r = np.asarray(r, dtype=float)
            return np.where(r < r0, rho, 0.0)

        def anti(r):
            r = np.asarray(r, dtype=float)
            inner = 0.25 * rho * r * r
            with np.errstate(divide="ignore", invalid="ignore"):
                outer = 0.25 * rho * r0 * r0 + 0.5 * rho * r0 * r0 * np.log(
                    np.where(r <= 0.0, np.nan, r) / r0)
            return np.where(r <= r0, inner, outer)

        return FieldProfile("radial", E, dE, div, anti, (r0,), {}, config)

    raise ConfigError(f"unsupported configuration {config!r}")


def divergence_at(config: ChargeConfig, point: float):
    """Charge density seen by the field at `point`.

    Cylinder: rho inside, 0 outside.  Axial geometries: the smooth dE/dz.
    At a breakpoint the two one-sided limits are returned as a pair.
    """
    profile = field_profile(config)
    for b in profile.breakpoints:
        if math.isclose(point, b, rel_tol=1e-12, abs_tol=1e-300):
            return profile.divergence_two_sided(b)
    return float(profile.divergence(point))


def characteristic_length(config: ChargeConfig, coupling=None) -> float:
    """Length scale used for default grid extents."""
    if isinstance(config, (Ring, Disk, Cylinder)):
        return config.radius
    if isinstance(config, Plane):
        if coupling is None or coupling.value == 0.0:
            return 1.0
        return 2.0 / abs(coupling.value)
    # gapped volume: larger of the gap and the Gaussian tail width
    width = 1.0 if (coupling is None or coupling.value == 0.0) else 1.0 / math.sqrt(
        abs(coupling.value))
    return max(config.gap_width, width)


# ---------------------------------------------------------------------------
# Grids with breakpoints on nodes
# ---------------------------------------------------------------------------

def make_axial_grid(config: ChargeConfig, extent: float, n: int) -> np.ndarray:
    """Uniform symmetric grid on [-extent, extent] with every breakpoint on
    a node and z = 0 always a node.  About `n` points (exact for geometries
    without interior breakpoints; snapped for the gapped volume)."""
    if config.domain != "axial":
        raise ConfigError("axial grid requested for a radial geometry")
    _require_positive("extent", extent)
    if n < 9:
        raise ConfigError(f"grid_n too small: {n}")
    half_n = (n - 1) // 2
    h = extent / half_n
    if isinstance(config, SlabGap) and config.gap_width > 0.0:
        half_gap = 0.5 * config.gap_width
        if half_gap >= extent:
            raise ConfigError("extent must exceed L/2 so the grid covers the breakpoints")
        k = max(1, round(half_gap / h))
        h = half_gap / k
        half_n = round(extent / h)
    return h * np.arange(-half_n, half_n + 1)


@dataclass(frozen=True)
class RadialGrid:
    """Half-offset uniform radial grid r_i = (i + 1/2) h.

    The cylinder surface sits exactly on node `radius_index`
    (r0 = (j + 1/2) h) and the implicit Dirichlet wall exactly at
    `wall` = (N + 1/2) h.  Refining by 3 (j -> 3j+1, N -> 3N+1) preserves
    both, which is what makes Richardson extrapolation of eigenvalues
    clean across resolutions.
    """

    r: np.ndarray
    spacing: float
    wall: float
    radius_index: int

    def refined(self) -> "RadialGrid":
        j2 = 3 * self.radius_index + 1
        n2 = 3 * len(self.r) + 1
        h2 = self.spacing / 3.0
        return RadialGrid((np.arange(n2) + 0.5) * h2, h2, self.wall, j2)


def make_radial_grid(radius: float, wall: float, nodes_to_radius: int = 120) -> RadialGrid:
    """Radial grid with r0 on a node and the Dirichlet wall beyond it."""
    _require_positive("r0", radius)
    if wall <= 2.0 * radius:
        raise ConfigError("wall must exceed 2*r0")
    j = int(nodes_to_radius)
    if j < 4:
        raise ConfigError("nodes_to_radius must be at least 4")
    h = radius / (j + 0.5)
    n = int(round(wall / h - 0.5))
    return RadialGrid((np.arange(n) + 0.5) * h, h, (n + 0.5) * h, j)
