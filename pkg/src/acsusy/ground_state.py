"""Zero-mode ground states, SUSY-breaking classification, normalization.

The first-order condition (d/dx + W)phi = 0 with superpotential
W = (e kappa / 2M) E gives the candidate ground state
phi = exp(-(e kappa/2M) * integral of E).  Whether that state is
normalizable decides whether supersymmetry is unbroken:

* ring and disk zero modes tend to a nonzero constant, so they are never
  normalizable (broken SUSY);
* plane and gapped-volume zero modes decay exponentially or faster
  (unbroken SUSY);
* the cylinder zero mode decays as r**(beta r0^2) outside and is
  normalizable on the plane exactly when beta*r0^2 < -1.

Norm conventions: integral |phi|^2 dz = 1 on the axis and
2 pi integral |phi|^2 r dr = 1 on the plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .configurations import (
    ChargeConfig, Cylinder, Disk, FieldProfile, Plane, Ring, SlabGap,
    charge_parameter, field_profile,
)
from .errors import ConfigError, OverflowGuardError, ThresholdViolation
from .units import Coupling

__all__ = [
    "WaveFunction", "NormVerdict", "zero_mode_axial", "closed_form_axial",
    "zero_mode_radial", "classify_susy", "normalization_cylinder",
    "probability_outside", "norm_growth_ratio",
]

DEFAULT_EXPONENT_CAP = 700.0


@dataclass
class WaveFunction:
    """A component wavefunction sampled on a 1D grid.

    `sector` is the (tau3, sigma3) label; `mask`, when present, flags
    nodes whose values are not trustworthy (breakpoints of the profile).
    """

    domain: str
    grid: np.ndarray
    samples: np.ndarray
    sector: tuple = (1, 1)
    norm_kind: str = "unnormalized"
    angular_momentum: int = 0
    mask: Optional[np.ndarray] = None

    def norm_squared(self) -> float:
        density = np.abs(self.samples) ** 2
        if self.domain == "axial":
            return float(np.trapezoid(density, self.grid))
        return float(2.0 * math.pi * np.trapezoid(density * self.grid, self.grid))

    def norm(self) -> float:
        return math.sqrt(self.norm_squared())

    def normalized(self) -> "WaveFunction":
        n = self.norm()
        if not np.isfinite(n) or n == 0.0:
            raise ValueError("cannot normalize: norm is zero or non-finite")
        return replace(self, samples=self.samples / n, norm_kind="normalized")


def _exponent_to_samples(exponent: np.ndarray, cap: float) -> np.ndarray:
    """exp(exponent) up to an overall constant, guarded in log space."""
    shifted = exponent - exponent.max()
    span = -shifted.min()
    if not np.isfinite(span) or span > cap:
        raise OverflowGuardError(
            f"zero-mode exponent spans {span:.3g} (cap {cap:.3g}): "
            "profile too strong for the grid extent")
    return np.exp(shifted)


def zero_mode_axial(profile: FieldProfile, coupling: Coupling, grid: np.ndarray,
                    method: str = "analytic",
                    exponent_cap: float = DEFAULT_EXPONENT_CAP) -> WaveFunction:
    """Zero mode of the tau3 = +1 sector, phi = exp(-(e kappa/2M) int_0^z E).

    `method` selects the analytic antiderivative of E or adaptive
    quadrature; the two agree to quadrature accuracy and serve as
    cross-checks of each other.  The overall constant is fixed by
    max |phi| = 1; exponent ranges beyond `exponent_cap` raise
    OverflowGuardError.
    """
    if profile.domain != "axial":
        raise ConfigError("zero_mode_axial needs an axial profile")
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) <= 0.0):
        raise ConfigError("grid must be strictly increasing")
    for b in profile.breakpoints:
        if not np.isclose(grid, b, rtol=0.0, atol=1e-9 * max(1.0, abs(b))).any():
            raise ConfigError(f"grid must contain breakpoint {b} as a node")
    if method == "analytic":
        integral = profile.antiderivative(grid)
    elif method == "quadrature":
        integral = profile.antiderivative_quadrature(grid)
    else:
        raise ConfigError(f"unknown method {method!r}")
    exponent = -coupling.moment_scale * np.asarray(integral, dtype=float)
    samples = _exponent_to_samples(exponent, exponent_cap).astype(complex)
    return WaveFunction("axial", grid, samples, sector=(1, 1))


def closed_form_axial(config: ChargeConfig, coupling: Coupling,
                      grid: np.ndarray) -> WaveFunction:
    """Explicit closed-form ground states of the four axial geometries.

    ring:   exp(|beta| / sqrt(z^2 + r0^2))                 (not normalizable)
    disk:   exp(-(|beta|/(pi r0^2)) (|z| - sqrt(z^2+r0^2)))(not normalizable)
    plane:  sqrt(|alpha|/2) exp(-|alpha| |z| / 2)          (norm = 1)
    volume with gap: 1 inside, exp(-|alpha| (|z|-L/2)^2) outside, then
            normalized; the interior constant is fixed by continuity at
            |z| = L/2.
    """
    grid = np.asarray(grid, dtype=float)
    z = grid
    if isinstance(config, Ring):
        b = abs(coupling.value)
        samples = np.exp(b / np.sqrt(z * z + config.radius**2))
        return WaveFunction("axial", grid, samples.astype(complex),
                            norm_kind="non_normalizable")
    if isinstance(config, Disk):
        b = abs(coupling.value)
        r0 = config.radius
        samples = np.exp(-(b / (math.pi * r0 * r0)) * (np.abs(z) - np.sqrt(z * z + r0 * r0)))
        return WaveFunction("axial", grid, samples.astype(complex),
                            norm_kind="non_normalizable")
    if isinstance(config, Plane):
        a = abs(coupling.value)
        if a == 0.0:
            return WaveFunction("axial", grid, np.ones_like(z, dtype=complex),
                                norm_kind="non_normalizable")
        samples = math.sqrt(0.5 * a) * np.exp(-0.5 * a * np.abs(z))
        return WaveFunction("axial", grid, samples.astype(complex), norm_kind="normalized")
    if isinstance(config, SlabGap):
        a = abs(coupling.value)
        if a == 0.0:
            return WaveFunction("axial", grid, np.ones_like(z, dtype=complex),
                                norm_kind="non_normalizable")
        half = 0.5 * config.gap_width
        u = np.maximum(np.abs(z) - half, 0.0)
        samples = np.exp(-a * u * u)
        # closed-form norm: L + sqrt(pi/(2 a)) for |phi|^2
        c = 1.0 / math.sqrt(config.gap_width + math.sqrt(math.pi / (2.0 * a)))
        return WaveFunction("axial", grid, (c * samples).astype(complex),
                            norm_kind="normalized")
    raise ConfigError(f"closed_form_axial does not handle {config!r}")


def zero_mode_radial(config: Cylinder, coupling: Coupling,
                     grid: np.ndarray) -> WaveFunction:
    """Piecewise cylinder zero mode.

    phi_< = A exp(beta r^2 / 2) inside, phi_> = B r**(beta r0^2) outside,
    with A exp(beta r0^2/2) = B r0**(beta r0^2) (value and derivative are
    then automatically continuous at r0).  Returned normalized when
    beta*r0^2 < -1, otherwise unnormalized with A = 1.
    """
    if not isinstance(config, Cylinder):
        raise ConfigError("zero_mode_radial needs a cylinder configuration")
    grid = np.asarray(grid, dtype=float)
    if np.any(grid < 0.0):
        raise ConfigError("radial grid must be non-negative")
    r0 = config.radius
    if not np.isclose(grid, r0, rtol=1e-9, atol=0.0).any():
        raise ConfigError("grid must contain r0 as a node")
    beta = coupling.value
    s = beta * r0 * r0
    if beta == 0.0:
        return WaveFunction("radial", grid, np.ones_like(grid, dtype=complex),
                            norm_kind="non_normalizable")
    inside = grid <= r0
    with np.errstate(divide="ignore"):
        log_out = 0.5 * s + s * np.log(np.where(grid > 0.0, grid, np.nan) / r0)
    exponent = np.where(inside, 0.5 * beta * grid * grid, log_out)
    samples = np.exp(exponent)
    if s < -1.0:
        a2, _ = normalization_cylinder(beta, r0)
        samples = samples * math.sqrt(a2)
        return WaveFunction("radial", grid, samples.astype(complex),
                            norm_kind="normalized")
    return WaveFunction("radial", grid, samples.astype(complex),
                        norm_kind="non_normalizable")


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NormVerdict:
    """SUSY verdict from the tail behaviour of the zero mode.

    `divergence_mode` is set for broken SUSY: constant_tail (zero mode
    tends to a constant), power_tail (grows as a power), or
    threshold_violation (cylinder with beta*r0^2 >= -1).  For unbroken
    SUSY `constants` holds the normalization data.
    """

    status: str
    divergence_mode: Optional[str] = None
    constants: dict = None

    @property
    def unbroken(self) -> bool:
        return self.status == "unbroken"


def classify_susy(config: ChargeConfig, coupling: Coupling) -> NormVerdict:
    """Analytic normalizability verdict for the zero-mode ground state."""
    param = charge_parameter(config)
    if param == 0.0 or coupling.value == 0.0:
        return NormVerdict("broken", "constant_tail")
    if isinstance(config, (Ring, Disk)):
        return NormVerdict("broken", "constant_tail")
    if isinstance(config, Plane):
        a = abs(coupling.value)
        return NormVerdict("unbroken", constants={"amplitude": math.sqrt(0.5 * a)})
    if isinstance(config, SlabGap):
        a = abs(coupling.value)
        c = 1.0 / math.sqrt(config.gap_width + math.sqrt(math.pi / (2.0 * a)))
        return NormVerdict("unbroken", constants={"amplitude": c})
    if isinstance(config, Cylinder):
        beta = coupling.value
        s = beta * config.radius**2
        if beta > 0.0:
            return NormVerdict("broken", "power_tail")
        if s >= -1.0:
            return NormVerdict("broken", "threshold_violation")
        a2, b2 = normalization_cylinder(beta, config.radius)
        return NormVerdict("unbroken", constants={
            "A_squared": a2,
            "B_squared": b2,
            "probability_outside": probability_outside(beta, config.radius),
        })
    raise ConfigError(f"cannot classify {config!r}")


def norm_growth_ratio(config: ChargeConfig, coupling: Coupling,
                      extent: float, factor: float = 2.0,
                      points: int = 4001) -> float:
    """Truncated-norm growth ratio norm(factor*extent)/norm(extent).

    Numerical cross-check of classify_susy: the ratio tends to 1 for a
    normalizable zero mode and stays bounded away from 1 otherwise (it
    tends to `factor` for a constant tail).
    """
    if config.domain == "axial":
        big = np.linspace(-factor * extent, factor * extent, points)
        wf = closed_form_axial(config, coupling, big)
        density = np.abs(wf.samples) ** 2
        inner = np.abs(big) <= extent
        n_small = np.trapezoid(density[inner], big[inner])
        n_big = np.trapezoid(density, big)
        return float(n_big / n_small)
    r0 = config.radius
    h = factor * extent / (points - 0.5)
    grid = (np.arange(points) + 0.5) * h
    k = int(round(r0 / h - 0.5))
    grid[k] = r0  # keep r0 a node
    wf = zero_mode_radial(config, coupling, grid)
    density = np.abs(wf.samples) ** 2 * grid
    inner = grid <= extent
    return float(np.trapezoid(density, grid) / np.trapezoid(density[inner], grid[inner]))


# ---------------------------------------------------------------------------
# Cylinder normalization
# ---------------------------------------------------------------------------

def normalization_cylinder(beta: float, r0: float) -> tuple:
    """Closed-form (|A|^2, |B|^2) normalizing the cylinder zero mode.

    |A|^2 = |b|(|b|r0^2 - 1) e^{|b|r0^2/2} /
            (pi [2(|b|r0^2-1) sinh(|b|r0^2/2) + |b|r0^2 e^{-|b|r0^2/2}])

    valid for beta*r0^2 < -1; |B|^2 follows from continuity at r0.
    """
    s = beta * r0 * r0
    if not s < -1.0:
        raise ThresholdViolation(
            f"beta*r0^2 = {s:.6g} >= -1: zero mode not normalizable")
    b = abs(beta)
    sb = abs(s)
    num = b * (sb - 1.0) * math.exp(0.5 * sb)
    den = math.pi * (2.0 * (sb - 1.0) * math.sinh(0.5 * sb) + sb * math.exp(-0.5 * sb))
    a2 = num / den
    b2 = a2 * math.exp(-sb) * r0 ** (2.0 * sb)
    return a2, b2


def probability_outside(beta: float, r0: float) -> float:
    """Probability 2 pi |B|^2 int_r0^inf r^(2 beta r0^2 + 1) dr of finding
    the particle outside the cylinder, in closed form."""
    s = beta * r0 * r0
    _, b2 = normalization_cylinder(beta, r0)
    return float(2.0 * math.pi * b2 * r0 ** (2.0 * s + 2.0) / (-2.0 * s - 2.0))


def normalization_cylinder_quadrature(beta: float, r0: float) -> float:
    """|A|^2 from adaptive quadrature of the norm integral; the
    independent oracle for the closed form above."""
    s = beta * r0 * r0
    if not s < -1.0:
        raise ThresholdViolation(f"beta*r0^2 = {s:.6g} >= -1")
    inner, _ = quad(lambda r: r * math.exp(beta * r * r), 0.0, r0,
                    epsabs=1e-14, epsrel=1e-13)
    outer, _ = quad(lambda r: r ** (2.0 * s + 1.0), r0, np.inf,
                    epsabs=1e-14, epsrel=1e-13)
    ratio_b2_a2 = math.exp(s) * r0 ** (-2.0 * s)
    return 1.0 / (2.0 * math.pi * (inner + ratio_b2_a2 * outer))
