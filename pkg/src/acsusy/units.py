"""Unit systems, physical constants, and the geometry coupling constants.

Three unit systems are supported:

``natural``
    hbar = c = 1, energies in units of the neutron rest energy (so the
    default mass is exactly 1), lengths in the reduced neutron Compton
    wavelength, and the elementary charge e = sqrt(4*pi*alpha_fs).  The
    charge normalisation matches the rationalised field convention
    div E = rho used throughout the field profiles.

``gaussian``
    erg / cm / esu, with e = 4.8032e-10 esu.

``si``
    J / m / C, with e = 1.602176634e-19 C.

The trapping threshold on the line-charge density lambda = rho*pi*r0^2 is
lambda_min = 4*pi*M*c^2 / |e*kappa|.  Its published numerical estimate
(~4.6973e-3 C/cm) is only reproduced with a moment magnitude of about 2.79
rather than the neutron's 1.913; both evaluations are computed side by
side, see :func:`lambda_min_report`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import ConfigError

# CODATA 2018
NEUTRON_MASS_MEV = 939.56542052          # neutron rest energy, MeV
FINE_STRUCTURE_CONSTANT = 7.2973525693e-3
HBARC_MEV_FM = 197.3269804               # hbar*c, MeV*fm
ELEMENTARY_CHARGE_COULOMB = 1.602176634e-19
ESU_PER_COULOMB = 2.99792458e9
ERG_PER_MEV = 1.602176634e-6
CM_PER_FM = 1.0e-13

# Anomalous moment presets (magnetic moment in nuclear magnetons).
KAPPA_NEUTRON = -1.91304273
# Moment magnitude that reproduces the published lambda_min estimate below
# (numerically the proton moment, not the neutron's).
KAPPA_REFERENCE_MAGNITUDE = 2.79284734463
# Published threshold estimate the physical pipeline is checked against.
REFERENCE_LAMBDA_MIN_C_PER_CM = 4.6973e-3

ELEMENTARY_CHARGE_ESU = ELEMENTARY_CHARGE_COULOMB * ESU_PER_COULOMB
ELEMENTARY_CHARGE_NATURAL = math.sqrt(4.0 * math.pi * FINE_STRUCTURE_CONSTANT)

UNIT_SYSTEMS = ("natural", "gaussian", "si")


@dataclass(frozen=True)
class UnitContext:
    """Self-consistent constants for one unit system.

    ``energy_to_erg``, ``length_to_cm`` and ``charge_to_esu`` convert one
    unit of the context's energy/length/charge into Gaussian base units;
    all cross-system conversions route through them.
    """

    system: str
    hbar_c: float
    electron_charge: float
    default_mass: float
    default_kappa: float
    energy_to_erg: float
    length_to_cm: float
    charge_to_esu: float
    energy_unit: str
    length_unit: str
    charge_unit: str


def make_unit_context(system: str) -> UnitContext:
    """Build the constants table for one of the supported unit systems."""
    if system == "natural":
        energy_to_erg = NEUTRON_MASS_MEV * ERG_PER_MEV
        length_to_cm = (HBARC_MEV_FM / NEUTRON_MASS_MEV) * CM_PER_FM
        return UnitContext(
            system="natural",
            hbar_c=1.0,
            electron_charge=ELEMENTARY_CHARGE_NATURAL,
            default_mass=1.0,
            default_kappa=KAPPA_NEUTRON,
            energy_to_erg=energy_to_erg,
            length_to_cm=length_to_cm,
            charge_to_esu=ELEMENTARY_CHARGE_ESU / ELEMENTARY_CHARGE_NATURAL,
            energy_unit="M_n c^2",
            length_unit="hbar/(M_n c)",
            charge_unit="natural (e = sqrt(4 pi alpha))",
        )
    if system == "gaussian":
        return UnitContext(
            system="gaussian",
            hbar_c=(HBARC_MEV_FM * ERG_PER_MEV) * CM_PER_FM,
            electron_charge=ELEMENTARY_CHARGE_ESU,
            default_mass=NEUTRON_MASS_MEV * ERG_PER_MEV,
            default_kappa=KAPPA_NEUTRON,
            energy_to_erg=1.0,
            length_to_cm=1.0,
            charge_to_esu=1.0,
            energy_unit="erg",
            length_unit="cm",
            charge_unit="esu",
        )
    if system == "si":
        return UnitContext(
            system="si",
            hbar_c=(HBARC_MEV_FM * ERG_PER_MEV * 1.0e-7) * (CM_PER_FM * 1.0e-2),
            electron_charge=ELEMENTARY_CHARGE_COULOMB,
            default_mass=NEUTRON_MASS_MEV * ERG_PER_MEV * 1.0e-7,
            default_kappa=KAPPA_NEUTRON,
            energy_to_erg=1.0e7,
            length_to_cm=1.0e2,
            charge_to_esu=ESU_PER_COULOMB,
            energy_unit="J",
            length_unit="m",
            charge_unit="C",
        )
    raise ConfigError(f"unknown unit system {system!r}; expected one of {UNIT_SYSTEMS}")


def convert_energy(value: float, src: UnitContext, dst: UnitContext) -> float:
    return value * src.energy_to_erg / dst.energy_to_erg


def convert_length(value: float, src: UnitContext, dst: UnitContext) -> float:
    return value * src.length_to_cm / dst.length_to_cm


def convert_charge(value: float, src: UnitContext, dst: UnitContext) -> float:
    return value * src.charge_to_esu / dst.charge_to_esu


# ---------------------------------------------------------------------------
# Geometry couplings
# ---------------------------------------------------------------------------

COUPLING_KINDS = ("beta_ring_disk", "alpha_plane", "alpha_volume", "beta_cylinder")

# Couplings enter the zero-mode exponents as pure powers of length
# (beta/sqrt(z^2+r0^2), alpha*|z|, alpha*z^2, beta*r^2 all dimensionless),
# which fixes how they convert between systems.
COUPLING_LENGTH_POWER = {
    "beta_ring_disk": 1,
    "alpha_plane": -1,
    "alpha_volume": -2,
    "beta_cylinder": -2,
}


@dataclass(frozen=True)
class Coupling:
    """A geometry coupling constant plus the data needed to rebuild the
    superpotential W(x) = moment_scale * E(x), moment_scale = e*kappa/(2*mass).
    """

    kind: str
    value: float
    moment_scale: float
    mass: float
    kappa: float
    defining_formula: str


def coupling_for(config, ctx: UnitContext, kappa: float | None = None,
                 mass: float | None = None) -> Coupling:
    """Coupling constant for a charge configuration.

    Ring/disk carry beta = -e*Q*kappa/(4*M); the plane carries
    alpha = -e*sigma*kappa/(2*M); the gapped volume alpha = -e*rho*kappa/(4*M);
    the cylinder beta = -e*rho*kappa/(4*M).
    """
    kappa = ctx.default_kappa if kappa is None else float(kappa)
    mass = ctx.default_mass if mass is None else float(mass)
    if not mass > 0.0:
        raise ConfigError(f"mass must be positive, got {mass}")
    e = ctx.electron_charge
    geometry = config.geometry
    if geometry in ("ring", "disk"):
        kind = "beta_ring_disk"
        value = -e * config.total_charge * kappa / (4.0 * mass)
        formula = "beta = -e*Q*kappa/(4*M)"
    elif geometry == "plane":
        kind = "alpha_plane"
        value = -e * config.surface_density * kappa / (2.0 * mass)
        formula = "alpha = -e*sigma*kappa/(2*M)"
    elif geometry == "slab_gap":
        kind = "alpha_volume"
        value = -e * config.volume_density * kappa / (4.0 * mass)
        formula = "alpha = -e*rho*kappa/(4*M)"
    elif geometry == "cylinder":
        kind = "beta_cylinder"
        value = -e * config.volume_density * kappa / (4.0 * mass)
        formula = "beta = -e*rho*kappa/(4*M)"
    else:
        raise ConfigError(f"unknown geometry {geometry!r}")
    return Coupling(
        kind=kind,
        value=value,
        moment_scale=e * kappa / (2.0 * mass),
        mass=mass,
        kappa=kappa,
        defining_formula=formula,
    )


def convert_coupling(coupling: Coupling, src: UnitContext, dst: UnitContext) -> Coupling:
    """Convert a coupling between unit systems.

    The value converts as length**power (see COUPLING_LENGTH_POWER); the
    moment scale as length/charge; the mass as an energy.
    """
    lf = src.length_to_cm / dst.length_to_cm
    qf = src.charge_to_esu / dst.charge_to_esu
    power = COUPLING_LENGTH_POWER[coupling.kind]
    return replace(
        coupling,
        value=coupling.value * lf**power,
        moment_scale=coupling.moment_scale * lf / qf,
        mass=convert_energy(coupling.mass, src, dst),
    )


# ---------------------------------------------------------------------------
# Minimum line charge for unbroken SUSY
# ---------------------------------------------------------------------------

def lambda_min(ctx: UnitContext, kappa: float | None = None,
               mass: float | None = None) -> float:
    """Threshold line-charge density 4*pi*mass/(|e*kappa|).

    The cylinder ground state is normalizable only when beta*r0^2 < -1,
    i.e. when lambda = rho*pi*r0^2 exceeds this value.  Returned in the
    context's charge per length (natural: per reduced Compton wavelength;
    gaussian: esu/cm; si: C/m).  For gaussian and si the rest energy
    mass*c^2 is used, mirroring the standard published evaluation.
    """
    kappa = ctx.default_kappa if kappa is None else float(kappa)
    mass = ctx.default_mass if mass is None else float(mass)
    if kappa == 0.0:
        raise ConfigError("kappa must be nonzero: the threshold diverges at kappa = 0")
    if not mass > 0.0:
        raise ConfigError(f"mass must be positive, got {mass}")
    return 4.0 * math.pi * mass / abs(ctx.electron_charge * kappa)


def lambda_min_report(kappa: float | None = None) -> dict:
    """lambda_min in every supported unit system and under both moment presets.

    The published estimate (~4.6973e-3 C/cm) is reproduced by the
    |kappa| ~ 2.79 preset, not the neutron moment; both numbers and the
    deviation are reported so the discrepancy stays visible.
    """
    natural = make_unit_context("natural")
    gaussian = make_unit_context("gaussian")
    kappa = natural.default_kappa if kappa is None else float(kappa)

    def physical(kap):
        esu_per_cm = lambda_min(gaussian, kappa=kap)
        return {
            "esu_per_cm": esu_per_cm,
            "coulomb_per_cm": esu_per_cm / ESU_PER_COULOMB,
            "coulomb_per_m": esu_per_cm / ESU_PER_COULOMB * 100.0,
        }

    requested = physical(kappa)
    reference = physical(KAPPA_REFERENCE_MAGNITUDE)
    neutron = physical(KAPPA_NEUTRON)
    return {
        "kappa": kappa,
        "natural_units": lambda_min(natural, kappa=kappa),
        "physical": requested,
        "presets": {
            "neutron_kappa": {"kappa": KAPPA_NEUTRON, **neutron},
            "reference_kappa": {"kappa": KAPPA_REFERENCE_MAGNITUDE, **reference},
        },
        "published_estimate_c_per_cm": REFERENCE_LAMBDA_MIN_C_PER_CM,
        "reference_vs_published_rel_dev": abs(
            reference["coulomb_per_cm"] - REFERENCE_LAMBDA_MIN_C_PER_CM
        ) / REFERENCE_LAMBDA_MIN_C_PER_CM,
        "neutron_vs_published_rel_dev": abs(
            neutron["coulomb_per_cm"] - REFERENCE_LAMBDA_MIN_C_PER_CM
        ) / REFERENCE_LAMBDA_MIN_C_PER_CM,
    }
