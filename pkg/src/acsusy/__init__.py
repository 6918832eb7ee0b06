"""Numerical toolkit for the supersymmetric ground states of a neutral
spin-1/2 particle with an anomalous magnetic moment in electric-field
configurations: zero-mode construction and classification, discretized
superalgebra checks, and the boundary-matching eigenvalue problem of the
charged-cylinder geometry."""

from .configurations import (
    ChargeConfig, Cylinder, Disk, FieldProfile, Plane, RadialGrid, Ring,
    SlabGap, characteristic_length, divergence_at, field_profile,
    make_axial_grid, make_radial_grid,
)
from .errors import (
    AcsusyError, ConfigError, GridResolutionError, OverflowGuardError,
    ScatteringContinuumError, SolverFailure, ThresholdViolation,
)
from .ground_state import (
    NormVerdict, WaveFunction, classify_susy, closed_form_axial,
    norm_growth_ratio, normalization_cylinder, probability_outside,
    zero_mode_axial, zero_mode_radial,
)
from .spectrum import (
    SpectrumEntry, SpectrumResult, eigensolve, find_discrete_levels,
    match_at_boundary, richardson_pair,
)
from .susy_algebra import (
    AlgebraReport, OperatorGrid, apply_hamiltonian, build_operators,
    sector_tridiagonal, verify_algebra, zero_mode_residual,
)
from .units import (
    Coupling, UnitContext, convert_coupling, convert_energy, coupling_for,
    lambda_min, lambda_min_report, make_unit_context,
)

__version__ = "0.1.0"
