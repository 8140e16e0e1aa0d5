"""Exact rotational self-similar reference solutions of the compressible
Euler equations: construction, integration of the scale-factor dynamics,
finite-difference residual verification, lifespan classification, and
deterministic export for validating external CFD codes."""

from .classify import (BLOWUP, GLOBAL, OPEN_CASE, Classification,
                       PeriodEstimate, check_no_period_3d, classify_3d,
                       detect_period_2d, probe_open_case)
from .config import ConfigError, RunConfig, parse_config, serialize_config
from .emden import (EmdenState2D, EmdenState3D, Termination, Trajectory,
                    advance, emden_rhs_2d, emden_rhs_3d, energy_2d, energy_3d,
                    integrate)
from .fields import (Field2D, Field3D, FieldSample, FieldSample2D,
                     GeneralMassFamily)
from .profiles import (DensityProfile, NonSmoothCutoffWarning, PhysParams,
                       similarity_eta, similarity_s)
from .verify import (GeneralFamilySource, MassBudget, RegularityReport,
                     ResidualReport, SnapshotFieldSource,
                     TrajectoryFieldSource, cutoff_regularity_check,
                     euler_residual, mass_residual, navier_stokes_residual,
                     refined_residual, total_mass)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "PhysParams", "DensityProfile", "NonSmoothCutoffWarning",
    "similarity_s", "similarity_eta",
    "EmdenState3D", "EmdenState2D", "Termination", "Trajectory",
    "emden_rhs_3d", "emden_rhs_2d", "energy_3d", "energy_2d",
    "integrate", "advance",
    "Field3D", "Field2D", "FieldSample", "FieldSample2D", "GeneralMassFamily",
    "SnapshotFieldSource", "TrajectoryFieldSource", "GeneralFamilySource",
    "ResidualReport", "MassBudget", "RegularityReport",
    "mass_residual", "euler_residual", "navier_stokes_residual",
    "refined_residual", "total_mass", "cutoff_regularity_check",
    "GLOBAL", "BLOWUP", "OPEN_CASE",
    "Classification", "PeriodEstimate",
    "classify_3d", "probe_open_case", "detect_period_2d", "check_no_period_3d",
    "RunConfig", "ConfigError", "parse_config", "serialize_config",
]
