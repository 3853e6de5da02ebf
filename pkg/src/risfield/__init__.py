"""Field and path-loss computations for wireless links aided by a
reconfigurable reflecting or transmitting surface: exact surface-integral
quadrature, discretized-element summation, and closed-form near/far-regime
asymptotics, cross-validated against each other."""

from .errors import BudgetExceededError, ConfigError, ContractError
from .geometry import (
    AngleSet,
    LinkGeometry,
    Point3,
    Side,
    SurfaceSpec,
    angles,
    distances,
    electrical_metrics,
    place_point,
    propagation_unit_vector,
)
from .em_core import (
    Carrier,
    DipoleSource,
    Polarization,
    green,
    green_z_derivative,
    incident_dipole_field,
    incident_projection,
    omega_pattern,
    paper_normalized_moment,
)
from .profiles import (
    AnomalousPhase,
    FocusingPhase,
    Mode,
    SpecularPhase,
    SurfaceProfile,
    gamma,
    gamma_magnitude,
    gamma_phase,
    steering_coefficients,
)
from .fields import (
    FieldResult,
    QuadratureSpec,
    discretized_field,
    integrate_type1,
    integrate_type2,
    reflected_field,
    transmitted_field,
)
from .asymptotics import (
    Regime,
    RegimeReport,
    StationaryPoint,
    boundary_value,
    classify_regime,
    closed_form_scattered,
    find_stationary_point,
    focusing_bound,
    hessian_at,
    spm_value,
    type1_small_value,
    type2_far_value,
)
from .experiments import (
    AxisSpec,
    ScanGrid,
    ScanMode,
    ScanRow,
    angular_scan,
    discretization_sweep,
    distance_sweep,
    emit_csv,
    peak_row,
    read_csv,
    run_scan,
    size_sweep,
    write_pgm,
)
from .config import RunConfig, parse_config

__version__ = "0.1.0"
