"""Limit-cycle location and counting for polynomial Lienard systems.

Two independent routes analyze the planar system dx/dt = y - F(x),
dy/dt = -x: a first-integral amplitude ODE (with interval partition and
cycle-count bounds) and a direct-simulation return map on y = F(x).  The
report layer cross-checks them.
"""

from .errors import (
    DegenerateInput,
    DegenerateOrbit,
    LienardLabError,
    MaxSteps,
    NoReturn,
    SingularPoint,
    StepUnderflow,
)
from .identities import (
    IdentityReport,
    IntegralStack,
    PartsCoefficients,
    build_integral_stack,
    parts_coefficient,
    parts_coefficients,
    verify_parts_identity,
)
from .oracle import (
    LimitCycle,
    OracleOptions,
    State,
    Trajectory,
    classify_stability,
    detect_center,
    extract_phi_from_orbit,
    find_limit_cycles,
    poincare_return,
    simulate,
    vector_field,
)
from .partition import (
    BoundReport,
    CriticalPartition,
    Interval,
    bound_report,
    build_partition,
    degree_bound,
    partition_bound,
    positive_critical_points,
)
from .phi import (
    AmplitudeCandidate,
    CandidateScan,
    ConditionReport,
    PhiOptions,
    PhiTrajectory,
    check_periodic_orbit_conditions,
    find_amplitude_candidates,
    integrate_phi,
    phi_return_map,
    phi_rhs,
    verify_energy_identity,
)
from .poly import Polynomial, RootSet, antiderivative, derivative, evaluate, real_roots
from .report import (
    AnalysisConfig,
    AnalysisReport,
    cross_check_amplitude_intervals,
    emit_csv,
    parse_report,
    run_analysis,
    serialize_report,
)

__version__ = "0.1.0"
