"""Numerical laboratory for the double-power Emden-Fowler radial equation

    u'' + (n-1)/r u' + k1 r^{l1} u^p + k2 r^{l2} u^q = 0.

Parameter algebra, log-radius integration frames, energy accounting,
end-behavior classification, shooting and threshold hunting, parameter
sweeps with reproducible manifests, and an acceptance suite.
"""

from ._version import __version__
from .params import (
    DerivedConstants,
    ProblemParams,
    RegimeFlags,
    UndefinedLambdaError,
    aubin_talenti_profile,
    classify_regime,
    derive_constants,
    exact_single_term_singular,
)
from .integrate import (
    RAW,
    Frame,
    IntegratorConfig,
    State,
    Termination,
    TerminationKind,
    Trajectory,
    csv_round_trip,
    integrate,
    log_frame_rhs,
    radial_flux,
    read_trajectory_csv,
    reframe,
    regular_series_start,
    seed_frame,
    singular_seed_start,
    write_trajectory_csv,
)
from .energy import (
    BoundReport,
    EnergyTrace,
    apriori_bound_report,
    energy_trace,
    potential_b,
    potential_b1,
    potential_shape,
    write_energy_csv,
)
from .classify import (
    ClassificationReport,
    Kind,
    OscillationEnvelope,
    SaturationError,
    classify_end,
    fit_exponential_rate,
    fit_power_tail,
    oscillation_envelope,
    quadratic_extrema,
)
from .shooting import (
    BoundaryResult,
    ConnectingOrbit,
    DifferenceProbe,
    ShotResult,
    ThresholdScan,
    bisect_boundary,
    connecting_orbit,
    difference_decay_probe,
    scan_thresholds,
    series_radius,
    shoot,
)
from .sweep import (
    RunConfig,
    SweepManifest,
    config_hash,
    expanded_axes,
    parse_run_config,
    parse_run_config_text,
    run_id_of,
    sweep,
)
from .acceptance import TOLERANCES, CriterionResult, Lab, format_results, \
    run_acceptance
from .serialize import canonical_json, fmt_float

__all__ = [
    "__version__",
    "BoundReport", "BoundaryResult", "ClassificationReport",
    "ConnectingOrbit", "CriterionResult", "DerivedConstants",
    "DifferenceProbe", "EnergyTrace", "Frame", "IntegratorConfig", "Kind",
    "Lab", "OscillationEnvelope", "ProblemParams", "RAW", "RegimeFlags",
    "RunConfig", "SaturationError", "ShotResult", "State", "SweepManifest",
    "Termination", "TerminationKind", "ThresholdScan", "TOLERANCES",
    "Trajectory", "UndefinedLambdaError",
    "apriori_bound_report", "aubin_talenti_profile", "bisect_boundary",
    "canonical_json", "classify_end", "classify_regime", "config_hash",
    "connecting_orbit", "csv_round_trip", "derive_constants",
    "difference_decay_probe",
    "energy_trace", "exact_single_term_singular", "expanded_axes",
    "fit_exponential_rate",
    "fit_power_tail", "fmt_float", "format_results", "integrate",
    "log_frame_rhs", "oscillation_envelope", "parse_run_config",
    "parse_run_config_text", "potential_b", "potential_b1",
    "potential_shape", "quadratic_extrema", "radial_flux",
    "read_trajectory_csv", "reframe", "regular_series_start",
    "run_acceptance", "run_id_of", "scan_thresholds", "seed_frame",
    "series_radius", "shoot", "singular_seed_start", "sweep",
    "write_energy_csv", "write_trajectory_csv",
]
