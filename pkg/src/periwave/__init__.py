"""Traveling waves in peridynamical media.

Solitary and periodic waves of the nonlocal wave equation are computed
as constrained maximizers of potential energy at fixed kinetic energy,
then cross-checked against dispersion theory, exponential tail decay,
the long-wave (KdV) limit, and direct time integration.
"""

from .errors import (
    ConfigError,
    DecayOverflowError,
    DegenerateProfileError,
    GridMismatchError,
    InstabilityError,
    PotentialOverflowError,
    SubsonicError,
)
from .grids import (
    ConeReport,
    Grid,
    Profile,
    cone_check,
    inner,
    l2_norm,
    make_grid,
    profile_from_csv,
    profile_from_json,
    profile_to_csv,
    profile_to_json,
)
from .convolution import conv_direct, conv_spectral, conv_symbol, sinc, sinch
from .materials import (
    Bond,
    ContinuousCoupling,
    Coupling,
    DiscreteCoupling,
    Potential,
    SuperquadraticReport,
    build_quadrature,
    check_superquadratic,
    coefficient_family,
    integrability_diagnostic,
    potential_library,
    reflect_coupling,
    reflect_potential,
    silling_medium,
)
from .energy import (
    EnergyReport,
    energy_report,
    eval_P_and_grad,
    grad_P,
    kinetic_K,
    potential_P,
    quadratic_Q,
)
from .solver import (
    IterationHistory,
    SolveOptions,
    SweepRow,
    ThresholdReport,
    WaveSolution,
    improvement_step,
    initial_profile,
    localization_ratio,
    solve,
    support_width,
    sweep_K,
    threshold_detect,
)
from .analysis import (
    DispersionCurve,
    KdvCoefficients,
    KdvComparison,
    decay_rate,
    dispersion_curve,
    fit_decay,
    kdv_coefficients,
    kdv_compare,
    kdv_profile,
    long_wave_speed2,
    omega2,
    theta2,
    theta2_imag,
)
from .timedomain import (
    PropagationReport,
    SimulationState,
    force,
    launch_wave,
    simulate,
    stability_limit,
    step_verlet,
    total_energy,
)
from .config import RunConfig, load_config, parse_config

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "Profile",
    "ConeReport",
    "make_grid",
    "l2_norm",
    "inner",
    "cone_check",
    "profile_to_csv",
    "profile_from_csv",
    "profile_to_json",
    "profile_from_json",
    "sinc",
    "sinch",
    "conv_symbol",
    "conv_spectral",
    "conv_direct",
    "Potential",
    "Bond",
    "DiscreteCoupling",
    "ContinuousCoupling",
    "Coupling",
    "potential_library",
    "silling_medium",
    "build_quadrature",
    "coefficient_family",
    "check_superquadratic",
    "SuperquadraticReport",
    "reflect_potential",
    "reflect_coupling",
    "integrability_diagnostic",
    "kinetic_K",
    "potential_P",
    "grad_P",
    "quadratic_Q",
    "eval_P_and_grad",
    "EnergyReport",
    "energy_report",
    "SolveOptions",
    "WaveSolution",
    "IterationHistory",
    "SweepRow",
    "ThresholdReport",
    "initial_profile",
    "improvement_step",
    "solve",
    "sweep_K",
    "threshold_detect",
    "localization_ratio",
    "support_width",
    "theta2",
    "omega2",
    "theta2_imag",
    "long_wave_speed2",
    "DispersionCurve",
    "dispersion_curve",
    "decay_rate",
    "fit_decay",
    "KdvCoefficients",
    "kdv_coefficients",
    "kdv_profile",
    "KdvComparison",
    "kdv_compare",
    "SimulationState",
    "PropagationReport",
    "force",
    "total_energy",
    "step_verlet",
    "launch_wave",
    "simulate",
    "stability_limit",
    "RunConfig",
    "load_config",
    "parse_config",
    "GridMismatchError",
    "PotentialOverflowError",
    "DegenerateProfileError",
    "SubsonicError",
    "DecayOverflowError",
    "InstabilityError",
    "ConfigError",
    "__version__",
]
