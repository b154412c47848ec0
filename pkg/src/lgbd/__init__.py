"""Simulation and bifurcation toolkit for a delayed predator-prey model.

The model couples logistic prey growth, a saturating predation term, and
a predator whose self-reinforcing growth is checked by a delayed,
prey-mediated loss.  The package provides:

- adaptive ODE/DDE integration with finite-time blow-up detection and
  refinement of the escape time (``integrate``),
- closed-form blow-up certificates and threshold location (``blowup``),
- equilibria, linearization, dispersion relations, Turing conditions and
  delay-induced Hopf crossings (``model``, ``linear_analysis``),
- center-manifold classification of the Hopf bifurcation (``normal_form``),
- a zero-flux reaction-diffusion solver with pattern diagnostics
  (``spatial``),
- a deterministic CLI with config files, sweeps and reproduction bundles
  (``cli``, ``runconfig``, ``output``, ``repro``).
"""

from .blowup import (
    BlowupCertificate,
    ThresholdResult,
    check_nondelayed_condition,
    comparison_blowup_time,
    lower_prey_envelope,
    scan_delta1,
    threshold_bisection,
)
from .integrate import (
    BlowUp,
    BlowupTimeEstimate,
    Completed,
    HistoryBuffer,
    SimOutcome,
    StepControl,
    StepFailure,
    Trajectory,
    estimate_blowup_time,
    integrate,
    integrate_dde,
    integrate_ode,
)
from .linear_analysis import (
    KSEARCH_COLUMNS,
    CharCoefficients,
    Diffusivities,
    DispersionSample,
    HopfPoint,
    InconsistencyError,
    TransversalityResult,
    TuringReport,
    admissible_modes,
    carrying_capacity_scan,
    char_coeffs,
    char_coeffs_structural,
    char_matrix,
    char_residual,
    continued_root,
    dispersion_curve,
    hopf_point,
    nondelayed_jacobian,
    routh_hurwitz_tau0,
    transversality,
    turing_conditions,
)
from .model import (
    Equilibrium,
    EquilibriumKind,
    LinearizationCoefficients,
    ModelParameters,
    ToleranceError,
    equilibria,
    interior_equilibrium,
    jacobian_fd,
    jacobian_fd_delayed,
    linearization_coeffs,
    rhs_delayed,
    rhs_nondelayed,
)
from .normal_form import (
    BifurcationDirection,
    ComplexPairing,
    DegeneratePairingError,
    GCoefficients,
    HopfQuantities,
    HopfReport,
    NonlinearCouplings,
    NormalFormError,
    PeriodTrend,
    PeriodicStability,
    ResonanceError,
    TransversalityError,
    bilinear_pairing,
    eigen_pairing,
    g_coefficients,
    hopf_quantities,
    hopf_report,
    lambda_prime_numeric,
)
from .spatial import (
    FieldHistory,
    Grid,
    PdeResult,
    SpatialField,
    equilibrium_field,
    evolve_fields,
    field_integral,
    laplacian,
    mode_amplitudes,
    perturbed_equilibrium_ic,
    quadrature_weights,
    simulate_rd,
    simulate_rd_delayed,
)

__version__ = "0.1.0"

__all__ = [
    "KSEARCH_COLUMNS",
    "BifurcationDirection",
    "BlowUp",
    "BlowupCertificate",
    "BlowupTimeEstimate",
    "CharCoefficients",
    "Completed",
    "ComplexPairing",
    "DegeneratePairingError",
    "Diffusivities",
    "DispersionSample",
    "Equilibrium",
    "EquilibriumKind",
    "FieldHistory",
    "GCoefficients",
    "Grid",
    "HistoryBuffer",
    "HopfPoint",
    "HopfQuantities",
    "HopfReport",
    "InconsistencyError",
    "LinearizationCoefficients",
    "ModelParameters",
    "NonlinearCouplings",
    "NormalFormError",
    "PdeResult",
    "PeriodTrend",
    "PeriodicStability",
    "ResonanceError",
    "SimOutcome",
    "SpatialField",
    "StepControl",
    "StepFailure",
    "ThresholdResult",
    "ToleranceError",
    "Trajectory",
    "TransversalityError",
    "TransversalityResult",
    "TuringReport",
    "admissible_modes",
    "bilinear_pairing",
    "carrying_capacity_scan",
    "char_coeffs",
    "char_coeffs_structural",
    "char_matrix",
    "char_residual",
    "check_nondelayed_condition",
    "comparison_blowup_time",
    "continued_root",
    "dispersion_curve",
    "eigen_pairing",
    "equilibria",
    "equilibrium_field",
    "estimate_blowup_time",
    "evolve_fields",
    "field_integral",
    "g_coefficients",
    "hopf_point",
    "hopf_quantities",
    "hopf_report",
    "integrate",
    "integrate_dde",
    "integrate_ode",
    "interior_equilibrium",
    "jacobian_fd",
    "jacobian_fd_delayed",
    "lambda_prime_numeric",
    "laplacian",
    "linearization_coeffs",
    "lower_prey_envelope",
    "mode_amplitudes",
    "nondelayed_jacobian",
    "perturbed_equilibrium_ic",
    "quadrature_weights",
    "rhs_delayed",
    "rhs_nondelayed",
    "routh_hurwitz_tau0",
    "scan_delta1",
    "simulate_rd",
    "simulate_rd_delayed",
    "threshold_bisection",
    "transversality",
    "turing_conditions",
]
