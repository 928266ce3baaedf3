"""Prescribed-time stability toolkit.

Core pieces: blow-up gain algebra and the singular time scale
(``blowup``), weighted decay rates for Metzler gain matrices and
interconnection certification (``decay``), the terminal-aware RK4
integrator with trajectory certification (``sim``), worked closed-loop
systems and presets (``systems``). ``service`` exposes everything over
HTTP; ``cli`` is a thin client for it.
"""

from .blowup import (
    BlowUpFunction,
    TimeScaleTransform,
    XiPolynomial,
    gain_from_json,
    gain_to_json,
    inverse_square_integral_bound,
    polynomial_from_json,
    polynomial_to_json,
    quadratic_floor,
)
from .decay import (
    DecayRateResult,
    GainMatrix,
    InterconnectionSpec,
    SystemDecl,
    TheoremReport,
    check_theorem_conditions,
    diag_stability_2x2,
    weighted_decay_rate,
)
from .errors import (
    ConvergenceFailure,
    DomainError,
    InvalidBlowUp,
    MissingSignal,
    NoQuadraticFloor,
    NonFiniteState,
    NotCertifiable,
    NotDiagonallyStable,
    NotHurwitz,
    OracleMismatch,
    SpecMismatch,
    TimeOutOfHorizon,
    ToolkitError,
)
from .sim import (
    CertificateReport,
    IntegratorOptions,
    TimeHorizon,
    Trajectory,
    VectorField,
    certify_pt_exp,
    integrate,
    lyapunov_residual,
    read_csv_columns,
    terminal_metrics,
    trajectory_to_csv,
)
from .systems import build_preset, derive_gains_example2, preset_catalog

__version__ = "0.1.0"

__all__ = [
    "BlowUpFunction",
    "CertificateReport",
    "ConvergenceFailure",
    "DecayRateResult",
    "DomainError",
    "GainMatrix",
    "IntegratorOptions",
    "InterconnectionSpec",
    "InvalidBlowUp",
    "MissingSignal",
    "NoQuadraticFloor",
    "NonFiniteState",
    "NotCertifiable",
    "NotDiagonallyStable",
    "NotHurwitz",
    "OracleMismatch",
    "SpecMismatch",
    "SystemDecl",
    "TheoremReport",
    "TimeHorizon",
    "TimeOutOfHorizon",
    "TimeScaleTransform",
    "ToolkitError",
    "Trajectory",
    "VectorField",
    "XiPolynomial",
    "build_preset",
    "certify_pt_exp",
    "check_theorem_conditions",
    "derive_gains_example2",
    "diag_stability_2x2",
    "gain_from_json",
    "gain_to_json",
    "integrate",
    "inverse_square_integral_bound",
    "lyapunov_residual",
    "polynomial_from_json",
    "polynomial_to_json",
    "preset_catalog",
    "quadratic_floor",
    "read_csv_columns",
    "terminal_metrics",
    "trajectory_to_csv",
    "weighted_decay_rate",
]
