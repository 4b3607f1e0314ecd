"""Front-tracking splitting scheme for a 1-D blow-up reaction-diffusion problem.

Solves w_t - (w^m w_x)_x = w^p, 1 < p < m+1, in pressure form
u = w^m, with the stability-controlled two-step update per time level:
an exact nodal solve of the quadratic-gradient propagation that moves the
support, followed by an implicit, mass-lumped P1 reaction-diffusion step
that drives the finite-time blow-up.  Built-in monitors verify the scheme's
a priori bounds as it runs; the analysis layer certifies blow-up against a
self-similar subsolution family.
"""

from .mesh import (
    MovingGrid,
    NodalField,
    SlopeField,
    build_initial_grid,
    regrid,
    interpolate,
)
from .hyperbolic import (
    HyperbolicStepResult,
    cfl_max_dt,
    compute_slopes,
    hopf_lax_oracle,
    hopf_lax_step,
)
from .parabolic import (
    TridiagonalSystem,
    assemble,
    existence_condition,
    lumped_inner_product,
    lumped_weights,
    parabolic_step,
    solve,
)
from .driver import (
    ExistenceUnsatisfiable,
    MonitorViolation,
    RunTrace,
    SchemeParams,
    StepReport,
    TimeStepUnderflow,
    advance,
    derive_q,
    growth_factor,
    lifetime_sup_bound,
    run,
    select_dt,
)
from .analysis import (
    BlowupCertificate,
    CertificateSearchResult,
    FeasibilityReport,
    SubsolutionParams,
    blowup_time_bound,
    certificate_search,
    domination_check,
    feasibility,
    find_plateau,
    minimal_amplitude,
    phi_coefficients,
    phi_min_value,
    subsolution_field,
    subsolution_snapshot,
    theta,
    zeta_ratio_increment,
)

__version__ = "0.1.0"

__all__ = [
    "MovingGrid", "NodalField", "SlopeField",
    "build_initial_grid", "regrid", "interpolate",
    "HyperbolicStepResult", "compute_slopes", "cfl_max_dt",
    "hopf_lax_step", "hopf_lax_oracle",
    "TridiagonalSystem", "lumped_weights", "lumped_inner_product",
    "existence_condition", "assemble", "solve", "parabolic_step",
    "SchemeParams", "StepReport", "RunTrace",
    "derive_q", "select_dt", "advance", "run",
    "growth_factor", "lifetime_sup_bound",
    "MonitorViolation", "TimeStepUnderflow", "ExistenceUnsatisfiable",
    "theta", "SubsolutionParams", "subsolution_field", "subsolution_snapshot",
    "zeta_ratio_increment", "phi_coefficients", "phi_min_value",
    "FeasibilityReport", "feasibility", "minimal_amplitude",
    "blowup_time_bound", "find_plateau", "domination_check",
    "BlowupCertificate", "CertificateSearchResult", "certificate_search",
]
