"""Spectral toolkit for first-order operators d_t + c(t) d_x + q(t) on T^1 x R."""

from .classify import (
    Certificate,
    OperatorSpec,
    SigmaSet,
    SolvabilityVerdict,
    Verdict,
    constant_coefficient_sgh,
    epsilon_lower_bound,
    is_gs,
    is_sgh,
    symbol_zero_set,
)
from .conjugate import ConjugationPair, intertwine_check, psi_a, psi_field, psi_q, reduced_operator
from .mixedfft import (
    CylinderGrid,
    DecayReport,
    Field,
    HalfSpectrum,
    MixedSpectrum,
    decay_report,
    forward_t,
    forward_x,
    inverse_t,
    inverse_x,
    spectral_apply,
)
from .solve import (
    CompatibilityError,
    NearResonantError,
    NotSolvableError,
    SolveOutcome,
    UndeterminedError,
    compatibility_defect_field,
    project_compatible,
    residual,
    solve,
    solve_at_xi,
)
from .torus_ode import (
    OdeProblem,
    ResonantError,
    compatibility_defect,
    ode_residual,
    resonant,
    solve_nonresonant,
    solve_resonant,
)
from .trigfun import (
    TorusFunction,
    antiderivative_zero_mean,
    changes_sign,
    mean,
    running_integral_extrema,
    smoothstep,
    sublevels_connected,
    superlevels_connected,
    windowed_integral_extrema,
)
from .witness import (
    LaplaceReport,
    WitnessRecipe,
    fit_decay_exponent,
    laplace_lower_bound_check,
    sign_change_witness,
    zero_symbol_witness,
)

__version__ = "0.1.0"
