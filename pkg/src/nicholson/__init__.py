"""Analysis and simulation toolkit for n-patch Nicholson blowflies systems."""

from .bounds import (
    AsymptoticBounds,
    PermanenceConstants,
    dissipativity_bound,
    gamma_exponent_range,
    lemma21_sequence,
    permanence_constants,
    theorem24_bounds,
)
from .classify import ClassificationReport, a2_check, classify_dynamics, persistent_block
from .equilibrium import (
    DelayRobustnessVerdict,
    EquilibriumCertificate,
    certify_saturated,
    delay_robustness,
    jacobian,
    monotone_bracket_flow,
    solve_positive_equilibrium,
)
from .matrices import (
    CommunityMatrix,
    FrobeniusForm,
    SpectralResult,
    community_matrix,
    eigen_oracle,
    find_positive_c,
    find_positive_c_auto,
    is_irreducible,
    is_nonsingular_m_matrix,
    linear_solve,
    spectral_bound,
    strongly_connected_blocks,
)
from .model import (
    PatchSystem,
    ValidationReport,
    gamma_coefficients,
    rhs_dde,
    rhs_ode,
    ricker,
    ricker_derivative,
    validate_system,
)
from .scenarios import FIGURE_PRESETS, Scenario, battery_scenarios, load_scenario
from .simulate import (
    HistorySpec,
    TailStats,
    Trajectory,
    classify_tail,
    integrate_dde,
    integrate_ode,
    tail_stats,
)

__version__ = "0.1.0"
