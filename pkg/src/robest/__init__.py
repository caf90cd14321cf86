"""Parametric robustness of estimation error for linear dynamical systems.

Given a true parametrized LTI system and an estimated one, this package
bounds and measures how sensitive the estimation error is to the
parameters: closed-form upper bounds on the sensitivity energy, two
independent ground-truth routes, and the robustness metric R = 1/(1+d_R).
"""

from .analysis import ScenarioAnalysis, analyze_scenario
from .bounds import (
    BoundConstants,
    BoundReport,
    CoordinateTransform,
    baseline_from_trace,
    decay_moment_integrals,
    dynamics_bound,
    dynamics_bound_terms,
    gramian_trace_bound,
    init_state_bound,
    init_state_bound_from,
    lyapunov_preconditioner,
    special_case_bound,
)
from .errors import NumericalError, PreconditionError
from .linalg_core import (
    LogNormResult,
    LyapunovSolution,
    expm,
    expm_param_derivative,
    gramian_finite,
    log_norm,
    lyap_observability,
    simpson_weights,
    spectral_abscissa,
    spectral_norm,
    sym_eig_max,
)
from .metric import (
    Contribution,
    RobustnessResult,
    metric_from_bounds,
    robustness_distance,
    robustness_metric,
)
from .param_algebra import (
    Monomial,
    ParamMatrix,
    ParamVector,
    ParamVectorSpec,
    block_diag,
    hstack,
    vstack,
)
from .scenarios import (
    RunConfig,
    Scenario,
    builtin_scenario,
    builtin_scenarios,
    load_config,
    random_stable_augmented,
)
from .sensitivity import (
    SensitivityEnergy,
    SensitivityTrajectory,
    default_fd_step,
    l2_energy,
    sensitivity_fd,
    sensitivity_ode,
    signal_energy,
)
from .systems import (
    AugmentedSystem,
    InputSignal,
    StateSpace,
    Trajectory,
    build_augmented,
    bu_sup_norm,
    default_dt,
    simulate,
    time_grid,
    write_trajectory_csv,
)

__version__ = "0.1.0"
