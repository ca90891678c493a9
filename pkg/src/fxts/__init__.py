"""Fixed-time stability certificates and fixed-time CLF-QP control synthesis."""

from .cert import (
    classify_regime,
    critical_levels,
    doa_boundary_radius,
    domain_level,
    integral_bound,
    integral_oracle,
    robustness_margin,
    settling_time_bound,
)
from .clf import ClfQpConfig, build_qp, classify_closed_loop, control, fallback_feasible_point
from .core import (
    DomainError,
    FxtsGains,
    GoalSpec,
    InputConstraintSet,
    NominalFxtsGains,
    SystemModel,
    validate_gains,
)
from .models import builtin_case_study
from .qp import QpProblem, QpSolution, enumerate_oracle, kkt_residuals, solve
from .sim import simulate, simulate_v_ode

__version__ = "0.1.0"

__all__ = [
    "ClfQpConfig",
    "DomainError",
    "FxtsGains",
    "GoalSpec",
    "InputConstraintSet",
    "NominalFxtsGains",
    "QpProblem",
    "QpSolution",
    "SystemModel",
    "build_qp",
    "builtin_case_study",
    "classify_closed_loop",
    "classify_regime",
    "control",
    "critical_levels",
    "doa_boundary_radius",
    "domain_level",
    "enumerate_oracle",
    "fallback_feasible_point",
    "integral_bound",
    "integral_oracle",
    "kkt_residuals",
    "robustness_margin",
    "settling_time_bound",
    "simulate",
    "simulate_v_ode",
    "solve",
    "validate_gains",
]
