"""Fixed-time CLF quadratic program for control-affine systems.

Decision vector z = (v, delta1) of size m + 1. The program is

    minimize   1/2 z' diag(p_u, p1) z + q1 * delta1
    subject to A_u v <= b_u
               Lf h + Lg h v <= delta1 h - a1 max(0, h)^g1 - a2 max(0, h)^g2

where h is the goal function. The slack delta1 keeps it feasible outside the
goal set for any nonempty input polytope.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import cert
from .core import DomainError, FxtsGains, GoalSpec, InputConstraintSet, SystemModel
from .qp import ActiveSetSolver, QpProblem, QpStatus

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClfQpConfig:
    p_u: np.ndarray = field(repr=False)
    p1: float
    q1: float
    gains: FxtsGains
    input_set: InputConstraintSet
    t_bar: float

    def __post_init__(self):
        p_u = np.atleast_1d(np.asarray(self.p_u, dtype=float))
        if np.any(p_u <= 0):
            raise DomainError("input weights p_u must be positive")
        if not self.p1 > 0:
            raise DomainError(f"p1 must be > 0, got {self.p1}")
        if not self.q1 > 0:
            raise DomainError(f"q1 must be > 0, got {self.q1}")
        if p_u.shape[0] != self.input_set.input_dim:
            raise ValueError(
                f"{p_u.shape[0]} input weights for a {self.input_set.input_dim}-input constraint set"
            )
        p_u.setflags(write=False)
        object.__setattr__(self, "p_u", p_u)

    @classmethod
    def from_time_budget(
        cls,
        t_bar: float,
        input_set: InputConstraintSet,
        mu: float = 2.0,
        p_u=None,
        p1: float = 100.0,
        q1: float = 1000.0,
    ) -> ClfQpConfig:
        """Config with alpha1 = alpha2 = mu*pi/(2*t_bar)."""
        m = input_set.input_dim
        p_u = np.ones(m) if p_u is None else p_u
        return cls(p_u, p1, q1, FxtsGains.from_time_budget(t_bar, mu), input_set, t_bar)

    @property
    def input_dim(self) -> int:
        return self.p_u.shape[0]

    @property
    def H(self) -> np.ndarray:
        return np.diag(np.append(self.p_u, self.p1))

    @property
    def F(self) -> np.ndarray:
        F = np.zeros(self.input_dim + 1)
        F[-1] = self.q1
        return F


@dataclass(frozen=True)
class ControlOutput:
    u: np.ndarray
    delta1_star: float
    qp_status: QpStatus
    active_set: tuple[int, ...]


class ClosedLoopCase(enum.Enum):
    GLOBAL_BUDGET = "i"
    GLOBAL_INFLATED = "ii"
    LOCAL = "iii"


@dataclass(frozen=True)
class ClosedLoopClassification:
    case: ClosedLoopCase
    r_M: float
    T_bar_bound: float
    domain_level: float
    mixed_regimes: bool = False


def lie_derivatives(model: SystemModel, goal: GoalSpec, x) -> tuple[float, np.ndarray]:
    grad = goal.gradient(x)
    return float(grad @ model.f(x)), grad @ model.g(x)


def _decay_terms(gains: FxtsGains, h: float) -> float:
    """a1 max(0,h)^g1 + a2 max(0,h)^g2."""
    hp = max(h, 0.0)
    if hp == 0.0:
        return 0.0
    return gains.alpha1 * hp**gains.gamma1 + gains.alpha2 * hp**gains.gamma2


def build_qp(model: SystemModel, goal: GoalSpec, config: ClfQpConfig, x) -> QpProblem:
    x = np.asarray(x, dtype=float)
    m = config.input_dim
    if model.input_dim != m:
        raise ValueError(f"model has {model.input_dim} inputs, config has {m}")
    h = goal.value(x)
    lf, lg = lie_derivatives(model, goal, x)
    U = config.input_set
    A = np.zeros((U.A.shape[0] + 1, m + 1))
    A[:-1, :m] = U.A
    A[-1, :m] = lg
    A[-1, m] = -h
    b = np.append(U.b, -lf - _decay_terms(config.gains, h))
    return QpProblem(config.H, config.F, A, b)


def fallback_feasible_point(
    model: SystemModel, goal: GoalSpec, gains: FxtsGains, x, v_bar
) -> tuple[np.ndarray, float]:
    """Feasible (v, delta1) outside the goal set: keep v_bar and solve the CLF
    row for delta1 with equality."""
    h = goal.value(x)
    if abs(h) <= 1e-12:
        raise ZeroDivisionError(f"h_G(x) = {h:.3g} is too close to zero; x is on the goal boundary")
    if h < 0:
        raise DomainError(f"x lies inside the goal set (h_G = {h:.6g}); the witness needs h_G > 0")
    v_bar = np.atleast_1d(np.asarray(v_bar, dtype=float))
    lf, lg = lie_derivatives(model, goal, x)
    delta1 = (lf + float(lg @ v_bar) + _decay_terms(gains, h)) / h
    return v_bar, delta1


class ClfController:
    """Owns a QP workspace so successive solves can warm start."""

    def __init__(self, model: SystemModel, goal: GoalSpec, config: ClfQpConfig):
        self.model = model
        self.goal = goal
        self.config = config
        self.solver = ActiveSetSolver()
        self._last_active: tuple[int, ...] | None = None

    def __call__(self, x, warm_start: Sequence[int] | None = None) -> ControlOutput:
        if warm_start is None:
            warm_start = self._last_active
        out = control(self.model, self.goal, self.config, x, warm_start, solver=self.solver)
        if out.qp_status is QpStatus.OPTIMAL:
            self._last_active = out.active_set
        return out


def control(
    model: SystemModel,
    goal: GoalSpec,
    config: ClfQpConfig,
    x,
    warm_start: Sequence[int] | None = None,
    solver: ActiveSetSolver | None = None,
) -> ControlOutput:
    problem = build_qp(model, goal, config, x)
    solver = ActiveSetSolver() if solver is None else solver
    sol = solver.solve(problem, warm_start)
    m = config.input_dim
    if sol.status is not QpStatus.OPTIMAL:
        h = goal.value(x)
        if h > 0:
            log.error("CLF-QP infeasible outside the goal set at x=%s: %s", x, sol.note)
        return ControlOutput(np.full(m, np.nan), math.nan, sol.status, sol.active_set)
    return ControlOutput(sol.z[:m].copy(), float(sol.z[m]), sol.status, sol.active_set)


def classify_closed_loop(
    delta1_trace, gains: FxtsGains, k: float = cert.DEFAULT_K, t_bar: float | None = None
) -> ClosedLoopClassification:
    """Place a realized delta1* trace in one of the three closed-loop cases.

    ``t_bar`` is the budget the gains were built for; it defaults to the
    r <= 0 settling bound of ``gains``, which is the same number when the
    gains come from ``FxtsGains.from_time_budget``.
    """
    trace = np.asarray(delta1_trace, dtype=float).reshape(-1)
    trace = trace[np.isfinite(trace)]
    if trace.size == 0:
        raise ValueError("delta1 trace is empty")
    mu = gains.mu
    delta_star = 2.0 * gains.sqrt_a1a2
    d_max = float(trace.max())
    r_m = d_max / delta_star
    if t_bar is None:
        t_bar = cert.settling_time_bound(gains.with_delta1(0.0))

    if d_max <= 0.0:
        return ClosedLoopClassification(ClosedLoopCase.GLOBAL_BUDGET, r_m, t_bar, math.inf)
    if d_max < delta_star:
        # the arctan bound grows with delta1, so the sup sits at the max
        bound = cert.settling_time_bound(gains.with_delta1(d_max))
        return ClosedLoopClassification(ClosedLoopCase.GLOBAL_INFLATED, r_m, bound, math.inf)

    if not 0.0 < k < 1.0:
        raise DomainError(f"k must lie in (0, 1), got {k}")
    bound = mu * k / ((1.0 - k) * gains.sqrt_a1a2)
    supercritical = trace[trace >= delta_star]
    v1 = min(cert.critical_levels(gains.with_delta1(float(d))).v1 for d in supercritical)
    mixed = bool(np.any(trace < delta_star))
    if mixed:
        log.info("delta1 trace mixes regimes; domain uses the %d supercritical entries", supercritical.size)
    return ClosedLoopClassification(ClosedLoopCase.LOCAL, r_m, bound, v1**mu, mixed)

