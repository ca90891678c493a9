"""Fixed-step RK4 simulation of the closed loop and of the scalar comparison system."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .clf import ClfController, ClfQpConfig
from .core import FxtsGains, GoalSpec, SystemModel
from .qp import QpStatus

log = logging.getLogger(__name__)

DIVERGENCE_RADIUS = 1e6
EVENT_TOL = 1e-8
V_HIT = 1e-9


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    inputs: np.ndarray
    delta1_values: np.ndarray
    h_values: np.ndarray
    goal_entry_time: float | None = None
    diverged: bool = False
    infeasible_steps: int = 0
    notes: list[str] = field(default_factory=list)

    @property
    def input_norm_max(self) -> float:
        """Largest |u|_inf over the run (matches box input bounds)."""
        if self.inputs.size == 0:
            return 0.0
        return float(np.nanmax(np.abs(self.inputs)))

    @property
    def max_delta1(self) -> float:
        finite = self.delta1_values[np.isfinite(self.delta1_values)]
        return float(finite.max()) if finite.size else math.nan

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def rk4_step(fun, x: np.ndarray, dt: float) -> np.ndarray:
    k1 = fun(x)
    k2 = fun(x + 0.5 * dt * k1)
    k3 = fun(x + 0.5 * dt * k2)
    k4 = fun(x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _refine_entry(fun, x: np.ndarray, dt: float, goal: GoalSpec):
    """Bisect the step fraction where h crosses zero; returns (tau, state)."""
    lo, hi = 0.0, dt
    x_hi = rk4_step(fun, x, dt)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        x_mid = rk4_step(fun, x, mid)
        h_mid = goal.value(x_mid)
        if abs(h_mid) <= EVENT_TOL:
            return mid, x_mid
        if h_mid > 0:
            lo = mid
        else:
            hi, x_hi = mid, x_mid
        if hi - lo <= 1e-15 * max(dt, 1.0):
            break
    return hi, x_hi


def simulate(
    model: SystemModel,
    goal: GoalSpec,
    config: ClfQpConfig | None,
    x0,
    dt: float = 1e-3,
    t_end: float = 2.0,
    post_entry_horizon: float | None = None,
) -> Trajectory:
    """Integrate xdot = f + g u with u held constant over each RK4 step.

    ``config=None`` runs the open loop (u = 0). With ``post_entry_horizon``
    set, the run stops that long after the goal set is first entered; a
    horizon of 0 ends the trajectory exactly at the refined entry point.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    if not t_end >= dt:
        raise ValueError(f"t_end must be >= dt, got {t_end}")
    x = np.asarray(x0, dtype=float).copy()
    m = model.input_dim
    controller = ClfController(model, goal, config) if config is not None else None

    n_steps = int(round(t_end / dt))
    times, states, inputs, deltas, hs = [], [], [], [], []
    u_prev = np.zeros(m)
    traj = Trajectory(*(np.empty(0) for _ in range(5)))
    entry = 0.0 if goal.value(x) <= 0 else None
    stop_at = None if entry is None or post_entry_horizon is None else entry + post_entry_horizon

    for k in range(n_steps + 1):
        t = k * dt
        h = goal.value(x)
        if controller is None:
            u, d1 = np.zeros(m), math.nan
        else:
            out = controller(x)
            if out.qp_status is QpStatus.OPTIMAL:
                u, d1 = out.u, out.delta1_star
            else:
                # zero-order hold; only expected inside the goal set
                traj.infeasible_steps += 1
                traj.notes.append(f"t={t:.6g}: QP infeasible (h_G={h:.3g}), holding previous input")
                log.warning("QP infeasible at t=%.6g, h_G=%.3g; holding u", t, h)
                u, d1 = u_prev, math.nan
        times.append(t)
        states.append(x.copy())
        inputs.append(np.array(u, dtype=float))
        deltas.append(d1)
        hs.append(h)
        if k == n_steps or (stop_at is not None and t >= stop_at - 1e-12):
            break

        u_hold = np.array(u, dtype=float)

        def fun(y, u_hold=u_hold):
            return model.f(y) + model.g(y) @ u_hold

        # blow-up is reported as divergence just below, not as a float warning
        with np.errstate(over="ignore", invalid="ignore"):
            x_next = rk4_step(fun, x, dt)
        if not np.all(np.isfinite(x_next)) or np.linalg.norm(x_next) > DIVERGENCE_RADIUS:
            traj.diverged = True
            traj.notes.append(f"diverged after t={t:.6g}; last finite state {x.tolist()}")
            break

        if entry is None and goal.value(x_next) <= 0:
            tau, x_event = _refine_entry(fun, x, dt, goal)
            entry = t + tau
            if post_entry_horizon is not None:
                stop_at = entry + post_entry_horizon
                if post_entry_horizon <= 0:
                    times.append(entry)
                    states.append(x_event)
                    inputs.append(u_hold)
                    deltas.append(math.nan)
                    hs.append(goal.value(x_event))
                    break
        x = x_next
        u_prev = u_hold

    traj.times = np.asarray(times)
    traj.states = np.asarray(states)
    traj.inputs = np.asarray(inputs).reshape(len(times), m)
    traj.delta1_values = np.asarray(deltas, dtype=float)
    traj.h_values = np.asarray(hs, dtype=float)
    traj.goal_entry_time = entry
    return traj


def _v_rhs(v, a1, a2, d1, g1, g2):
    v = np.maximum(v, 0.0)
    return -a1 * v**g1 - a2 * v**g2 + d1 * v


def simulate_v_ode_batch(alpha1, alpha2, delta1, mu, v0, dt: float, t_max: float = 50.0):
    """Integrate dV/dt = -a1 V^g1 - a2 V^g2 + d1 V for many parameter sets at once.

    All arguments broadcast to a common shape. V is clamped at zero after
    each step, which realizes the finite-time absorption at the origin.

    Returns ``(hit_times, monotone)``: first time V <= 1e-9 (nan if never
    reached before ``t_max``) and whether V never increased along the run.
    """
    a1, a2, d1, mu_, v = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (alpha1, alpha2, delta1, mu, v0)))
    v = v.astype(float).copy()
    a1, a2, d1 = a1.copy(), a2.copy(), d1.copy()
    g1, g2 = 1.0 + 1.0 / mu_, 1.0 - 1.0 / mu_
    hit = np.where(v <= V_HIT, 0.0, np.nan)
    monotone = np.ones(v.shape, dtype=bool)
    live = np.isnan(hit)
    n_steps = int(math.ceil(t_max / dt))
    for k in range(1, n_steps + 1):
        if not live.any():
            break
        idx = np.nonzero(live)
        vv = v[idx]
        args = (a1[idx], a2[idx], d1[idx], g1[idx], g2[idx])
        k1 = _v_rhs(vv, *args)
        k2 = _v_rhs(vv + 0.5 * dt * k1, *args)
        k3 = _v_rhs(vv + 0.5 * dt * k2, *args)
        k4 = _v_rhs(vv + dt * k3, *args)
        vn = np.maximum(vv + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4), 0.0)
        monotone[idx] &= vn <= vv * (1.0 + 1e-12)
        v[idx] = vn
        done = vn <= V_HIT
        if done.any():
            hit_idx = tuple(i[done] for i in idx)
            hit[hit_idx] = k * dt
            live[hit_idx] = False
    return hit, monotone


def simulate_v_ode(gains: FxtsGains, v0: float, dt: float = 1e-4, t_max: float = 50.0):
    """Worst-case scalar comparison system for one set of gains.

    Returns ``(v_trace, hit_time)`` with ``hit_time`` None when V does not
    reach 1e-9 before ``t_max``.
    """
    if v0 < 0:
        raise ValueError(f"v0 must be >= 0, got {v0}")
    args = (gains.alpha1, gains.alpha2, gains.delta1, gains.gamma1, gains.gamma2)

    def rhs(v):
        return _v_rhs(v, *args)

    v = float(v0)
    trace = [v]
    if v <= V_HIT:
        return np.asarray(trace), 0.0
    for k in range(1, int(math.ceil(t_max / dt)) + 1):
        v = max(float(rk4_step(rhs, np.float64(v), dt)), 0.0)
        trace.append(v)
        if v <= V_HIT:
            return np.asarray(trace), k * dt
    return np.asarray(trace), None
