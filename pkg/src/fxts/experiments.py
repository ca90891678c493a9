"""Experiment runner: single runs, u_max / T sweeps, certificate reports, figures."""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import cert
from .clf import ClfQpConfig, classify_closed_loop
from .core import FxtsGains, InputConstraintSet
from .models import MODELS
from .sim import Trajectory, simulate


@dataclass(frozen=True)
class ExperimentConfig:
    model: str = "case_study"
    x0: tuple[float, ...] = (3.33, 1.33)
    mu: float = 2.0
    p_u: tuple[float, ...] = (1.0,)
    p1: float = 100.0
    q1: float = 1000.0
    t_bar: float = 1.0
    u_max: float = 16.0
    t_bar_list: tuple[float, ...] = tuple(np.linspace(1.0, 10.0, 10))
    u_max_list: tuple[float, ...] = tuple(np.linspace(16.0, 25.0, 10))
    dt: float = 1e-3
    t_end: float = 2.0
    post_entry_horizon: float | None = None
    out: str = "out"
    k: float = cert.DEFAULT_K
    workers: int = 1
    controlled: bool = True

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {sorted(MODELS)}")
        if not self.dt > 0 or not self.t_end >= self.dt:
            raise ValueError("need dt > 0 and t_end >= dt")
        if not self.mu > 1:
            raise ValueError(f"mu must be > 1, got {self.mu}")

    def clf_config(self, t_bar: float, u_max: float) -> ClfQpConfig:
        m = len(self.p_u)
        return ClfQpConfig.from_time_budget(
            t_bar, InputConstraintSet.box(u_max, m), mu=self.mu, p_u=self.p_u, p1=self.p1, q1=self.q1
        )


@dataclass
class RunResult:
    t_bar: float
    u_max: float
    gains: FxtsGains
    trajectory: Trajectory = field(repr=False)

    @property
    def alpha1(self) -> float:
        return self.gains.alpha1

    @property
    def max_delta1(self) -> float:
        return self.trajectory.max_delta1

    @property
    def diverged(self) -> bool:
        return self.trajectory.diverged


def run_case(config: ExperimentConfig, t_bar: float | None = None, u_max: float | None = None) -> RunResult:
    t_bar = config.t_bar if t_bar is None else t_bar
    u_max = config.u_max if u_max is None else u_max
    model, goal = MODELS[config.model]()
    clf_cfg = config.clf_config(t_bar, u_max)
    traj = simulate(
        model,
        goal,
        clf_cfg if config.controlled else None,
        np.asarray(config.x0, dtype=float),
        dt=config.dt,
        t_end=config.t_end,
        post_entry_horizon=config.post_entry_horizon,
    )
    return RunResult(t_bar, u_max, clf_cfg.gains, traj)


def _run_point(args):
    config, t_bar, u_max = args
    return run_case(config, t_bar, u_max)


def _run_all(config: ExperimentConfig, points) -> list[RunResult]:
    jobs = [(config, t, u) for t, u in points]
    if config.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(_run_point, jobs))
    return [_run_point(j) for j in jobs]


def sweep_umax(config: ExperimentConfig) -> list[RunResult]:
    return _run_all(config, [(config.t_bar, u) for u in config.u_max_list])


def sweep_T(config: ExperimentConfig) -> list[RunResult]:
    return _run_all(config, [(t, config.u_max) for t in config.t_bar_list])


def fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    return f"{float(value):.12g}"


SWEEP_UMAX_COLUMNS = ("u_max", "max_delta1", "goal_entry_time", "input_norm_max", "diverged")
SWEEP_T_COLUMNS = ("T_bar", "alpha1", "max_delta1", "goal_entry_time", "input_norm_max", "diverged")


def sweep_rows(results: list[RunResult], key: str) -> list[dict]:
    rows = []
    for res in results:
        tr = res.trajectory
        rows.append(
            {
                "u_max": res.u_max,
                "T_bar": res.t_bar,
                "alpha1": res.alpha1,
                "max_delta1": res.max_delta1,
                "goal_entry_time": tr.goal_entry_time,
                "input_norm_max": tr.input_norm_max,
                "diverged": tr.diverged,
            }
        )
    rows.sort(key=lambda r: r[key])
    return rows


def write_csv(path: Path, columns, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row[c]) if not isinstance(row[c], str) else row[c] for c in columns])


def write_trajectory_csv(path: Path, traj: Trajectory) -> None:
    n = traj.states.shape[1]
    m = traj.inputs.shape[1]
    columns = ["t", *(f"x{i + 1}" for i in range(n)), *(f"u{j + 1}" for j in range(m)), "delta1", "h_G"]
    rows = []
    for i, t in enumerate(traj.times):
        vals = [t, *traj.states[i], *traj.inputs[i], traj.delta1_values[i], traj.h_values[i]]
        rows.append(dict(zip(columns, vals)))
    write_csv(path, columns, rows)


def trajectory_tag(result: RunResult) -> str:
    return f"umax{fmt(result.u_max)}_T{fmt(result.t_bar)}"


def closed_loop_summary(result: RunResult, k: float) -> str:
    traj = result.trajectory
    gains = result.gains
    lines = [
        f"T_bar={fmt(result.t_bar)} u_max={fmt(result.u_max)} alpha1=alpha2={fmt(result.alpha1)}",
        f"goal_entry_time={fmt(traj.goal_entry_time)} diverged={traj.diverged}",
        f"max_delta1={fmt(traj.max_delta1)} input_norm_max={fmt(traj.input_norm_max)}",
    ]
    if np.isfinite(traj.delta1_values).any():
        cls = classify_closed_loop(traj.delta1_values, gains, k, t_bar=result.t_bar)
        lines.append(
            f"closed-loop case ({cls.case.value}): r_M={fmt(cls.r_M)} "
            f"T_bar_bound={fmt(cls.T_bar_bound)} domain_level={fmt(cls.domain_level)}"
        )
    return "\n".join(lines)


def cert_report(gains: FxtsGains, k: float = cert.DEFAULT_K, v0: float | None = None) -> dict:
    regime = cert.classify_regime(gains)
    levels = cert.critical_levels(gains)
    level = cert.domain_level(gains, min(k, 1.0))
    k_time = k if k < 1.0 else cert.DEFAULT_K
    report = {
        "alpha1": gains.alpha1,
        "alpha2": gains.alpha2,
        "delta1": gains.delta1,
        "mu": gains.mu,
        "k": k,
        "r": regime.r,
        "regime": regime.tag.value,
        "global": regime.is_global,
        "domain_level": level,
        "settling_time_bound": cert.settling_time_bound(gains, k_time),
        "v_star": levels.v_star,
        "delta_star": levels.delta_star,
        "v1": levels.v1,
        "v2": levels.v2,
    }
    if v0 is not None:
        report["v0"] = v0
        report["oracle"] = cert.integral_oracle(gains, v0)
        report["bound"] = cert.integral_bound(gains, v0, k_time)
    return report


def format_cert_report(report: dict, style: str = "text") -> str:
    if style == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        keys = list(report)
        writer.writerow(keys)
        writer.writerow([r if isinstance(r, str) else fmt(r) for r in report.values()])
        return buf.getvalue()
    scope = "global" if report["global"] else f"local, V <= {fmt(report['domain_level'])}"
    lines = [
        f"{scope}, T <= {fmt(report['settling_time_bound'])}",
        f"regime: {report['regime']} (r = {fmt(report['r'])})",
        f"domain level: {fmt(report['domain_level'])}",
        f"settling time bound: {fmt(report['settling_time_bound'])}",
        f"V* = {fmt(report['v_star'])}, delta* = {fmt(report['delta_star'])}",
    ]
    if report["v1"] is not None:
        lines.append(f"v1 = {fmt(report['v1'])}, v2 = {fmt(report['v2'])}")
    if "oracle" in report:
        ok = report["oracle"] <= report["bound"] * (1 + 1e-9)
        rel = "<=" if ok else ">"
        lines.append(f"oracle {fmt(report['oracle'])} {rel} bound {fmt(report['bound'])} (v0 = {fmt(report['v0'])})")
    return "\n".join(lines) + "\n"


def doa_radii(r_m_list, mu: float) -> list[float]:
    return [math.sqrt(cert.doa_boundary_radius(r, mu)) for r in r_m_list]

