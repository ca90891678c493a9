"""Shared domain types: certificate gains, control-affine models, goal sets.

Everything here is immutable after construction. Arrays are float64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np


class DomainError(ValueError):
    """A parameter lies outside the range the certificate is defined for."""


@dataclass(frozen=True)
class FxtsGains:
    """Parameters of the decay bound dV/dt <= -a1 V^g1 - a2 V^g2 + d1 V."""

    alpha1: float
    alpha2: float
    delta1: float
    mu: float

    def __post_init__(self):
        for name in ("alpha1", "alpha2", "delta1", "mu"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, float(value))
        if self.alpha1 <= 0:
            raise DomainError(f"alpha1 must be > 0, got {self.alpha1}")
        if self.alpha2 <= 0:
            raise DomainError(f"alpha2 must be > 0, got {self.alpha2}")
        if self.mu <= 1:
            raise DomainError(f"mu must be > 1, got {self.mu}")

    @property
    def gamma1(self) -> float:
        return 1.0 + 1.0 / self.mu

    @property
    def gamma2(self) -> float:
        return 1.0 - 1.0 / self.mu

    @property
    def sqrt_a1a2(self) -> float:
        return math.sqrt(self.alpha1 * self.alpha2)

    @property
    def r(self) -> float:
        """Regime ratio delta1 / (2 sqrt(alpha1 alpha2))."""
        return self.delta1 / (2.0 * self.sqrt_a1a2)

    def rhs(self, v: float) -> float:
        """Right side of the decay bound at level ``v >= 0``."""
        if v <= 0.0:
            return 0.0
        return -self.alpha1 * v**self.gamma1 - self.alpha2 * v**self.gamma2 + self.delta1 * v

    def with_delta1(self, delta1: float) -> FxtsGains:
        return FxtsGains(self.alpha1, self.alpha2, delta1, self.mu)

    @classmethod
    def from_time_budget(cls, t_bar: float, mu: float, delta1: float = 0.0) -> FxtsGains:
        """Gains with alpha1 = alpha2 = mu*pi/(2*t_bar), so that the r <= 0
        settling bound equals ``t_bar``."""
        if not (t_bar > 0 and math.isfinite(t_bar)):
            raise DomainError(f"time budget must be > 0, got {t_bar}")
        alpha = mu * math.pi / (2.0 * t_bar)
        return cls(alpha, alpha, delta1, mu)


def validate_gains(alpha1: float, alpha2: float, delta1: float, mu: float) -> FxtsGains:
    return FxtsGains(alpha1, alpha2, delta1, mu)


@dataclass(frozen=True)
class NominalFxtsGains:
    """Classic fixed-time bound dV/dt <= -a V^p - b V^q with 0 < p < 1 < q."""

    a: float
    b: float
    p: float
    q: float

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"a must be > 0, got {self.a}")
        if not self.b > 0:
            raise DomainError(f"b must be > 0, got {self.b}")
        if not 0 < self.p < 1:
            raise DomainError(f"p must lie in (0, 1), got {self.p}")
        if not self.q > 1:
            raise DomainError(f"q must be > 1, got {self.q}")

    def settling_time_bound(self) -> float:
        """T <= 1/(a(1-p)) + 1/(b(q-1))."""
        return 1.0 / (self.a * (1.0 - self.p)) + 1.0 / (self.b * (self.q - 1.0))


def _as_state(x) -> np.ndarray:
    return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class SystemModel:
    """Control-affine dynamics xdot = f(x) + g(x) u."""

    state_dim: int
    input_dim: int
    drift: Callable[[np.ndarray], np.ndarray]
    actuation: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"

    def __post_init__(self):
        if self.state_dim < 1 or self.input_dim < 1:
            raise DomainError("state_dim and input_dim must be positive")

    def f(self, x) -> np.ndarray:
        out = np.asarray(self.drift(_as_state(x)), dtype=float).reshape(-1)
        if out.shape != (self.state_dim,):
            raise ValueError(f"drift returned shape {out.shape}, expected ({self.state_dim},)")
        return out

    def g(self, x) -> np.ndarray:
        out = np.asarray(self.actuation(_as_state(x)), dtype=float)
        out = out.reshape(self.state_dim, self.input_dim)
        return out

    def xdot(self, x, u) -> np.ndarray:
        return self.f(x) + self.g(x) @ np.asarray(u, dtype=float)


@dataclass(frozen=True)
class GoalSpec:
    """Goal set S_G = {x | h(x) <= 0} together with the gradient of h."""

    h: Callable[[np.ndarray], float]
    grad_h: Callable[[np.ndarray], np.ndarray]
    analytic: bool = True

    def value(self, x) -> float:
        return float(self.h(_as_state(x)))

    def gradient(self, x) -> np.ndarray:
        return np.asarray(self.grad_h(_as_state(x)), dtype=float).reshape(-1)

    def contains(self, x) -> bool:
        return self.value(x) <= 0.0


def gradient_check(
    goal: GoalSpec,
    states,
    step: float = 1e-6,
    rtol: float = 1e-4,
    rng: np.random.Generator | None = None,
) -> float:
    """Compare ``grad_h`` with central differences along random unit directions.

    Returns the worst ratio |fd - grad.d| / (rtol * (1 + |h|)); values <= 1
    pass. This is an explicit check only, never used as a fallback gradient.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for x in np.atleast_2d(np.asarray(states, dtype=float)):
        d = rng.standard_normal(x.shape)
        d /= np.linalg.norm(d)
        fd = (goal.value(x + step * d) - goal.value(x - step * d)) / (2 * step)
        err = abs(fd - goal.gradient(x) @ d)
        worst = max(worst, err / (rtol * (1.0 + abs(goal.value(x)))))
    return worst


@dataclass(frozen=True)
class InputConstraintSet:
    """Polytope {v | A v <= b}; the caller vouches that it is nonempty."""

    A: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
        A.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def input_dim(self) -> int:
        return self.A.shape[1]

    def contains(self, v, tol: float = 0.0) -> bool:
        return bool(np.all(self.A @ np.asarray(v, dtype=float) <= self.b + tol))

    @classmethod
    def box(cls, u_max: float, m: int = 1) -> InputConstraintSet:
        """|v_i| <= u_max for every component, as 2m rows."""
        if not u_max > 0:
            raise DomainError(f"u_max must be > 0, got {u_max}")
        eye = np.eye(m)
        return cls(np.vstack([eye, -eye]), np.full(2 * m, float(u_max)))

    @classmethod
    def unbounded(cls, m: int = 1) -> InputConstraintSet:
        return cls(np.zeros((0, m)), np.zeros(0))
