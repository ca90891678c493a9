"""Builtin models."""

from __future__ import annotations

import numpy as np

from .core import GoalSpec, SystemModel


def zeta(z):
    """(0.8 + 0.2 exp(-100|z|)) tanh(z); odd, |zeta| < 1."""
    return (0.8 + 0.2 * np.exp(-100.0 * np.abs(z))) * np.tanh(z)


def _drift(x):
    x1, x2 = x
    c = x1 * x1 + x2 * x2 - 1.0
    return np.array([x2 + x1 * c, -x1 + zeta(x2) * c])


def _actuation(x):
    return np.array([[x[0]], [x[1]]])


def _h(x):
    return float(x @ x - 1.0)


def _grad_h(x):
    return 2.0 * np.asarray(x, dtype=float)


def builtin_case_study() -> tuple[SystemModel, GoalSpec]:
    """Planar system that is unstable outside the unit disk, single radial input.

    Goal set is the unit disk, h_G(x) = |x|^2 - 1.
    """
    model = SystemModel(2, 1, _drift, _actuation, name="case_study")
    return model, GoalSpec(_h, _grad_h, analytic=True)


MODELS = {"case_study": builtin_case_study}
