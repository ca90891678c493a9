import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fxts.core import (
    DomainError,
    FxtsGains,
    GoalSpec,
    InputConstraintSet,
    NominalFxtsGains,
    SystemModel,
    gradient_check,
    validate_gains,
)


def test_validate_gains_derived_quantities():
    g = validate_gains(1, 1, 0, 2)
    assert g.gamma1 == 1.5 and g.gamma2 == 0.5 and g.r == 0.0
    assert validate_gains(1, 1, 2, 2).r == 1.0
    assert validate_gains(1, 1, 1, 2).r == 0.5


@pytest.mark.parametrize(
    "args, name",
    [((0, 1, 0, 2), "alpha1"), ((1, -1, 0, 2), "alpha2"), ((1, 1, 0, 1), "mu"), ((1, 1, 0, 0.5), "mu")],
)
def test_validate_gains_rejects(args, name):
    with pytest.raises(DomainError, match=name):
        validate_gains(*args)


def test_validate_gains_rejects_nonfinite():
    with pytest.raises(DomainError):
        validate_gains(1, 1, math.nan, 2)


@given(
    st.floats(1e-3, 1e3),
    st.floats(1e-3, 1e3),
    st.floats(-1e3, 1e3),
    st.floats(1.0001, 50),
)
def test_exponents_sum_to_two(a1, a2, d1, mu):
    g = FxtsGains(a1, a2, d1, mu)
    assert g.gamma1 > 1 and 0 < g.gamma2 < 1
    assert g.gamma1 + g.gamma2 == pytest.approx(2.0, abs=1e-15)
    assert math.isfinite(g.r)
    # construction never clamps
    assert (g.alpha1, g.alpha2, g.delta1, g.mu) == (a1, a2, d1, mu)


def test_from_time_budget():
    g = FxtsGains.from_time_budget(2.0, mu=2.0)
    assert g.alpha1 == g.alpha2 == pytest.approx(math.pi / 2)


def test_nominal_gains():
    nom = NominalFxtsGains(1, 1, 0.5, 1.5)
    assert nom.settling_time_bound() == pytest.approx(4.0)
    for bad in [(0, 1, 0.5, 1.5), (1, 1, 1.0, 1.5), (1, 1, 0.5, 1.0)]:
        with pytest.raises(DomainError):
            NominalFxtsGains(*bad)


def test_system_model_shapes():
    model = SystemModel(2, 1, lambda x: -x, lambda x: np.array([[0.0], [1.0]]))
    assert model.f([1, 2]).shape == (2,)
    assert model.g([1, 2]).shape == (2, 1)
    np.testing.assert_allclose(model.xdot([1, 2], [3]), [-1, 1])
    bad = SystemModel(2, 1, lambda x: np.zeros(3), lambda x: np.zeros((2, 1)))
    with pytest.raises(ValueError):
        bad.f([0, 0])


def test_goal_membership_and_gradient_check():
    goal = GoalSpec(lambda x: float(x @ x - 1), lambda x: 2 * x)
    assert goal.contains([0.5, 0.5]) and goal.contains([1.0, 0.0])
    assert not goal.contains([1.0, 0.1])
    rng = np.random.default_rng(3)
    assert gradient_check(goal, rng.uniform(-3, 3, (50, 2))) <= 1.0
    wrong = GoalSpec(goal.h, lambda x: 3 * x, analytic=True)
    assert gradient_check(wrong, rng.uniform(-3, 3, (50, 2))) > 1.0


def test_box_constraints():
    U = InputConstraintSet.box(16.0, 2)
    assert U.A.shape == (4, 2)
    assert U.contains([16, -16]) and not U.contains([16.01, 0])
    with pytest.raises(DomainError):
        InputConstraintSet.box(0.0)
