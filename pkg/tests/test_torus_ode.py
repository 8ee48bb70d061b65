"""Tests for the periodic scalar ODE closed forms."""

import numpy as np
import pytest

from hypoell import (
    OdeProblem,
    ResonantError,
    TorusFunction,
    compatibility_defect,
    ode_residual,
    resonant,
    solve_nonresonant,
    solve_resonant,
)
from hypoell.torus_ode import CompatibilityError, condition_factor, pick_branch

TWO_PI = 2 * np.pi
T_EVAL = np.linspace(0.0, TWO_PI, 17)


def fn(f, k_max=6):
    return TorusFunction.from_callable(f, k_max=k_max)


def test_resonant_predicate():
    assert resonant(1.0) is False
    assert resonant(2j) is True
    assert resonant(0.5j) is False
    assert resonant(0.0) is True
    assert resonant(1e-12 + 1j) is True
    assert resonant(1e-8 + 1j) is False


def test_constant_solution():
    p = OdeProblem(TorusFunction.constant(1.0), TorusFunction.constant(1.0))
    for branch in ("minus", "plus"):
        u = solve_nonresonant(p, branch)
        assert np.max(np.abs(u.eval_at(T_EVAL) - 1.0)) < 1e-12


def test_single_harmonic_forcing():
    # substituting u = A e^{it} gives A (i + i/2) = 1
    p = OdeProblem(TorusFunction.constant(0.5j), fn(lambda t: np.exp(1j * t)))
    u = solve_nonresonant(p, "minus")
    target = -(2j / 3) * np.exp(1j * T_EVAL)
    assert np.max(np.abs(u.eval_at(T_EVAL) - target)) < 1e-11


def test_cosine_forcing_undetermined_coefficients():
    p = OdeProblem(TorusFunction.constant(1.0), fn(np.cos))
    u = solve_nonresonant(p, "plus")
    target = 0.5 * (np.cos(T_EVAL) + np.sin(T_EVAL))
    assert np.max(np.abs(u.eval_at(T_EVAL) - target)) < 1e-11


def test_nonresonant_rejects_resonant_mean():
    p = OdeProblem(TorusFunction.constant(2j), TorusFunction.constant(1.0))
    with pytest.raises(ResonantError):
        solve_nonresonant(p, "minus")


def test_compatibility_defect_examples():
    zero_theta = TorusFunction.constant(0.0)
    assert abs(compatibility_defect(OdeProblem(zero_theta, fn(lambda t: np.exp(1j * t))))) < 1e-12
    assert abs(compatibility_defect(OdeProblem(zero_theta, TorusFunction.constant(1.0))) - TWO_PI) < 1e-12
    p = OdeProblem(TorusFunction.constant(1j), fn(lambda t: np.exp(-1j * t)))
    assert abs(compatibility_defect(p) - TWO_PI) < 1e-11


def test_resonant_solutions():
    zero_theta = TorusFunction.constant(0.0)
    p = OdeProblem(zero_theta, fn(lambda t: np.exp(1j * t)))
    u = solve_resonant(p, lam=0.0)
    target = (np.exp(1j * T_EVAL) - 1.0) / 1j
    assert np.max(np.abs(u.eval_at(T_EVAL) - target)) < 1e-11
    assert ode_residual(p, u) < 1e-8 * (1 + p.g.max_abs())

    with pytest.raises(CompatibilityError) as err:
        solve_resonant(OdeProblem(zero_theta, TorusFunction.constant(1.0)))
    assert abs(err.value.defect - TWO_PI) < 1e-10

    hom = OdeProblem(TorusFunction.constant(2j), TorusFunction.constant(0.0))
    u2 = solve_resonant(hom, lam=1.0)
    assert np.max(np.abs(u2.eval_at(T_EVAL) - np.exp(-2j * T_EVAL))) < 1e-11


def test_resonant_requires_resonant_mean():
    p = OdeProblem(TorusFunction.constant(1.0), TorusFunction.constant(0.0))
    with pytest.raises(ValueError):
        solve_resonant(p)


def test_kernel_dimensions():
    # nonresonant homogeneous problem only has the zero solution
    p = OdeProblem(fn(lambda t: 1.0 + 0.3 * np.sin(t)), TorusFunction.constant(0.0))
    u = solve_nonresonant(p, "minus")
    assert u.max_abs() < 1e-13
    # resonant homogeneous problem carries the one-parameter family
    theta = fn(lambda t: 1j + 0.2 * np.cos(t))
    for lam in (0.0, 1.0, -2.5):
        hom = OdeProblem(theta, TorusFunction.constant(0.0))
        u = solve_resonant(hom, lam=lam)
        assert ode_residual(hom, u) < 1e-9
        assert abs(u.eval_at(0.0) - lam) < 1e-10


def test_branch_agreement_and_residual_random():
    rng = np.random.default_rng(11)
    for _ in range(30):
        theta0 = rng.uniform(-1.2, 1.2) + 1j * (rng.uniform(0.15, 0.85) + rng.integers(-2, 3))
        ct = 0.25 * (rng.normal(size=3) + 1j * rng.normal(size=3))
        cg = rng.normal(size=4) + 1j * rng.normal(size=4)

        def theta_fn(t):
            return theta0 + ct[0] * np.sin(t) + ct[1] * np.cos(2 * t) + ct[2] * np.sin(3 * t)

        def g_fn(t):
            return cg[0] + cg[1] * np.exp(1j * t) + cg[2] * np.cos(2 * t) + cg[3] * np.sin(4 * t)

        p = OdeProblem(fn(theta_fn), fn(g_fn))
        um = solve_nonresonant(p, "minus")
        up = solve_nonresonant(p, "plus")
        scale = max(um.max_abs(), 1e-30)
        assert np.max(np.abs(um.eval_at(T_EVAL) - up.eval_at(T_EVAL))) < 1e-9 * scale
        assert ode_residual(p, um) < 1e-8 * (1 + p.g.max_abs())


def test_conditioning_rule():
    assert pick_branch(1.0 + 0.3j) == "minus"
    assert pick_branch(-1.0 + 0.3j) == "plus"
    # the favored branch has the bounded denominator for large |Re theta0|
    assert condition_factor(5.0, "minus") < 2.0
    assert condition_factor(5.0, "plus") < 1.0
    assert condition_factor(-5.0, "plus") < 2.0
