"""Conjugation map tests: invertibility, modulus preservation, intertwining."""

import numpy as np
import pytest

from hypoell import (
    CylinderGrid,
    Field,
    OperatorSpec,
    TorusFunction,
    forward_x,
    intertwine_check,
    psi_a,
    psi_field,
    psi_q,
)
from hypoell.conjugate import ConjugationPair, reduced_operator

GRID = CylinderGrid(64, 512, 20.0)


def fn(f, k_max=6):
    return TorusFunction.from_callable(f, k_max=k_max)


def test_field(k=1, shift=0.0):
    prof = np.exp(-0.5 * ((GRID.x - shift)) ** 2)
    return Field(GRID, np.outer(np.exp(1j * k * GRID.t), prof))


def test_pair_construction():
    op = OperatorSpec(fn(np.cos) + TorusFunction.constant(0.5), fn(lambda t: 1j * np.cos(t)))
    pair = ConjugationPair.from_operator(op)
    t = np.linspace(0, 2 * np.pi, 21)
    assert np.max(np.abs(pair.A.eval_at(t) - np.sin(t))) < 1e-12
    assert np.max(np.abs(pair.Q.eval_at(t) - 1j * np.sin(t))) < 1e-12
    assert abs(pair.A.eval_at(0.0)) < 1e-13 and abs(pair.Q.eval_at(0.0)) < 1e-13
    assert pair.A.is_real


def test_psi_a_identity_and_inverse():
    uh = forward_x(test_field())
    zero = TorusFunction.constant(0.0)
    out = psi_a(uh, zero, 1)
    assert np.max(np.abs(out.values - uh.values)) == 0.0
    A = fn(np.sin)
    rt = psi_a(psi_a(uh, A, 1), A, -1)
    assert np.max(np.abs(rt.values - uh.values)) < 1e-14 * np.max(np.abs(uh.values))
    # modulus preserved entrywise
    fwd = psi_a(uh, A, 1)
    assert np.max(np.abs(np.abs(fwd.values) - np.abs(uh.values))) < 1e-13


def test_psi_a_phase_values():
    uh = forward_x(test_field(0))
    A = fn(np.sin)
    out = psi_a(uh, A, 1)
    expected = np.exp(1j * np.outer(np.sin(GRID.t), GRID.xi)) * uh.values
    assert np.max(np.abs(out.values - expected)) < 1e-12 * np.max(np.abs(uh.values))


def test_psi_a_rejects_complex_phase():
    uh = forward_x(test_field())
    with pytest.raises(ValueError):
        psi_a(uh, fn(lambda t: 1j * np.sin(t)), 1)


def test_psi_q_rowscale_and_roundtrip():
    u = test_field(2)
    Q = fn(lambda t: 1j * np.sin(t))
    out = psi_q(u, Q, 1)
    assert np.max(np.abs(np.abs(out.values) - np.abs(u.values))) < 1e-13
    back = psi_q(out, Q, -1)
    assert np.max(np.abs(back.values - u.values)) < 1e-14
    zero = TorusFunction.constant(0.0)
    assert np.max(np.abs(psi_q(u, zero, 1).values - u.values)) == 0.0


def test_psi_field_roundtrip():
    op = OperatorSpec(fn(lambda t: 0.4 * np.cos(t) + 1j * np.sin(t)), fn(lambda t: 0.3 * np.sin(2 * t) + 0.5j))
    pair = ConjugationPair.from_operator(op)
    u = test_field(1, shift=0.5)
    back = psi_field(psi_field(u, pair, 1), pair, -1)
    assert np.max(np.abs(back.values - u.values)) < 1e-12 * np.max(np.abs(u.values))


def test_intertwine_examples():
    const = OperatorSpec(TorusFunction.constant(1.5 + 0.5j), TorusFunction.constant(0.3j))
    u = test_field(1)
    assert intertwine_check(const, u) < 1e-12

    op_a = OperatorSpec(fn(np.cos), TorusFunction.constant(0.0))
    assert intertwine_check(op_a, u) < 1e-8

    op_q = OperatorSpec(TorusFunction.constant(0.0), fn(lambda t: 1j * np.cos(t)))
    assert intertwine_check(op_q, u) < 1e-8


def test_intertwine_randomized():
    rng = np.random.default_rng(17)
    for _ in range(25):
        ca = 0.3 * rng.normal(size=3)
        cq = 0.3 * (rng.normal(size=3) + 1j * rng.normal(size=3))
        a0 = rng.uniform(-1, 1)
        b_amp = rng.uniform(0.0, 0.8)

        def c_fn(t):
            return a0 + ca[0] * np.sin(t) + ca[1] * np.cos(2 * t) + ca[2] * np.sin(4 * t) + 1j * b_amp * (1 + np.sin(t))

        def q_fn(t):
            return cq[0] + cq[1] * np.exp(1j * t) + cq[2] * np.cos(3 * t)

        op = OperatorSpec(fn(c_fn), fn(q_fn))
        k = int(rng.integers(-3, 4))
        shift = float(rng.uniform(-1.5, 1.5))
        u = test_field(k, shift)
        u = Field(GRID, u.values / np.max(np.abs(u.values)))
        assert intertwine_check(op, u) < 1e-8


def test_reduced_operator_means():
    op = OperatorSpec(fn(lambda t: 0.7 + np.cos(t) + 1j * np.sin(t)), fn(lambda t: 0.2j + np.sin(3 * t)))
    red = reduced_operator(op)
    assert abs(red.a0 - 0.7) < 1e-12
    assert red.a.max_abs() - abs(red.a0) < 1e-12  # constant real part
    assert abs(red.q0 - op.q0) < 1e-12
    t = np.linspace(0, 2 * np.pi, 15)
    assert np.max(np.abs(red.b.eval_at(t) - op.b.eval_at(t))) < 1e-12
