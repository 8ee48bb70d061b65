"""Classification tests: symbol zeros, lower bounds, hypoellipticity, solvability."""

import numpy as np
import pytest

from hypoell import (
    OperatorSpec,
    TorusFunction,
    constant_coefficient_sgh,
    epsilon_lower_bound,
    is_gs,
    is_sgh,
    symbol_zero_set,
)

TWO_PI = 2 * np.pi


def fn(f, k_max=6):
    return TorusFunction.from_callable(f, k_max=k_max)


def brute_force_min(c0, q0, k_half=50, xi_half=50.0, n_xi=20001):
    """Exhaustive symbol minimum over a box (the per-xi optimal k is the
    rounded clip, identical to scanning all integers in the box)."""
    a0, b0 = complex(c0).real, complex(c0).imag
    re_q, im_q = complex(q0).real, complex(q0).imag
    xi = np.linspace(-xi_half, xi_half, n_xi)
    shift = a0 * xi + im_q
    k = np.clip(np.round(-shift), -k_half, k_half)
    return float(np.min(np.hypot(k + shift, b0 * xi - re_q)))


def test_symbol_zero_set_examples():
    zs = symbol_zero_set(1j, 0.0)
    assert zs.nonempty and zs.witness == (0, 0.0) and zs.sigma.kind == "point"
    assert brute_force_min(1j, 0.0) < 1e-6

    zs2 = symbol_zero_set(1j, 0.5j)
    assert not zs2.nonempty and zs2.sigma.kind == "empty"
    assert brute_force_min(1j, 0.5j) > 1e-3

    # b = 0 with nonzero real part of q never vanishes
    zs3 = symbol_zero_set(0.0, 1.0)
    assert not zs3.nonempty


def test_symbol_zero_set_lattice_and_all():
    zs = symbol_zero_set(1.0, 0.25j)
    assert zs.nonempty and zs.sigma.kind == "lattice"
    base, step = zs.sigma.base, zs.sigma.step
    for k in (-2, 0, 3):
        xi_k = base + step * k
        assert abs(round(-(1.0 * xi_k + 0.25)) + 1.0 * xi_k + 0.25) < 1e-10
    zs2 = symbol_zero_set(0.0, 2j)
    assert zs2.nonempty and zs2.sigma.kind == "all"
    assert symbol_zero_set(0.0, 0.5j).sigma.kind == "empty"


def test_epsilon_lower_bound_examples():
    assert abs(epsilon_lower_bound(1j, 0.5j) - 0.5) < 1e-12
    assert abs(epsilon_lower_bound(0.0, 1.0) - 1.0) < 1e-12
    assert abs(epsilon_lower_bound(0.0, 0.5j) - 0.5) < 1e-12
    with pytest.raises(ValueError):
        epsilon_lower_bound(1j, 0.0)


def test_epsilon_lower_bound_never_undercut():
    rng = np.random.default_rng(5)
    for _ in range(25):
        c0 = rng.normal() + 1j * rng.normal()
        q0 = rng.normal() + 1j * rng.normal()
        zs = symbol_zero_set(c0, q0)
        if zs.nonempty:
            continue
        eps = epsilon_lower_bound(c0, q0)
        assert eps > 0
        assert brute_force_min(c0, q0) >= eps - 1e-8


def test_is_sgh_examples():
    op = OperatorSpec(fn(lambda t: 1j * np.sin(t) + 1j), TorusFunction.constant(0.5j))
    v = is_sgh(op)
    assert v.sgh and v.certificate.kind == "lower_bound"
    assert abs(v.certificate.epsilon0 - 0.5) < 1e-12

    op2 = OperatorSpec(fn(lambda t: 1j * np.sin(t)), TorusFunction.constant(0.5j))
    v2 = is_sgh(op2)
    assert not v2.sgh and v2.certificate.kind == "sign_change"
    t_plus, t_minus = v2.certificate.t_plus, v2.certificate.t_minus
    assert op2.b.eval_at(t_plus).real > 0 > op2.b.eval_at(t_minus).real

    op3 = OperatorSpec(TorusFunction.constant(1.0), TorusFunction.constant(0.0))
    v3 = is_sgh(op3)
    assert not v3.sgh and v3.certificate.kind == "zero_frequency"
    k0, xi0 = v3.certificate.k0, v3.certificate.xi0
    assert abs(k0 + op3.c0 * xi0 - 1j * op3.q0) < 1e-8


def test_is_sgh_mean_perturbation_invariance():
    """Zero-mean changes to a and q cannot change the verdict."""
    rng = np.random.default_rng(8)
    for _ in range(10):
        b_fn = fn(lambda t: 1j * (0.5 + np.sin(t)))
        q0 = rng.normal() + 1j * rng.normal()
        base = OperatorSpec(b_fn, TorusFunction.constant(q0))
        pert_a = fn(lambda t: 0.7 * np.cos(3 * t))
        pert_q = fn(lambda t: (0.2 + 0.5j) * np.sin(2 * t))
        shifted = OperatorSpec(b_fn + pert_a, TorusFunction.constant(q0) + pert_q)
        assert is_sgh(base).sgh == is_sgh(shifted).sgh


def test_scaling_invariance_constant_form():
    rng = np.random.default_rng(12)
    for _ in range(20):
        c1 = 1.0
        c2 = rng.normal() + 1j * rng.normal()
        c3 = rng.normal() + 1j * rng.normal()
        mu = rng.normal() + 1j * rng.normal()
        if abs(mu) < 0.1:
            mu = 1.0 + 1j
        assert constant_coefficient_sgh(c1, c2, c3) == constant_coefficient_sgh(mu * c1, mu * c2, mu * c3)


def test_is_gs_examples():
    g1 = is_gs(OperatorSpec(fn(lambda t: 1j * np.sin(t)), TorusFunction.constant(0.0)))
    assert g1.gs == "solvable" and g1.case == "connected_sublevel" and g1.sigma.kind == "all"

    g2 = is_gs(OperatorSpec(fn(lambda t: 1j * np.sin(2 * t)), TorusFunction.constant(0.0)))
    assert g2.gs == "undetermined"

    g3 = is_gs(OperatorSpec(fn(lambda t: 1j * np.sin(t)), TorusFunction.constant(0.5j)))
    assert g3.gs == "not_solvable" and g3.case == "sign_change_obstruction"

    g4 = is_gs(OperatorSpec(TorusFunction.constant(2.0), fn(lambda t: 1.0 + np.sin(t))))
    assert g4.gs == "solvable" and g4.case == "constant_coefficient"

    g5 = is_gs(OperatorSpec(fn(lambda t: 1j * (1 + np.sin(t))), TorusFunction.constant(0.5j)))
    assert g5.gs == "solvable" and g5.case == "nonvanishing_b"


def test_sgh_never_contradicts_solvability():
    rng = np.random.default_rng(21)
    cases = [
        OperatorSpec(fn(lambda t: 1j * (1 + np.sin(t))), TorusFunction.constant(0.5j)),
        OperatorSpec(TorusFunction.constant(1j), TorusFunction.constant(0.5j)),
        OperatorSpec(TorusFunction.constant(0.0), TorusFunction.constant(1.0)),
        OperatorSpec(TorusFunction.constant(np.sqrt(2)), TorusFunction.constant(0.3)),
    ]
    for _ in range(10):
        b0 = rng.uniform(0.5, 2.0)
        q0 = rng.normal() + 1j * rng.normal()
        cases.append(OperatorSpec(fn(lambda t: 1j * (b0 + np.sin(t)) * 0.9), TorusFunction.constant(q0)))
    for op in cases:
        if is_sgh(op).sgh:
            assert is_gs(op).gs != "not_solvable"


def test_verdict_json_shapes():
    op = OperatorSpec(fn(lambda t: 1j * np.sin(t) + 1j), TorusFunction.constant(0.5j))
    v = is_sgh(op).to_json()
    assert set(v) == {"sgh", "certificate"}
    s = is_gs(op).to_json()
    assert set(s) == {"gs", "case", "sigma"}
    assert s["sigma"]["kind"] in {"empty", "point", "lattice", "all"}
