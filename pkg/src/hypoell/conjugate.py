"""Automorphisms intertwining L with its constant-mean model.

Two invertible maps act on fields: a phase twist in the (t, xi) plane built
from the antiderivative A of a - a0 (equivalently a t-dependent shift in x),
and a row scaling by e^{Q(t)} with Q the antiderivative of q - q0.  Composing
them conjugates d_t + (a(t) + i b(t)) d_x + q(t) into
d_t + (a0 + i b(t)) d_x + q0, which is what the classifier and solver work
with.  Both maps preserve rapid decay and are exactly invertible on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .classify import OperatorSpec
from .mixedfft import Field, HalfSpectrum, forward_x, inverse_x, spectral_apply
from .trigfun import TorusFunction


@dataclass(eq=False)
class ConjugationPair:
    """Antiderivatives A (real) and Q (complex) driving the two maps."""

    A: TorusFunction
    Q: TorusFunction

    @classmethod
    def from_operator(cls, op: OperatorSpec):
        return cls(op.a.antiderivative_zero_mean(), op.q.antiderivative_zero_mean())

    def is_trivial(self, tol=1e-14) -> bool:
        return self.A.max_abs() <= tol and self.Q.max_abs() <= tol


def psi_a(uhat: HalfSpectrum, A: TorusFunction, sign=1) -> HalfSpectrum:
    """Multiply uhat(t, xi) by e^{i * sign * xi * A(t)}.

    A must be real-valued; the map is then modulus-preserving per entry and
    sign = -1 gives the exact inverse.
    """
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    if not A.is_real:
        raise ValueError("psi_a requires a real-valued phase antiderivative")
    g = uhat.grid
    a_vals = A.eval_at(g.t).real
    phase = np.exp(1j * sign * np.outer(a_vals, g.xi))
    return HalfSpectrum(g, phase * uhat.values)


def psi_q(u, Q: TorusFunction, sign=1):
    """Scale each t-row by e^{sign * Q(t)}; works on fields and half spectra."""
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    g = u.grid
    rows = np.exp(sign * Q.eval_at(g.t))[:, None]
    return type(u)(g, rows * u.values)


def psi_field(u: Field, pair: ConjugationPair, sign=1) -> Field:
    """Full conjugation on a field: row scaling first, then the phase twist.

    sign = -1 applies the inverse composition (phase twist undone first).
    """
    if sign == 1:
        v = psi_q(u, pair.Q, 1)
        return inverse_x(psi_a(forward_x(v, check_boundary=False), pair.A, 1))
    w = inverse_x(psi_a(forward_x(u, check_boundary=False), pair.A, -1))
    return psi_q(w, pair.Q, -1)


def reduced_operator(op: OperatorSpec) -> OperatorSpec:
    """Constant-mean model: d_t + (a0 + i b(t)) d_x + q0."""
    c_red = TorusFunction.constant(complex(op.a0)) + 1j * op.b
    return OperatorSpec(c_red, TorusFunction.constant(op.q0))


def intertwine_check(op: OperatorSpec, u: Field, check_boundary=True) -> float:
    """Max-norm of (reduced L)(Psi u) - Psi(L u) for a test field u.

    Vanishes analytically; the returned value measures grid truncation only
    and should sit at rounding level for band-limited decaying fields.
    """
    pair = ConjugationPair.from_operator(op)
    target = reduced_operator(op)
    lhs = spectral_apply(target, psi_field(u, pair, 1), check_boundary=check_boundary)
    rhs = psi_field(spectral_apply(op, u, check_boundary=check_boundary), pair, 1)
    return float(np.max(np.abs(lhs.values - rhs.values)))
