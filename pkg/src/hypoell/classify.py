"""Decide rapid-decay (Schwartz) global hypoellipticity and global solvability.

The operator L = d_t + c(t) d_x + q(t) on T^1 x R is classified through its
constant-mean model: only the means c0, q0 and the imaginary part b = Im(c)
enter any verdict.  Hypoellipticity holds iff the symbol k + c0*xi - i*q0 has
no zero over Z x R and b does not change sign; every verdict is returned with
a machine-checkable certificate (a concrete zero frequency, a sign-change
pair, or a positive lower bound on the symbol).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trigfun import TorusFunction, changes_sign, sublevels_connected

INT_TOL = 1e-10


def _near_int(x: float, tol=INT_TOL) -> bool:
    return abs(x - round(x)) < tol


def _dist_int(x: float) -> float:
    return abs(x - round(x))


@dataclass(eq=False)
class OperatorSpec:
    """The operator d_t + c(t) d_x + q(t) with cached means and split parts."""

    c: TorusFunction
    q: TorusFunction

    def __post_init__(self):
        self.c0 = self.c.mean()
        self.q0 = self.q.mean()
        self.a0 = self.c0.real
        self.b0 = self.c0.imag
        self.a = self.c.real_part()
        self.b = self.c.imag_part()

    @classmethod
    def from_constants(cls, c0, q0):
        return cls(TorusFunction.constant(complex(c0)), TorusFunction.constant(complex(q0)))

    def b_is_zero(self) -> bool:
        scale = max(1.0, self.c.max_abs())
        return self.b.max_abs() <= 1e-12 * scale


@dataclass
class SigmaSet:
    """The singular frequencies {xi : c0*xi - i*q0 in Z}.

    kind is one of 'empty', 'point' (a single xi_star), 'lattice'
    (base + step*Z) or 'all'.
    """

    kind: str
    xi_star: float | None = None
    base: float | None = None
    step: float | None = None

    def grid_indices(self, xi: np.ndarray, tol=INT_TOL):
        """Indices of grid frequencies lying exactly (to tol) in the set."""
        if self.kind == "empty":
            return np.zeros(xi.shape, dtype=bool)
        if self.kind == "all":
            return np.ones(xi.shape, dtype=bool)
        if self.kind == "point":
            return np.abs(xi - self.xi_star) < tol
        ratio = (xi - self.base) / self.step
        return np.abs(ratio - np.round(ratio)) < tol / abs(self.step)

    def to_json(self):
        out = {"kind": self.kind}
        if self.kind == "point":
            out["xi"] = float(self.xi_star)
        elif self.kind == "lattice":
            out["base"] = float(self.base)
            out["step"] = float(self.step)
        return out


@dataclass
class SymbolZeroSet:
    nonempty: bool
    witness: tuple[int, float] | None
    sigma: SigmaSet


def symbol_zero_set(c0: complex, q0: complex, tol=INT_TOL) -> SymbolZeroSet:
    """Case analysis of {(k, xi) : k + c0*xi - i*q0 = 0}.

    The zero set is nonempty iff the singular frequency set is, since k runs
    over all integers.  Integer membership is tested to ``tol``.
    """
    a0, b0 = complex(c0).real, complex(c0).imag
    re_q, im_q = complex(q0).real, complex(q0).imag
    if abs(b0) >= tol:
        xi_star = re_q / b0
        rho = a0 * xi_star + im_q
        if _near_int(rho, tol):
            k0 = -int(round(rho))
            return SymbolZeroSet(True, (k0, xi_star), SigmaSet("point", xi_star=xi_star))
        return SymbolZeroSet(False, None, SigmaSet("empty"))
    if abs(a0) >= tol:
        if abs(re_q) < tol:
            base = -im_q / a0
            return SymbolZeroSet(True, (0, base), SigmaSet("lattice", base=base, step=-1.0 / a0))
        return SymbolZeroSet(False, None, SigmaSet("empty"))
    if abs(re_q) < tol and _near_int(im_q, tol):
        return SymbolZeroSet(True, (-int(round(im_q)), 0.0), SigmaSet("all"))
    return SymbolZeroSet(False, None, SigmaSet("empty"))


def _symbol_grid_min(c0, q0, k_half=1000, xi_half=1000.0, xi_points=200001):
    """Min of |k + c0*xi - i*q0| over the search box.

    For each grid xi the optimal integer k is the rounded minimizer clipped to
    the box, which equals the exhaustive scan over k in [-k_half, k_half].
    """
    a0, b0 = complex(c0).real, complex(c0).imag
    re_q, im_q = complex(q0).real, complex(q0).imag
    xi = np.linspace(-xi_half, xi_half, xi_points)
    real_shift = a0 * xi + im_q
    k_best = np.clip(np.round(-real_shift), -k_half, k_half)
    re_part = k_best + real_shift
    im_part = b0 * xi - re_q
    return float(np.min(np.hypot(re_part, im_part)))


def epsilon_lower_bound(c0: complex, q0: complex, cross_check=True, tol=INT_TOL) -> float:
    """Positive lower bound on |k + c0*xi - i*q0| when the zero set is empty.

    Uses the closed-form case bounds and, by default, cross-checks that a
    brute-force search over k in [-1000, 1000] and a dense xi grid on
    [-1000, 1000] never dips below the returned value.
    """
    zs = symbol_zero_set(c0, q0, tol)
    if zs.nonempty:
        raise ValueError("zero set is nonempty: no positive lower bound exists")
    a0, b0 = complex(c0).real, complex(c0).imag
    re_q, im_q = complex(q0).real, complex(q0).imag
    if abs(b0) < tol:
        eps0 = abs(re_q) if abs(re_q) >= tol else _dist_int(im_q)
    else:
        eps = _dist_int(a0 * re_q / b0 + im_q)
        if abs(a0) < tol:
            eps0 = eps
        else:
            eps0 = 0.5 * min(eps / 2.0, eps * abs(b0) / (2.0 * abs(a0)))
    if cross_check:
        grid_min = _symbol_grid_min(c0, q0)
        if grid_min < eps0 - 1e-8:
            raise RuntimeError(
                f"lower bound {eps0:.3e} undercut by grid search value {grid_min:.3e}"
            )
    return float(eps0)


@dataclass
class Certificate:
    kind: str  # 'zero_frequency' | 'sign_change' | 'lower_bound'
    k0: int | None = None
    xi0: float | None = None
    t_plus: float | None = None
    t_minus: float | None = None
    epsilon0: float | None = None

    def to_json(self):
        out = {"kind": self.kind}
        if self.kind == "zero_frequency":
            out["k0"] = int(self.k0)
            out["xi0"] = float(self.xi0)
        elif self.kind == "sign_change":
            out["t_plus"] = float(self.t_plus)
            out["t_minus"] = float(self.t_minus)
        else:
            out["epsilon0"] = float(self.epsilon0)
        return out


@dataclass
class Verdict:
    sgh: bool
    certificate: Certificate

    def to_json(self):
        return {"sgh": bool(self.sgh), "certificate": self.certificate.to_json()}


@dataclass
class SolvabilityVerdict:
    gs: str  # 'solvable' | 'not_solvable' | 'undetermined'
    case: str
    sigma: SigmaSet

    def to_json(self):
        return {"gs": self.gs, "case": self.case, "sigma": self.sigma.to_json()}


def is_sgh(op: OperatorSpec) -> Verdict:
    """Hypoellipticity verdict with certificate.

    Only (c0, q0, b) matter: replacing a or q by any zero-mean perturbation of
    itself leaves the verdict unchanged (the conjugation by the associated
    automorphisms reduces L to its constant-mean model).
    """
    zs = symbol_zero_set(op.c0, op.q0)
    if zs.nonempty:
        k0, xi0 = zs.witness
        return Verdict(False, Certificate("zero_frequency", k0=k0, xi0=xi0))
    changed, wit = changes_sign(op.b)
    if changed:
        return Verdict(False, Certificate("sign_change", t_plus=wit[0], t_minus=wit[1]))
    return Verdict(True, Certificate("lower_bound", epsilon0=epsilon_lower_bound(op.c0, op.q0)))


def is_gs(op: OperatorSpec) -> SolvabilityVerdict:
    """Global solvability verdict.

    Decision tree: b identically zero gives the constant-coefficient /
    real-coefficient solvable class; b of one sign (hence b0 != 0) is
    solvable; a sign change is an obstruction except in the fully resonant
    situation c0 = 0, q0 in i*Z, where connected sublevels of the running
    integral of b certify solvability and anything else stays undetermined
    (no verdict is licensed there).
    """
    sigma = symbol_zero_set(op.c0, op.q0).sigma
    if op.b_is_zero():
        return SolvabilityVerdict("solvable", "constant_coefficient", sigma)
    changed, _ = changes_sign(op.b)
    if not changed:
        return SolvabilityVerdict("solvable", "nonvanishing_b", sigma)
    fully_resonant = (
        abs(op.b0) < INT_TOL
        and abs(op.a0) < INT_TOL
        and abs(op.q0.real) < INT_TOL
        and _near_int(op.q0.imag)
    )
    if not fully_resonant:
        # The obstruction needs b0 != 0 or Re q0 != 0 or a0 != 0 or Im q0 not
        # an integer.  Outside the fully resonant case at least one of these
        # holds, so the guard below cannot fire; it is kept to mirror the
        # hypothesis of the non-solvability construction.
        if (
            abs(op.b0) >= INT_TOL
            or abs(op.q0.real) >= INT_TOL
            or abs(op.a0) >= INT_TOL
            or not _near_int(op.q0.imag)
        ):
            return SolvabilityVerdict("not_solvable", "sign_change_obstruction", sigma)
        return SolvabilityVerdict("undetermined", "undetermined", sigma)
    if sublevels_connected(op.b):
        return SolvabilityVerdict("solvable", "connected_sublevel", sigma)
    return SolvabilityVerdict("undetermined", "undetermined", sigma)


def constant_coefficient_sgh(c1: complex, c2: complex, c3: complex) -> bool:
    """Hypoellipticity of the general constant form c1 d_t + c2 d_x + c3.

    Normalizes by a nonzero leading coefficient; scaling the whole operator
    by any nonzero complex number does not change the answer.
    """
    c1, c2, c3 = complex(c1), complex(c2), complex(c3)
    if c1 != 0:
        return not symbol_zero_set(c2 / c1, c3 / c1).nonempty
    if c2 == 0:
        raise ValueError("c1 and c2 cannot both vanish")
    # zero iff xi = i*c3/c2 is real for some real xi
    return abs((1j * c3 / c2).imag) >= INT_TOL
