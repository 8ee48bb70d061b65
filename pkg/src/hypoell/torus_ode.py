"""Closed-form solver for the periodic scalar ODE u' + theta(t) u = g(t).

For theta with mean theta0 not in i*Z the periodic solution is unique and is
given by either of two equivalent window-integral formulas (integrating
backward or forward over one period).  Their denominators, 1 - e^{-2pi theta0}
and e^{2pi theta0} - 1, condition differently depending on the sign of
Re(theta0), which is why both are kept.  In the resonant case theta0 in i*Z
the kernel is one-dimensional and solvability requires a vanishing pairing of
g against the adjoint kernel element (the compatibility defect).

Window integrals are evaluated by Gauss-Legendre quadrature (the integrands
are analytic but not periodic in the integration variable, so the plain
trapezoid rule would lose spectral accuracy).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .trigfun import TWO_PI, TorusFunction

RESONANCE_TOL = 1e-10


class ResonantError(ValueError):
    """Nonresonant branch formula requested for a resonant mean."""


class CompatibilityError(ValueError):
    """Resonant problem whose right-hand side fails the kernel pairing test."""

    def __init__(self, defect, tol):
        self.defect = defect
        self.tol = tol
        super().__init__(
            f"resonant problem is unsolvable: compatibility defect {abs(defect):.3e} exceeds {tol:.1e}"
        )


@dataclass(eq=False)
class OdeProblem:
    theta: TorusFunction
    g: TorusFunction

    @property
    def theta0(self) -> complex:
        return self.theta.mean()


def resonant(theta0: complex, tol=RESONANCE_TOL) -> bool:
    """True iff theta0 is within ``tol`` of i*Z."""
    z = complex(theta0)
    return abs(z.real) < tol and abs(z.imag - round(z.imag)) < tol


@lru_cache(maxsize=16)
def _gl_period(n: int):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return np.pi * (nodes + 1.0), np.pi * weights


def condition_factor(theta0: complex, branch: str) -> float:
    """Reciprocal modulus of the branch denominator (large means ill-conditioned)."""
    if branch == "minus":
        d = abs(1.0 - np.exp(-TWO_PI * theta0))
    elif branch == "plus":
        d = abs(np.exp(TWO_PI * theta0) - 1.0)
    else:
        raise ValueError("branch must be 'minus' or 'plus'")
    return np.inf if d == 0.0 else 1.0 / d


def pick_branch(theta0: complex) -> str:
    """Branch whose denominator stays away from zero and whose kernel decays."""
    return "minus" if complex(theta0).real > 0 else "plus"


def solve_nonresonant(problem: OdeProblem, branch="auto", n_quad=192, n_out=None) -> TorusFunction:
    """Unique periodic solution via the selected window-integral branch.

    Both branches agree analytically; numerically they agree to roughly
    1e-9 relative whenever 2*pi*|Re theta0| is moderate (below ~20).
    """
    theta0 = problem.theta0
    if resonant(theta0):
        raise ResonantError("resonant: use solve_resonant")
    if branch == "auto":
        branch = pick_branch(theta0)
    if branch not in ("minus", "plus"):
        raise ValueError("branch must be 'minus', 'plus' or 'auto'")

    theta_p = problem.theta.antiderivative_zero_mean()
    if n_out is None:
        n_out = max(problem.g.n_grid, problem.theta.n_grid, 256)
    t = TWO_PI * np.arange(n_out) / n_out
    s, w = _gl_period(n_quad)

    if branch == "plus":
        pts = t[:, None] + s[None, :]
        expo = theta0 * s[None, :] + theta_p.eval_at(pts) - theta_p.eval_at(t)[:, None]
        denom = np.exp(TWO_PI * theta0) - 1.0
    else:
        pts = t[:, None] - s[None, :]
        expo = -theta0 * s[None, :] + theta_p.eval_at(pts) - theta_p.eval_at(t)[:, None]
        denom = 1.0 - np.exp(-TWO_PI * theta0)

    vals = (problem.g.eval_at(pts) * np.exp(expo)) @ w / denom
    return TorusFunction.from_samples(vals, k_max=(n_out - 4) // 4)


def compatibility_defect(problem: OdeProblem, n_quad=256) -> complex:
    """Pairing integral of g against e^{int_0^t theta}; zero means solvable."""
    theta0 = problem.theta0
    theta_p = problem.theta.antiderivative_zero_mean()
    tau, w = _gl_period(n_quad)
    vals = problem.g.eval_at(tau) * np.exp(theta0 * tau + theta_p.eval_at(tau))
    return complex(vals @ w)


def solve_resonant(problem: OdeProblem, lam=0.0, tol_compat=None, n_out=None) -> TorusFunction:
    """One member of the solution family in the resonant case theta0 in i*Z.

    The returned solution is lam * e^{-int theta} plus the particular solution
    obtained by integrating from t = 0.  Raises CompatibilityError when the
    defect exceeds the tolerance (default 1e-8 * (1 + max|g|)).
    """
    theta0 = problem.theta0
    if not resonant(theta0):
        raise ValueError("nonresonant mean: use solve_nonresonant")
    if tol_compat is None:
        tol_compat = 1e-8 * (1.0 + problem.g.max_abs())
    defect = compatibility_defect(problem)
    if abs(defect) > tol_compat:
        raise CompatibilityError(defect, tol_compat)

    # Snap the mean onto i*Z so every factor below is exactly periodic; the
    # snap distance is below RESONANCE_TOL and enters the residual linearly.
    m = int(round(complex(theta0).imag))
    theta_p = problem.theta.antiderivative_zero_mean()
    if n_out is None:
        n_out = max(problem.g.n_grid, problem.theta.n_grid, 256)
    k_out = (n_out - 4) // 4

    def forced(tt):
        return problem.g.eval_at(tt) * np.exp(1j * m * tt + theta_p.eval_at(tt))

    gtil = TorusFunction.from_callable(forced, k_max=k_out, n_grid=n_out)
    prim = gtil.antiderivative_zero_mean()
    t = TWO_PI * np.arange(n_out) / n_out
    kernel = np.exp(-1j * m * t - theta_p.eval_at(t))
    vals = kernel * (lam + prim.eval_at(t))
    return TorusFunction.from_samples(vals, k_max=k_out)


def ode_residual(problem: OdeProblem, u: TorusFunction, refine=4) -> float:
    """Max-norm of u' + theta u - g on a refined grid."""
    n = refine * max(u.n_grid, problem.theta.n_grid, problem.g.n_grid)
    t = TWO_PI * np.arange(n) / n
    du = u.derivative().eval_at(t)
    res = du + problem.theta.eval_at(t) * u.eval_at(t) - problem.g.eval_at(t)
    return float(np.max(np.abs(res)))
