"""Constructive counterexamples and the window lower-bound verifier.

Three constructions certify negative classifications at grid scale.  A zero
of the symbol yields a bounded kernel element with no x-decay (so decay
diagnostics must reject it while the operator residual vanishes).  A sign
change of b yields a rapidly decaying right-hand side whose unique(ly chosen)
per-frequency solution decays only like xi^{-1/2}, evaluated here in closed
form at the window base point.  The xi^{-1/2} law itself rests on a lower
bound for concentrating window integrals against e^{-lambda psi} near a
degenerate zero of psi, which the last routine checks numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import OperatorSpec, symbol_zero_set
from .mixedfft import CylinderGrid, Field, HalfSpectrum
from .trigfun import TWO_PI, TorusFunction, changes_sign, smoothstep, windowed_integral_extrema


def _wrap_pm_pi(x):
    return np.mod(x + np.pi, TWO_PI) - np.pi


def _leggauss_ab(n, a, b):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    return mid + half * nodes, half * weights


def plateau_bump(eta, delta):
    """Smooth bump of the wrapped offset eta: 1 on |eta| <= delta/2, 0 outside |eta| < delta."""
    return smoothstep((delta - np.abs(eta)) / (0.5 * delta))


@dataclass
class WitnessRecipe:
    kind: str
    variant: str | None = None
    branch: str | None = None
    k0: int | None = None
    xi0: float | None = None
    t0: float | None = None
    s0: float | None = None
    t1: float | None = None
    s1: float | None = None
    delta: float | None = None
    window_min: float | None = None
    window_max: float | None = None
    t_center: float | None = None
    t_eval: float | None = None

    def to_json(self):
        out = {"kind": self.kind}
        for key in (
            "variant", "branch", "k0", "xi0", "t0", "s0", "t1", "s1",
            "delta", "window_min", "window_max", "t_center", "t_eval",
        ):
            val = getattr(self, key)
            if val is not None:
                out[key] = val if isinstance(val, (str, int)) else float(val)
        return out


# ----------------------------------------------------------------------
# kernel elements from symbol zeros
# ----------------------------------------------------------------------

def zero_symbol_witness(op: OperatorSpec, k0: int, xi0: float, grid: CylinderGrid):
    """Bounded kernel element v with L v = 0 and no x-decay.

    Requires k0 + c0*xi0 - i*q0 = 0 to 1e-8 (otherwise the t-profile is not
    periodic).  Returns ``(v, residual, recipe)`` where the residual is
    computed with the exact i*xi0 multiplier in x, since v does not decay and
    the windowed transform does not apply to it.
    """
    err = k0 + op.c0 * xi0 - 1j * op.q0
    if abs(err) > 1e-8:
        raise ValueError(
            f"(k0, xi0) is not a symbol zero: |k0 + c0 xi0 - i q0| = {abs(err):.3e}"
        )
    cp = op.c.antiderivative_zero_mean()
    qp = op.q.antiderivative_zero_mean()
    plane_wave = cp.max_abs() < 1e-14 and qp.max_abs() < 1e-14
    scale = 1.0 / TWO_PI if plane_wave else 1.0

    k_prof = grid.n_t // 2 - 1
    profile = TorusFunction.from_callable(
        lambda t: scale * np.exp(1j * k0 * t - 1j * xi0 * cp.eval_at(t) - qp.eval_at(t)),
        k_max=k_prof,
    )
    v = Field(grid, np.outer(profile.eval_at(grid.t), np.exp(1j * xi0 * grid.x)))

    n_fine = 4 * profile.n_grid
    t = TWO_PI * np.arange(n_fine) / n_fine
    res_profile = (
        profile.derivative().eval_at(t)
        + (1j * xi0 * op.c.eval_at(t) + op.q.eval_at(t)) * profile.eval_at(t)
    )
    residual = float(np.max(np.abs(res_profile)))
    recipe = WitnessRecipe(
        kind="plane_wave" if plane_wave else "kernel_element", k0=int(k0), xi0=float(xi0)
    )
    return v, residual, recipe


# ----------------------------------------------------------------------
# sign-change construction
# ----------------------------------------------------------------------

def _zeta_cutoff(sigma):
    """Smooth cutoff vanishing near the singular set, 1 on an unbounded part."""
    if sigma.kind == "empty":
        return lambda xi: np.ones_like(np.asarray(xi, dtype=float))
    if sigma.kind == "point":
        xi_star, rho = sigma.xi_star, 1.0
        return lambda xi: smoothstep((np.abs(np.asarray(xi, float) - xi_star) - 0.5 * rho) / (0.5 * rho))
    if sigma.kind == "lattice":
        base, step = sigma.base, abs(sigma.step)

        def zeta(xi):
            ratio = (np.asarray(xi, float) - base) / step
            dist = step * np.abs(ratio - np.round(ratio))
            return smoothstep((dist - step / 4.0) / (step / 4.0))

        return zeta
    raise ValueError("singular set covers every frequency: no admissible cutoff")


def sign_change_witness(op: OperatorSpec, grid: CylinderGrid, variant="auto", delta=None, n_quad=240):
    """Right-hand side defeating rapid decay when b changes sign.

    Returns ``(fhat, eval_u, recipe)``: the constructed spectrum on the grid,
    a closed-form evaluator xi -> uhat(t_eval, xi) for the forced solution at
    the window base point, and the construction parameters.  The evaluator
    obeys uhat * sqrt(xi) >= K > 0 for large xi.

    variant 'sgh' requires an empty symbol zero set (the forced solution is
    then the unique tempered one); variant 'gs' additionally cuts the data
    off the singular set, which must not cover every frequency.  'auto'
    picks 'sgh' when the zero set is empty and 'gs' otherwise.
    """
    changed, _ = changes_sign(op.b)
    if not changed:
        raise ValueError("b does not change sign")
    zs = symbol_zero_set(op.c0, op.q0)
    if variant == "auto":
        variant = "sgh" if not zs.nonempty else "gs"
    if variant == "sgh":
        if zs.nonempty:
            raise ValueError("symbol zero set is nonempty: use the 'gs' variant")
        zeta = lambda xi: np.ones_like(np.asarray(xi, dtype=float))
    elif variant == "gs":
        zeta = _zeta_cutoff(zs.sigma)
    else:
        raise ValueError("variant must be 'sgh', 'gs' or 'auto'")

    if delta is None:
        # after centering the bump, the distance from its center to the cut
        # points of the period is pi
        delta = np.pi / 4.0
    a0, q0, c0 = op.a0, op.q0, op.c0
    prim = op.b.antiderivative_zero_mean()
    b0 = op.b0
    lo, t0, s0, hi, t1, s1 = windowed_integral_extrema(op.b)

    pair_a = op.a.antiderivative_zero_mean()
    pair_q = op.q.antiderivative_zero_mean()
    conj_needed = pair_a.max_abs() > 1e-14 or pair_q.max_abs() > 1e-14

    psi_cut = smoothstep

    if b0 >= 0:
        if not lo < -1e-12:
            raise ValueError("window minimum is not negative")
        t_center = float(np.mod(t0 + s0, TWO_PI))
        t_eval, s_win, window = t0, s0, lo

        def prefactor(xi):
            return (np.exp(TWO_PI * 1j * (xi * c0 - 1j * q0)) - 1.0) * np.exp(window * xi)

        def tdiff(eta):
            return s0 + eta

        def g_window(s):
            return prim.eval_at(t0 + s).real - prim.eval_at(t0).real + b0 * s

        def exponent(xi, s):
            return np.multiply.outer(np.asarray(xi, float), window - g_window(s))

        branch = "lower_window"
    else:
        if not hi > 1e-12:
            raise ValueError("window maximum is not positive")
        t_center = float(np.mod(t1 - s1, TWO_PI))
        t_eval, s_win, window = t1, s1, hi

        def prefactor(xi):
            return (1.0 - np.exp(-TWO_PI * 1j * (xi * c0 - 1j * q0))) * np.exp(-window * xi)

        def tdiff(eta):
            return eta - s1

        def g_window(s):
            return prim.eval_at(t1).real - prim.eval_at(t1 - s).real + b0 * s

        def exponent(xi, s):
            return np.multiply.outer(np.asarray(xi, float), -(window - g_window(s)))

        branch = "upper_window"

    # spectrum on the grid
    t = grid.t
    xi = grid.xi
    eta_t = _wrap_pm_pi(t - t_center)
    phi_t = plateau_bump(eta_t, delta)
    shift = tdiff(eta_t)
    pref = prefactor(xi) * psi_cut(xi) * zeta(xi)
    rows = phi_t[:, None] * np.exp(-np.outer(shift, 1j * a0 * xi) - q0 * shift[:, None])
    vals = rows * pref[None, :]
    if conj_needed:
        vals = np.exp(-1j * np.outer(pair_a.eval_at(t).real, xi) - pair_q.eval_at(t)[:, None]) * vals
    fhat = HalfSpectrum(grid, vals)

    # closed-form evaluator at the base point; the integrand is supported on
    # s in [s_win - delta, s_win + delta], wrapped back into [0, 2*pi]
    pieces = []
    lo_s, hi_s = s_win - delta, s_win + delta
    pieces.append((max(lo_s, 0.0), min(hi_s, TWO_PI)))
    if lo_s < 0.0:
        pieces.append((lo_s + TWO_PI, TWO_PI))
    if hi_s > TWO_PI:
        pieces.append((0.0, hi_s - TWO_PI))
    uncj_eval = (lambda xv: np.exp(-1j * pair_a.eval_at(t_eval).real * np.asarray(xv, float)
                                   - pair_q.eval_at(t_eval))) if conj_needed else None

    def eval_u(xi_values):
        xv = np.asarray(xi_values, dtype=float)
        total = np.zeros(xv.shape, dtype=complex)
        for a_end, b_end in pieces:
            if b_end <= a_end:
                continue
            s_nodes, w_nodes = _leggauss_ab(n_quad, a_end, b_end)
            phi_vals = plateau_bump(_wrap_pm_pi((t_eval + s_nodes if branch == "lower_window" else t_eval - s_nodes) - t_center), delta)
            total = total + np.exp(exponent(xv, s_nodes)) @ (w_nodes * phi_vals)
        total *= psi_cut(xv) * zeta(xv)
        if uncj_eval is not None:
            total = total * uncj_eval(xv)
        if np.isscalar(xi_values):
            return complex(total)
        return total

    recipe = WitnessRecipe(
        kind="sign_change_bump",
        variant=variant,
        branch=branch,
        t0=float(t0), s0=float(s0), t1=float(t1), s1=float(s1),
        delta=float(delta), window_min=float(lo), window_max=float(hi),
        t_center=t_center, t_eval=float(t_eval),
    )
    return fhat, eval_u, recipe


def fit_decay_exponent(eval_u, xi_lo=10.0, xi_hi=1000.0, n_points=200):
    """Log-log slope of |uhat(t_eval, xi)| over a geometric xi range."""
    xi = np.geomspace(xi_lo, xi_hi, n_points)
    vals = np.abs(eval_u(xi))
    if np.any(vals <= 0):
        raise ValueError("evaluator vanished on the fit range")
    slope = float(np.polyfit(np.log(xi), np.log(vals), 1)[0])
    return slope, xi, vals


# ----------------------------------------------------------------------
# window lower bound
# ----------------------------------------------------------------------

@dataclass
class LaplaceReport:
    lambdas: list
    lhs: list
    rhs: list
    ratios: list
    curvature: float
    ok: bool

    def to_json(self):
        return {
            "lambdas": [float(v) for v in self.lambdas],
            "lhs": [float(v) for v in self.lhs],
            "rhs": [float(v) for v in self.rhs],
            "ratios": [float(v) for v in self.ratios],
            "curvature": float(self.curvature),
            "ok": bool(self.ok),
        }


def laplace_lower_bound_check(psi_fn: TorusFunction, s0: float, delta: float, lambdas=(10.0, 1e2, 1e3, 1e4)) -> LaplaceReport:
    """Check the concentration lower bound for integrals of e^{-lambda psi}.

    psi must be nonnegative with a degenerate zero at s0 (value and first
    derivative both vanish).  With M the sup of |psi''/2| over the window
    (taken as 1 when psi vanishes identically there), the integral over
    [s0 - delta, s0 + delta] is bounded below by
    (integral of e^{-s^2} over [-delta, delta]) / sqrt(lambda * M)
    whenever lambda * M > 1.  Reports LHS, RHS and their ratio per lambda.
    """
    if not psi_fn.is_real:
        raise ValueError("psi must be real-valued")
    scale = max(1.0, psi_fn.max_abs())
    _, vals = psi_fn.refined(4)
    if float(np.min(vals.real)) < -1e-10 * scale:
        raise ValueError("psi must be nonnegative")
    if abs(psi_fn.eval_at(s0)) > 1e-8 * scale:
        raise ValueError("psi(s0) must vanish")
    if abs(psi_fn.derivative().eval_at(s0)) > 1e-8 * scale:
        raise ValueError("psi'(s0) must vanish (zero of order greater than one)")

    window = np.linspace(s0 - delta, s0 + delta, 2001)
    half_dd = 0.5 * np.abs(psi_fn.derivative().derivative().eval_at(window))
    m_tilde = float(np.max(half_dd))
    curvature = 1.0 if m_tilde < 1e-14 else m_tilde
    for lam in lambdas:
        if lam * curvature <= 1.0:
            raise ValueError(f"lambda * M must exceed 1 (got {lam * curvature:.3g})")

    gauss_mass = math.sqrt(math.pi) * math.erf(delta)
    n = 4096
    s = np.linspace(s0 - delta, s0 + delta, n + 1)
    h = 2.0 * delta / n
    psi_vals = psi_fn.eval_at(s).real
    lhs, rhs, ratios = [], [], []
    for lam in lambdas:
        f = np.exp(-lam * psi_vals)
        integral = h * (np.sum(f) - 0.5 * (f[0] + f[-1]))
        bound = gauss_mass / math.sqrt(lam * curvature)
        lhs.append(float(integral))
        rhs.append(float(bound))
        ratios.append(float(integral / bound))
    ok = all(r >= 1.0 - 1e-12 for r in ratios)
    return LaplaceReport(list(lambdas), lhs, rhs, ratios, curvature, ok)
