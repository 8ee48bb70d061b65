"""Grid solver for L u = f with per-frequency closed forms.

Pipeline: conjugate the variable real part of c and the variable part of q
away (means stay), take the partial x-transform, and solve the periodic ODE
in t at every grid frequency xi with the stable window-integral branch
(backward window for one sign of xi, forward for the other, mirrored with the
sign of b).  Frequencies where xi*c0 - i*q0 is an integer are singular: a
single singular point is crossed with a difference-quotient regularization
that stays continuous through it, exact resonances are solved with the
resonant closed form after a compatibility check, and the fully resonant case
c0 = 0, q0 in i*Z uses the base-point formula anchored at the extrema of the
running integral of b.  The result is un-conjugated and its residual is
recomputed in physical space.

Per-frequency solves are independent; setting HYPOELL_THREADS > 1 (or the
``threads`` argument) fans the regular columns over a thread pool with
bit-identical results.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .classify import INT_TOL, OperatorSpec, SolvabilityVerdict, is_gs, symbol_zero_set
from .conjugate import ConjugationPair, psi_field, reduced_operator
from .mixedfft import Field, HalfSpectrum, check_boundary_decay, forward_x, inverse_x, spectral_apply
from .torus_ode import (
    CompatibilityError as OdeCompatibilityError,
    OdeProblem,
    _gl_period,
    solve_resonant,
)
from .trigfun import TWO_PI, TorusFunction, changes_sign, running_integral_extrema, smoothstep

#: columns with sup norm below this fraction of the global max are returned as zero
NEGLIGIBLE_FLOOR = 1e-14
CONDITION_LIMIT = 1e12
EXPONENT_SLACK = 1e-9


class SolveError(Exception):
    pass


class NotSolvableError(SolveError):
    def __init__(self, verdict: SolvabilityVerdict):
        self.verdict = verdict
        super().__init__(f"operator is not globally solvable ({verdict.case})")


class UndeterminedError(SolveError):
    def __init__(self, verdict: SolvabilityVerdict):
        self.verdict = verdict
        super().__init__("no solvability verdict for this operator; pass force=True to attempt anyway")


class CompatibilityError(SolveError):
    def __init__(self, entries):
        self.entries = list(entries)  # (xi, defect)
        xs = ", ".join(f"{x:.6g}" for x, _ in self.entries[:8])
        super().__init__(f"right-hand side fails the compatibility condition at xi = {xs}")


class NearResonantError(SolveError):
    def __init__(self, xi, factor):
        self.xi = xi
        self.factor = factor
        super().__init__(f"near-resonant frequency xi = {xi:.9g} (condition factor {factor:.3e})")


@dataclass
class SolveOutcome:
    u: Field
    residual: float
    sigma_handled: list = field(default_factory=list)  # (xi, method)
    condition_report: float = np.inf  # smallest branch denominator modulus seen


def residual(op: OperatorSpec, u: Field, f: Field) -> float:
    """Max-norm of L u - f, derivatives taken spectrally.

    No boundary gate is applied here: solver output carries a roundoff-level
    tail that the strict decay check would reject.
    """
    return float(np.max(np.abs(spectral_apply(op, u, check_boundary=False).values - f.values)))


def _leggauss_01(n):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def _b_sign(b: TorusFunction):
    """+1 / -1 for one-signed b, 0 for identically zero, None if it changes sign."""
    vals = b.refined(4)[1].real
    m = float(np.max(np.abs(vals)))
    if m == 0.0:
        return 0
    tol = 1e-12 * m
    if np.min(vals) >= -tol:
        return 1
    if np.max(vals) <= tol:
        return -1
    return None


def _kernel_rows(op: OperatorSpec, t, xi_sel):
    """Adjoint kernel samples e^{i n t + i xi Cp(t) + Qp(t)} at singular xi.

    n is the integer nearest xi*c0 - i*q0 (the snap distance is below the
    resonance tolerance, keeping every row exactly periodic).
    """
    cp = op.c.antiderivative_zero_mean().eval_at(t)
    qp = op.q.antiderivative_zero_mean().eval_at(t)
    z = xi_sel * op.c0 - 1j * op.q0
    n_int = np.round(z.real)
    return np.exp(1j * np.outer(xi_sel, cp) + qp[None, :] + 1j * np.outer(n_int, t))


def _active_singular_mask(sigma, fhat_values, xi):
    """Singular grid columns that carry data above the roundoff floor.

    Columns at the transform noise level are grid zeros; pairing them with
    the adjoint kernel (which grows exponentially in xi) would only amplify
    roundoff.
    """
    mask = sigma.grid_indices(xi)
    if not mask.any():
        return mask
    col_max = np.max(np.abs(fhat_values), axis=0)
    gmax = float(np.max(col_max))
    if gmax > 0:
        mask = mask & (col_max > NEGLIGIBLE_FLOOR * gmax)
    else:
        mask = np.zeros_like(mask)
    return mask


def compatibility_defect_field(op: OperatorSpec, f: Field) -> dict:
    """Kernel pairing of fhat against the adjoint kernel at each singular grid xi.

    Returns an ordered mapping xi -> defect; an empty mapping when the
    singular set misses the grid entirely.  Columns below the roundoff floor
    are reported as zero defect.
    """
    fhat = forward_x(f, check_boundary=False)
    g = f.grid
    sigma = symbol_zero_set(op.c0, op.q0).sigma
    full = sigma.grid_indices(g.xi)
    mask = _active_singular_mask(sigma, fhat.values, g.xi)
    out = {float(x): 0.0j for x in g.xi[full]}
    if mask.any():
        xi_sel = g.xi[mask]
        rows = _kernel_rows(op, g.t, xi_sel)
        defects = (TWO_PI / g.n_t) * np.einsum("jx,xj->x", fhat.values[:, mask], rows)
        out.update({float(x): complex(d) for x, d in zip(xi_sel, defects)})
    return out


def project_compatible(op: OperatorSpec, f: Field) -> Field:
    """Remove, at every singular grid xi, the component blocking solvability.

    Subtracts the kernel-direction multiple that annihilates the discrete
    defect; the projection is idempotent and leaves compatible inputs
    unchanged to rounding.
    """
    g = f.grid
    fhat = forward_x(f, check_boundary=False)
    sigma = symbol_zero_set(op.c0, op.q0).sigma
    mask = _active_singular_mask(sigma, fhat.values, g.xi)
    if mask.any():
        xi_sel = g.xi[mask]
        rows = _kernel_rows(op, g.t, xi_sel)
        defects = (TWO_PI / g.n_t) * np.einsum("jx,xj->x", fhat.values[:, mask], rows)
        vals = fhat.values.copy()
        vals[:, mask] -= (defects / TWO_PI)[None, :] / rows.T
        fhat = HalfSpectrum(g, vals)
    return inverse_x(fhat)


class _PerXiSolver:
    """Shared node geometry for the per-frequency window integrals."""

    def __init__(self, red: OperatorSpec, grid, n_quad=256, validate=True):
        self.red = red
        self.grid = grid
        self.validate = validate
        self.a0 = red.a0
        self.q0 = red.q0
        self.c0 = complex(red.c0)
        self.b0 = red.b0
        self.b_sign = _b_sign(red.b)
        self.bp = red.b.antiderivative_zero_mean()
        t = grid.t
        s, w = _gl_period(n_quad)
        self.s, self.w = s, w
        self.bp_t = self.bp.eval_at(t).real
        self.bp_plus = self.bp.eval_at(t[:, None] + s[None, :]).real
        self.bp_minus = self.bp.eval_at(t[:, None] - s[None, :]).real
        modes = np.fft.fftfreq(grid.n_t) * grid.n_t
        self.modes = modes
        self.E_t = np.exp(1j * np.outer(t, modes))
        self.E_s_plus = np.exp(1j * np.outer(modes, s))
        self.E_s_minus = np.exp(-1j * np.outer(modes, s))

    # -- generic pieces ------------------------------------------------
    def theta0(self, xi):
        return 1j * xi * self.c0 + self.q0

    def col_modes(self, col):
        return np.fft.fft(col) / self.grid.n_t

    def direct_col(self, f_values, xi):
        """fhat(., xi) at arbitrary xi from physical samples."""
        g = self.grid
        return g.dx * (f_values @ np.exp(-1j * g.x * xi))

    def branch_for(self, xi):
        if self.b_sign == 1:
            return "plus" if xi >= 0 else "minus"
        if self.b_sign == -1:
            return "minus" if xi >= 0 else "plus"
        return "minus" if (self.theta0(xi)).real > 0 else "plus"

    def node_values(self, F, branch):
        basis = self.E_s_plus if branch == "plus" else self.E_s_minus
        return (self.E_t * F[None, :]) @ basis

    def window_integral(self, nodes, xi, branch, check_sign):
        if branch == "plus":
            expo_b = -xi * (self.b0 * self.s[None, :] + self.bp_plus - self.bp_t[:, None])
            expo = (1j * xi * self.a0 + self.q0) * self.s[None, :] + expo_b
        else:
            expo_b = xi * (self.b0 * self.s[None, :] + self.bp_t[:, None] - self.bp_minus)
            expo = -(1j * xi * self.a0 + self.q0) * self.s[None, :] + expo_b
        if check_sign and self.validate and self.b_sign in (1, -1):
            worst = float(np.max(expo_b))
            if worst > EXPONENT_SLACK:
                raise AssertionError(f"positive quadrature exponent {worst:.3e} at xi = {xi:.6g}")
        return (nodes * np.exp(expo)) @ self.w

    def denominator(self, xi, branch):
        th = TWO_PI * self.theta0(xi)
        return np.exp(th) - 1.0 if branch == "plus" else 1.0 - np.exp(-th)

    def column_plain(self, F, xi):
        branch = self.branch_for(xi)
        denom = self.denominator(xi, branch)
        nodes = self.node_values(F, branch)
        col = self.window_integral(nodes, xi, branch, check_sign=True) / denom
        return col, abs(denom)

    # -- regularization across a single singular point ------------------
    def _expo_arrays(self, xi, branch):
        """Window exponent and its exact xi-derivative on the node set."""
        if branch == "plus":
            dexpo = 1j * self.a0 * self.s[None, :] - (
                self.b0 * self.s[None, :] + self.bp_plus - self.bp_t[:, None]
            )
            expo = self.q0 * self.s[None, :] + xi * dexpo
        else:
            dexpo = -1j * self.a0 * self.s[None, :] + (
                self.b0 * self.s[None, :] + self.bp_t[:, None] - self.bp_minus
            )
            expo = -self.q0 * self.s[None, :] + xi * dexpo
        return expo, dexpo

    def column_regularized(self, f_values, xi_g, xi_star, n_theta=8):
        """Difference-quotient form of the solution near the singular point.

        The xi-derivative of the window integrand is evaluated exactly: the
        data derivative is the transform of -i x f and the kernel derivative
        is analytic, so no finite-difference step enters.
        """
        branch = self.branch_for(xi_g)
        tn, tw = _leggauss_01(n_theta)
        dfdxi_values = (-1j * self.grid.x)[None, :] * f_values
        J = np.zeros(self.grid.n_t, dtype=complex)
        for th, om in zip(tn, tw):
            xi_mid = th * xi_g + (1.0 - th) * xi_star
            nodes = self.node_values(self.col_modes(self.direct_col(f_values, xi_mid)), branch)
            nodes_d = self.node_values(self.col_modes(self.direct_col(dfdxi_values, xi_mid)), branch)
            expo, dexpo = self._expo_arrays(xi_mid, branch)
            J += om * (((nodes_d + nodes * dexpo) * np.exp(expo)) @ self.w)
        if abs(xi_g - xi_star) < 1e-9 * max(1.0, abs(xi_star)):
            ratio = 1.0 / (TWO_PI * 1j * self.c0)
        else:
            ratio = (xi_g - xi_star) / self.denominator(xi_g, branch)
        return ratio * J

    # -- fully resonant base-point formula -------------------------------
    def base_geometry(self, psi, n_nodes):
        t = self.grid.t
        u, wu = _leggauss_01(n_nodes)
        geom = {"w": wu}
        L_plus = np.mod(t - psi, TWO_PI)
        for d, L in (("plus", L_plus), ("minus", TWO_PI - L_plus)):
            sgn = 1.0 if d == "plus" else -1.0
            S = psi + sgn * u[None, :] * L[:, None]
            geom[d] = {
                "L": sgn * L,  # signed arc length
                "P": self.bp.eval_at(S).real,
                "disp": sgn * L[:, None] * (1.0 - u[None, :]),
                "E": np.exp(1j * S[..., None] * self.modes),
            }
        return geom

    def column_base(self, geom, F, xi, connected):
        P_t = self.bp_t
        out = np.empty(self.grid.n_t, dtype=complex)
        worst = -np.inf
        results = {}
        for d in ("plus", "minus"):
            gd = geom[d]
            fvals = gd["E"] @ F
            expo = xi * (P_t[:, None] - gd["P"]) + self.q0 * gd["disp"]
            results[d] = (expo, fvals, gd["L"])
        max_p = np.max(results["plus"][0].real, axis=1)
        max_m = np.max(results["minus"][0].real, axis=1)
        pick_plus = max_p <= max_m
        for d, mask in (("plus", pick_plus), ("minus", ~pick_plus)):
            if not mask.any():
                continue
            expo, fvals, L = results[d]
            col = L[mask] * ((fvals[mask] * np.exp(expo[mask])) @ geom["w"])
            out[mask] = col
            worst = max(worst, float(np.max(expo[mask].real)))
        if self.validate and connected and abs(xi) >= 1.0 and worst > EXPONENT_SLACK:
            raise AssertionError(f"positive path exponent {worst:.3e} at xi = {xi:.6g}")
        return out


def _resonant_column(solver: _PerXiSolver, col, xi):
    g = solver.grid
    theta = 1j * xi * solver.red.c + TorusFunction.constant(solver.q0)
    rhs = TorusFunction.from_samples(col, k_max=g.n_t // 2 - 1)
    problem = OdeProblem(theta, rhs)
    u = solve_resonant(problem, lam=0.0)
    return u.eval_at(g.t)


def _is_resonant_xi(c0, q0, xi, tol=INT_TOL):
    z = xi * complex(c0) - 1j * complex(q0)
    return abs(z.imag) < tol and abs(z.real - round(z.real)) < tol


def _blend_base_point(t1, t2, xi):
    """Smooth base-point selector: argmin of the running integral for
    xi <= -1, argmax for xi >= 1, blended along the shorter arc between."""
    delta = np.mod(t1 - t2 + np.pi, TWO_PI) - np.pi
    return t2 + smoothstep((xi + 1.0) / 2.0) * delta


def solve(op: OperatorSpec, f: Field, force=False, n_quad=256, validate=True, threads=None) -> SolveOutcome:
    """Solve L u = f on the grid of f.

    Raises NotSolvableError / UndeterminedError according to the classifier
    (``force=True`` overrides the undetermined gate, attempting the base-point
    method with no claim attached), CompatibilityError when the right-hand
    side fails a kernel pairing test, and NearResonantError when a regular
    column's denominator falls below 1/CONDITION_LIMIT.
    """
    verdict = is_gs(op)
    if verdict.gs == "not_solvable":
        raise NotSolvableError(verdict)
    if verdict.gs == "undetermined" and not force:
        raise UndeterminedError(verdict)

    grid = f.grid
    pair = ConjugationPair.from_operator(op)
    conjugating = not pair.is_trivial()
    f_red = psi_field(f, pair, 1) if conjugating else f
    red = reduced_operator(op)
    # relaxed decay gate: compatibility projection leaves a tail at the
    # kernel-amplified roundoff level (about 1e-9 of the sup)
    check_boundary_decay(f_red, tol=1e-8)
    fhat = forward_x(f_red, check_boundary=False)
    solver = _PerXiSolver(red, grid, n_quad=n_quad, validate=validate)
    sigma = verdict.sigma

    xi = grid.xi
    col_max = np.max(np.abs(fhat.values), axis=0)
    gmax = float(np.max(col_max)) if col_max.size else 0.0
    active = col_max > NEGLIGIBLE_FLOOR * gmax if gmax > 0 else np.zeros(xi.shape, bool)

    W = np.zeros_like(fhat.values)
    handled = []
    worst_denom = np.inf

    def col_tol(j):
        return 1e-8 * (1.0 + float(col_max[j]))

    use_base = sigma.kind == "all" and solver.b_sign != 0
    if use_base:
        # compatibility at every active frequency, then the base-point formula
        defects = compatibility_defect_field(red, f_red)
        bad = [(float(xi[j]), defects[float(xi[j])])
               for j in np.nonzero(active)[0]
               if abs(defects[float(xi[j])]) > col_tol(j)]
        if bad:
            raise CompatibilityError(bad)
        t1, _, t2, _ = running_integral_extrema(red.b)
        n_base = max(128, n_quad // 2)
        geom_hi = solver.base_geometry(t1, n_base)
        geom_lo = solver.base_geometry(t2, n_base)
        connected = verdict.case == "connected_sublevel"
        for j in np.nonzero(active)[0]:
            x = float(xi[j])
            if x >= 1.0:
                geom = geom_hi
            elif x <= -1.0:
                geom = geom_lo
            else:
                geom = solver.base_geometry(_blend_base_point(t1, t2, x), n_base)
            F = solver.col_modes(fhat.values[:, j])
            W[:, j] = solver.column_base(geom, F, x, connected)
            handled.append((x, "base_point"))
    else:
        if sigma.kind == "point":
            # the compatibility condition lives at the exact singular point,
            # which is generally off the grid
            col_star = solver.direct_col(f_red.values, sigma.xi_star)
            rows = _kernel_rows(red, grid.t, np.array([sigma.xi_star]))
            defect = complex((TWO_PI / grid.n_t) * (col_star @ rows[0]))
            if abs(defect) > 1e-8 * (1.0 + float(np.max(np.abs(col_star)))):
                raise CompatibilityError([(sigma.xi_star, defect)])

        plain = []
        for j in np.nonzero(active)[0]:
            x = float(xi[j])
            if sigma.kind == "point" and abs(x - sigma.xi_star) < grid.dxi:
                W[:, j] = solver.column_regularized(f_red.values, x, sigma.xi_star)
                handled.append((x, "regularized"))
            elif _is_resonant_xi(red.c0, red.q0, x):
                try:
                    W[:, j] = _resonant_column(solver, fhat.values[:, j], x)
                except OdeCompatibilityError as exc:
                    raise CompatibilityError([(x, exc.defect)]) from exc
                handled.append((x, "resonant"))
            else:
                plain.append(j)

        def run_plain(j):
            col, denom = solver.column_plain(solver.col_modes(fhat.values[:, j]), float(xi[j]))
            return j, col, denom

        if threads is None:
            threads = int(os.environ.get("HYPOELL_THREADS", "1"))
        if threads > 1 and len(plain) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(run_plain, plain))
        else:
            results = [run_plain(j) for j in plain]
        for j, col, denom in results:
            if denom < 1.0 / CONDITION_LIMIT:
                raise NearResonantError(float(xi[j]), 1.0 / denom)
            worst_denom = min(worst_denom, denom)
            W[:, j] = col

    w_field = inverse_x(HalfSpectrum(grid, W))
    u = psi_field(w_field, pair, -1) if conjugating else w_field
    res = residual(op, u, f)
    return SolveOutcome(u=u, residual=res, sigma_handled=handled, condition_report=worst_denom)


def solve_at_xi(op: OperatorSpec, f: Field, xi_value: float, n_quad=256) -> np.ndarray:
    """The t-profile uhat(., xi) of the solution at one (possibly off-grid) xi.

    Diagnostic entry point: applies the same dispatch as :func:`solve` at a
    single frequency and returns the profile in the original frame.
    """
    grid = f.grid
    pair = ConjugationPair.from_operator(op)
    conjugating = not pair.is_trivial()
    f_red = psi_field(f, pair, 1) if conjugating else f
    red = reduced_operator(op)
    solver = _PerXiSolver(red, grid, n_quad=n_quad, validate=False)
    sigma = symbol_zero_set(op.c0, op.q0).sigma
    x = float(xi_value)

    if sigma.kind == "all" and solver.b_sign != 0:
        t1, _, t2, _ = running_integral_extrema(red.b)
        geom = solver.base_geometry(_blend_base_point(t1, t2, x), max(128, n_quad // 2))
        F = solver.col_modes(solver.direct_col(f_red.values, x))
        col = solver.column_base(geom, F, x, connected=False)
    elif sigma.kind == "point" and abs(x - sigma.xi_star) < grid.dxi:
        col = solver.column_regularized(f_red.values, x, sigma.xi_star)
    elif _is_resonant_xi(red.c0, red.q0, x):
        col = _resonant_column(solver, solver.direct_col(f_red.values, x), x)
    else:
        col, _ = solver.column_plain(solver.col_modes(solver.direct_col(f_red.values, x)), x)

    if conjugating:
        t = grid.t
        col = np.exp(-1j * x * pair.A.eval_at(t).real - pair.Q.eval_at(t)) * col
    return col
