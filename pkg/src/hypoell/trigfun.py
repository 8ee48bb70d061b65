"""Smooth 2*pi-periodic functions as truncated Fourier series.

A :class:`TorusFunction` stores complex coefficients ``c[k]`` for
``|k| <= k_max`` together with cached samples on a uniform grid
``t_j = 2*pi*j/n_grid``.  The samples are always re-evaluated from the
coefficients, so the two views agree to rounding by construction.  All
analysis helpers in this module (means, antiderivatives, sign checks,
running-integral extrema, window extrema, sublevel topology) are exact
for trigonometric polynomials and certified at refined-grid scale for
everything else.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi

#: relative tolerance used for realness / sign decisions
REAL_TOL = 1e-12


def smoothstep(u):
    """C-infinity ramp: 0 for u <= 0, 1 for u >= 1, strictly monotone between.

    Built from the classic flat bump h(u) = exp(-1/u); used for frequency
    cutoffs and base-point blending.
    """
    arr = np.asarray(u, dtype=float)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        a = np.where(arr > 0.0, np.exp(-1.0 / np.maximum(arr, 1e-300)), 0.0)
        b = np.where(arr < 1.0, np.exp(-1.0 / np.maximum(1.0 - arr, 1e-300)), 0.0)
    out = a / (a + b)
    if np.isscalar(u):
        return float(out)
    return out


class TorusFunction:
    """Truncated Fourier series sum_k c[k] e^{ikt} on the circle of length 2*pi.

    Parameters
    ----------
    coeffs : array_like of complex
        Coefficients for k = -k_max .. k_max in ascending order (odd length).
    n_grid : int, optional
        Number of cached uniform samples.  Must satisfy
        ``n_grid >= 4*k_max + 4`` so that products of two functions stay
        alias-free on the grid.
    """

    def __init__(self, coeffs, n_grid=None):
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.ndim != 1 or coeffs.size % 2 == 0:
            raise ValueError("coeffs must be a 1-d array of odd length")
        self.coeffs = coeffs
        self.k_max = coeffs.size // 2
        if n_grid is None:
            n_grid = max(4 * self.k_max + 4, 64)
        if n_grid < 4 * self.k_max + 4:
            raise ValueError("n_grid must be at least 4*k_max + 4")
        self.n_grid = int(n_grid)
        self.t_grid = TWO_PI * np.arange(self.n_grid) / self.n_grid
        self.samples = self.eval_at(self.t_grid)

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    @classmethod
    def constant(cls, value, n_grid=64):
        return cls(np.array([value], dtype=complex), n_grid=n_grid)

    @classmethod
    def from_samples(cls, values, k_max=None, n_grid=None):
        """Build from uniform samples, truncating to ``k_max`` modes.

        Frequencies above k_max are discarded; the stored samples are
        re-evaluated from the truncated series so the internal consistency
        invariant holds regardless of the input's bandwidth.
        """
        values = np.asarray(values, dtype=complex)
        n = values.size
        if k_max is None:
            k_max = max((n - 4) // 4, 0)
        if n < 2 * k_max + 1:
            raise ValueError("need at least 2*k_max + 1 samples")
        spec = np.fft.fft(values) / n
        coeffs = np.empty(2 * k_max + 1, dtype=complex)
        for k in range(-k_max, k_max + 1):
            coeffs[k + k_max] = spec[k % n]
        return cls(coeffs, n_grid=n_grid if n_grid is not None else max(n, 4 * k_max + 4))

    @classmethod
    def from_callable(cls, fn, k_max=32, n_grid=None):
        """Project a callable t -> complex onto ``k_max`` Fourier modes."""
        n = max(4 * k_max + 4, 256)
        t = TWO_PI * np.arange(n) / n
        vals = np.asarray(fn(t), dtype=complex)
        if vals.shape != t.shape:
            vals = np.broadcast_to(vals, t.shape).astype(complex)
        return cls.from_samples(vals, k_max=k_max, n_grid=n_grid)

    # ------------------------------------------------------------------
    # basic queries
    # ------------------------------------------------------------------
    @property
    def k_values(self):
        return np.arange(-self.k_max, self.k_max + 1)

    @property
    def is_real(self):
        """True iff c[-k] == conj(c[k]) for all k, within 1e-12 of the scale."""
        scale = max(1.0, float(np.max(np.abs(self.coeffs))))
        return bool(np.max(np.abs(self.coeffs[::-1].conj() - self.coeffs)) <= REAL_TOL * scale)

    def eval_at(self, t):
        """Evaluate the series at arbitrary points (any array shape)."""
        tt = np.asarray(t, dtype=float)
        phases = np.exp(1j * tt[..., None] * self.k_values)
        out = phases @ self.coeffs
        if np.isscalar(t):
            return complex(out)
        return out

    def mean(self):
        return complex(self.coeffs[self.k_max])

    def max_abs(self, refine=4):
        n = refine * self.n_grid
        t = TWO_PI * np.arange(n) / n
        return float(np.max(np.abs(self.eval_at(t))))

    def refined(self, refine=4):
        """Samples on a ``refine`` times finer uniform grid."""
        n = refine * self.n_grid
        t = TWO_PI * np.arange(n) / n
        return t, self.eval_at(t)

    # ------------------------------------------------------------------
    # calculus
    # ------------------------------------------------------------------
    def derivative(self):
        return TorusFunction(self.coeffs * (1j * self.k_values), n_grid=self.n_grid)

    def antiderivative_zero_mean(self):
        """Antiderivative A of (g - mean(g)) with A(0) = 0.

        Nonzero modes are divided by ik; the constant term is fixed so that
        A vanishes at t = 0.
        """
        k = self.k_values
        out = np.zeros_like(self.coeffs)
        nz = k != 0
        out[nz] = self.coeffs[nz] / (1j * k[nz])
        out[self.k_max] = -np.sum(out[nz])
        return TorusFunction(out, n_grid=self.n_grid)

    def real_part(self):
        sym = 0.5 * (self.coeffs + self.coeffs[::-1].conj())
        return TorusFunction(sym, n_grid=self.n_grid)

    def imag_part(self):
        skew = (self.coeffs - self.coeffs[::-1].conj()) / 2j
        return TorusFunction(skew, n_grid=self.n_grid)

    # ------------------------------------------------------------------
    # arithmetic
    # ------------------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, TorusFunction):
            return other
        return TorusFunction.constant(complex(other))

    def __add__(self, other):
        other = self._coerce(other)
        k = max(self.k_max, other.k_max)
        out = np.zeros(2 * k + 1, dtype=complex)
        out[k - self.k_max : k + self.k_max + 1] += self.coeffs
        out[k - other.k_max : k + other.k_max + 1] += other.coeffs
        return TorusFunction(out, n_grid=max(self.n_grid, other.n_grid, 4 * k + 4))

    __radd__ = __add__

    def __neg__(self):
        return TorusFunction(-self.coeffs, n_grid=self.n_grid)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + self._coerce(other)

    def __mul__(self, other):
        if isinstance(other, TorusFunction):
            out = np.convolve(self.coeffs, other.coeffs)
            k = self.k_max + other.k_max
            return TorusFunction(out, n_grid=max(self.n_grid, other.n_grid, 4 * k + 4))
        return TorusFunction(self.coeffs * complex(other), n_grid=self.n_grid)

    __rmul__ = __mul__

    def conjugate(self):
        return TorusFunction(self.coeffs[::-1].conj(), n_grid=self.n_grid)

    # ------------------------------------------------------------------
    # serialization
    # ------------------------------------------------------------------
    def to_json(self):
        return {
            "k_max": int(self.k_max),
            "re": [float(v) for v in self.coeffs.real],
            "im": [float(v) for v in self.coeffs.imag],
        }

    @classmethod
    def from_json(cls, obj):
        k_max = int(obj["k_max"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
        if re.size != 2 * k_max + 1 or im.size != 2 * k_max + 1:
            raise ValueError("coefficient arrays must have length 2*k_max + 1")
        return cls(re + 1j * im)

    def __repr__(self):
        return f"TorusFunction(k_max={self.k_max}, n_grid={self.n_grid})"


# ----------------------------------------------------------------------
# analysis operations
# ----------------------------------------------------------------------

def mean(g: TorusFunction) -> complex:
    """Average value of g over one period (the k = 0 coefficient)."""
    return g.mean()


def antiderivative_zero_mean(g: TorusFunction) -> TorusFunction:
    """Periodic antiderivative A of g - mean(g), normalized by A(0) = 0."""
    return g.antiderivative_zero_mean()


def changes_sign(g: TorusFunction, refine=4):
    """Decide whether a real-valued g takes both signs.

    Returns ``(flag, witness)`` where witness is a pair ``(t_plus, t_minus)``
    of refined-grid points with g(t_plus) > 0 > g(t_minus) when flag is True,
    and None otherwise.  The sign tolerance is 1e-12 * max|g|; a function
    certified "no sign change" here may still change sign below grid scale.
    """
    if not g.is_real:
        raise ValueError("changes_sign requires a real-valued function")
    t, vals = g.refined(refine)
    vals = vals.real
    m = float(np.max(np.abs(vals)))
    if m == 0.0:
        return False, None
    tol = REAL_TOL * m
    has_pos = np.any(vals > tol)
    has_neg = np.any(vals < -tol)
    if has_pos and has_neg:
        return True, (float(t[np.argmax(vals)]), float(t[np.argmin(vals)]))
    return False, None


def _check_zero_mean_real(b: TorusFunction):
    if not b.is_real:
        raise ValueError("expected a real-valued function")
    if abs(b.mean()) >= 1e-10:
        raise ValueError("expected zero mean: the running integral is not periodic")


def running_integral_extrema(b: TorusFunction, refine=4):
    """Extrema of P(t) = integral of b from 0 to t for zero-mean real b.

    Returns ``(t1, max_val, t2, min_val)`` with ties broken toward the
    smallest t on the refined grid.
    """
    _check_zero_mean_real(b)
    prim = b.antiderivative_zero_mean()
    t, vals = prim.refined(refine)
    vals = vals.real
    i_max = int(np.argmax(vals))
    i_min = int(np.argmin(vals))
    return float(t[i_max]), float(vals[i_max]), float(t[i_min]), float(vals[i_min])


def _circular_arc_count(mask):
    """Number of contiguous True arcs of a boolean mask on the circle."""
    if not mask.any():
        return 0
    if mask.all():
        return 1
    transitions = int(np.sum(mask != np.roll(mask, 1)))
    return transitions // 2


def _critical_levels(vals):
    """Values of local extrema of a circular sample sequence, plus midpoints."""
    d = np.roll(vals, -1) - vals
    prev = np.roll(d, 1)
    is_ext = ((prev > 0) & (d <= 0)) | ((prev < 0) & (d >= 0)) | ((prev == 0) & (d != 0))
    crit = vals[is_ext]
    if crit.size == 0:
        crit = vals[:1]
    crit = np.unique(np.round(crit, 12))
    levels = list(crit)
    levels.extend(0.5 * (crit[1:] + crit[:-1]))
    return levels


def sublevels_connected(b: TorusFunction, refine=4) -> bool:
    """True iff every sublevel set {t : P(t) < r} is connected on the circle.

    P is the running integral of b.  Connectivity can only change at critical
    values of P, so it suffices to test those levels and the midpoints
    between consecutive ones.
    """
    _check_zero_mean_real(b)
    prim = b.antiderivative_zero_mean()
    _, vals = prim.refined(refine)
    vals = vals.real
    for r in _critical_levels(vals):
        if _circular_arc_count(vals < r) > 1:
            return False
    return True


def superlevels_connected(b: TorusFunction, refine=4) -> bool:
    """Same arc-union test for the complement sets {t : P(t) >= r}."""
    _check_zero_mean_real(b)
    prim = b.antiderivative_zero_mean()
    _, vals = prim.refined(refine)
    vals = vals.real
    for r in _critical_levels(vals):
        if _circular_arc_count(vals >= r) > 1:
            return False
    return True


def windowed_integral_extrema(b: TorusFunction):
    """Extrema of the window integrals of a real-valued b.

    Computes ``B = min over (t, s) of integral of b over [t, t+s]`` together
    with its argmin ``(t0, s0)``, and ``B_tilde = max over (t, s) of the
    integral over [t-s, t]`` with argmax ``(t1, s1)``.  The search grid is
    n_grid points in t over [0, 2*pi) and n_grid + 1 points in s over
    [0, 2*pi]; ties resolve to the lexicographically smallest (t, s).

    Returns ``(B, t0, s0, B_tilde, t1, s1)``.
    """
    if not b.is_real:
        raise ValueError("expected a real-valued function")
    b0 = b.mean().real
    prim = b.antiderivative_zero_mean()
    n = b.n_grid
    t = TWO_PI * np.arange(n) / n
    s = TWO_PI * np.arange(n + 1) / n
    prim_t = prim.eval_at(t).real
    fwd = prim.eval_at(t[:, None] + s[None, :]).real - prim_t[:, None] + b0 * s[None, :]
    i, j = np.unravel_index(int(np.argmin(fwd)), fwd.shape)
    lo = float(fwd[i, j])
    t0, s0 = float(t[i]), float(s[j])
    bwd = prim_t[:, None] - prim.eval_at(t[:, None] - s[None, :]).real + b0 * s[None, :]
    i, j = np.unravel_index(int(np.argmax(bwd)), bwd.shape)
    hi = float(bwd[i, j])
    t1, s1 = float(t[i]), float(s[j])
    return lo, t0, s0, hi, t1, s1
