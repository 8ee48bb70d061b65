"""Product grids on T^1 x R, partial and mixed Fourier transforms, decay diagnostics.

Normalization conventions (fixed once, used everywhere):

* line transform        ``uhat(t, xi)  = integral f(t, x) e^{-i x xi} dx``
* line inverse          ``f(t, x)      = (1/2pi) integral uhat(t, xi) e^{i x xi} dxi``
* circle transform      ``util(k, xi)  = (1/2pi) integral_0^{2pi} uhat(t, xi) e^{-i k t} dt``
* circle inverse        ``uhat(t, xi)  = sum_k util(k, xi) e^{i k t}``

With these factors both round trips are the identity to rounding.  The real
line is truncated to ``[-X, X)`` with ``n_x`` uniform points; the dual grid is
``xi_j = pi j / X`` for ``j = -n_x/2 .. n_x/2 - 1``, so ``dx * dxi = 2pi/n_x``
and the forward/backward maps are plain scaled DFTs with an alternating-sign
phase correction for the x-offset.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .trigfun import TWO_PI

BOUNDARY_DECAY_TOL = 1e-12


class DomainTooSmallError(ValueError):
    """Raised when a field fails the x-boundary decay check."""


@dataclass(frozen=True)
class CylinderGrid:
    """Uniform discretization of T^1 x [-X, X)."""

    n_t: int = 64
    n_x: int = 512
    X: float = 20.0

    def __post_init__(self):
        if self.n_t < 4:
            raise ValueError("n_t must be at least 4")
        if self.n_x < 4 or self.n_x % 2:
            raise ValueError("n_x must be even and at least 4")
        if self.X <= 0:
            raise ValueError("X must be positive")

    @property
    def dx(self):
        return 2.0 * self.X / self.n_x

    @property
    def dxi(self):
        return np.pi / self.X

    @property
    def t(self):
        return TWO_PI * np.arange(self.n_t) / self.n_t

    @property
    def x(self):
        return -self.X + self.dx * np.arange(self.n_x)

    @property
    def xi(self):
        return self.dxi * (np.arange(self.n_x) - self.n_x // 2)

    @property
    def k(self):
        return np.arange(self.n_t) - self.n_t // 2


def _check_values(grid, values):
    values = np.ascontiguousarray(values, dtype=complex)
    if values.shape != (grid.n_t, grid.n_x):
        raise ValueError(f"values must have shape ({grid.n_t}, {grid.n_x})")
    if not np.all(np.isfinite(values.view(float))):
        raise ValueError("values must be finite")
    return values


@dataclass(eq=False)
class Field:
    """Samples u(t_i, x_j) on a cylinder grid.  Treat as immutable."""

    grid: CylinderGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = _check_values(self.grid, self.values)


@dataclass(eq=False)
class HalfSpectrum:
    """Samples uhat(t_i, xi_j) of the partial line transform."""

    grid: CylinderGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = _check_values(self.grid, self.values)


@dataclass(eq=False)
class MixedSpectrum:
    """Samples util(k, xi_j) of the mixed transform, k = -n_t/2 .. n_t/2 - 1."""

    grid: CylinderGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = _check_values(self.grid, self.values)


# ----------------------------------------------------------------------
# transforms
# ----------------------------------------------------------------------

def check_boundary_decay(f: Field, tol=BOUNDARY_DECAY_TOL):
    m = float(np.max(np.abs(f.values)))
    if m == 0.0:
        return
    edge = max(float(np.max(np.abs(f.values[:, 0]))), float(np.max(np.abs(f.values[:, -1]))))
    if edge > tol * m:
        raise DomainTooSmallError(
            f"domain too small: boundary magnitude {edge:.3e} exceeds {tol:.1e} * max |f| = {tol * m:.3e}"
        )


def _alt_sign(n):
    j = np.arange(n) - n // 2
    return np.where(j % 2 == 0, 1.0, -1.0)


def forward_x(f: Field, check_boundary=True) -> HalfSpectrum:
    """Partial transform in x; requires decay at the x-boundary."""
    if check_boundary:
        check_boundary_decay(f)
    g = f.grid
    spec = np.fft.fftshift(np.fft.fft(f.values, axis=1), axes=1)
    return HalfSpectrum(g, g.dx * _alt_sign(g.n_x)[None, :] * spec)


def inverse_x(uhat: HalfSpectrum) -> Field:
    g = uhat.grid
    work = np.fft.ifftshift(_alt_sign(g.n_x)[None, :] * uhat.values, axes=1)
    return Field(g, np.fft.ifft(work, axis=1) / g.dx)


def forward_t(uhat: HalfSpectrum) -> MixedSpectrum:
    g = uhat.grid
    spec = np.fft.fftshift(np.fft.fft(uhat.values, axis=0), axes=0) / g.n_t
    return MixedSpectrum(g, spec)


def inverse_t(util: MixedSpectrum) -> HalfSpectrum:
    g = util.grid
    work = np.fft.ifftshift(util.values, axes=0) * g.n_t
    return HalfSpectrum(g, np.fft.ifft(work, axis=0))


def mixed_transform(f: Field, check_boundary=True) -> MixedSpectrum:
    return forward_t(forward_x(f, check_boundary=check_boundary))


def dt_field(f: Field) -> Field:
    """Spectral t-derivative (exact for t-band-limited fields)."""
    kk = np.fft.fftfreq(f.grid.n_t) * f.grid.n_t
    spec = np.fft.fft(f.values, axis=0)
    return Field(f.grid, np.fft.ifft(1j * kk[:, None] * spec, axis=0))


def dx_field(f: Field) -> Field:
    """Spectral x-derivative on the truncated window."""
    om = TWO_PI * np.fft.fftfreq(f.grid.n_x, d=f.grid.dx)
    spec = np.fft.fft(f.values, axis=1)
    return Field(f.grid, np.fft.ifft(1j * om[None, :] * spec, axis=1))


def spectral_apply(op, u: Field, check_boundary=True) -> Field:
    """Apply d_t + c(t) d_x + q(t) to a field, derivatives taken spectrally.

    ``op`` is any object exposing TorusFunction attributes ``c`` and ``q``.
    """
    if check_boundary:
        check_boundary_decay(u)
    t = u.grid.t
    c_vals = op.c.eval_at(t)[:, None]
    q_vals = op.q.eval_at(t)[:, None]
    out = dt_field(u).values + c_vals * dx_field(u).values + q_vals * u.values
    return Field(u.grid, out)


# ----------------------------------------------------------------------
# decay diagnostics
# ----------------------------------------------------------------------

@dataclass
class DecayReport:
    """Weighted sup-norms D(N) = max (1+k^2)^{N/2} (1+xi^2)^{N/2} |util|."""

    orders: np.ndarray
    values: np.ndarray
    schwartz_like: bool
    threshold: float
    tail_value: float
    fitted_order: float | None = None

    def to_json(self):
        return {
            "orders": [int(n) for n in self.orders],
            "values": [float(v) for v in self.values],
            "schwartz_like": bool(self.schwartz_like),
            "threshold": float(self.threshold),
            "tail_value": float(self.tail_value),
            "fitted_order": None if self.fitted_order is None else float(self.fitted_order),
        }


def decay_report(util: MixedSpectrum, n_max=8, threshold_factor=1e3, nyquist_exclude=0.1,
                 tail_fraction=0.8) -> DecayReport:
    """Grid-scale rapid-decay certificate for a mixed spectrum.

    The 10% of the xi grid nearest the Nyquist boundary is excluded because
    polynomial weights amplify truncation noise there.  The table D(N) is
    the weighted sup over the whole retained region.  Rapid decay is an
    asymptotic property, so the verdict reads the tail: ``schwartz_like``
    holds iff the weighted sup of order n_max over the outer part of the
    retained range (|xi| above ``tail_fraction`` of its maximum) stays below
    ``threshold_factor * D(0)``.  Truly decaying data leaves that tail value
    near zero, while polynomially bounded data grows right up to the edge.
    """
    if n_max > 12:
        raise ValueError("n_max must be at most 12")
    g = util.grid
    xi = g.xi
    keep = np.abs(xi) <= (1.0 - nyquist_exclude) * np.max(np.abs(xi))
    sub = np.abs(util.values[:, keep])
    if sub.size:
        # entries at the level of transform roundoff are grid zeros; the
        # polynomial weights would otherwise amplify pure noise
        floor = 1e-13 * float(np.max(sub))
        sub = np.where(sub > floor, sub, 0.0)
    xi_kept = xi[keep]
    w = np.sqrt((1.0 + g.k[:, None].astype(float) ** 2) * (1.0 + xi_kept[None, :] ** 2))
    orders = np.arange(n_max + 1)
    values = np.array([float(np.max(sub * w**n)) if sub.size else 0.0 for n in orders])
    threshold = threshold_factor * values[0]
    tail = np.abs(xi_kept) >= tail_fraction * np.max(np.abs(xi_kept))
    weighted_tail = (sub * w**n_max)[:, tail]
    tail_value = float(np.max(weighted_tail)) if weighted_tail.size else 0.0
    schwartz = tail_value <= threshold

    fitted = None
    pos = xi_kept > 0
    mass = np.max(sub[:, pos], axis=0) if np.any(pos) else np.array([])
    if mass.size:
        xi_pos = xi_kept[pos]
        sel = (xi_pos >= 0.5 * np.max(xi_pos)) & (mass > 1e-280)
        if np.count_nonzero(sel) >= 4:
            slope = np.polyfit(np.log(xi_pos[sel]), np.log(mass[sel]), 1)[0]
            fitted = float(slope)
    return DecayReport(orders, values, bool(schwartz), threshold, tail_value, fitted)


# ----------------------------------------------------------------------
# CSV interchange
# ----------------------------------------------------------------------

_FMT = "{:.16e}"


def _write_csv(path, header, cols):
    rows = np.stack([np.asarray(c, dtype=float).ravel() for c in cols], axis=1)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(_FMT.format(v) for v in row) + "\n")


def write_field_csv(path, f: Field):
    g = f.grid
    tt, xx = np.meshgrid(g.t, g.x, indexing="ij")
    _write_csv(path, "t,x,re,im", [tt, xx, f.values.real, f.values.imag])


def write_half_csv(path, uhat: HalfSpectrum):
    g = uhat.grid
    tt, ss = np.meshgrid(g.t, g.xi, indexing="ij")
    _write_csv(path, "t,xi,re,im", [tt, ss, uhat.values.real, uhat.values.imag])


def write_mixed_csv(path, util: MixedSpectrum):
    g = util.grid
    kk, ss = np.meshgrid(g.k, g.xi, indexing="ij")
    _write_csv(path, "k,xi,re,im", [kk, ss, util.values.real, util.values.imag])


def read_field_csv(path, grid: CylinderGrid) -> Field:
    data = np.loadtxt(path, delimiter=",", skiprows=1, dtype=float)
    if data.ndim == 1:
        data = data[None, :]
    if data.shape[0] != grid.n_t * grid.n_x or data.shape[1] != 4:
        raise ValueError(
            f"field CSV has {data.shape[0]} rows, expected n_t * n_x = {grid.n_t * grid.n_x}"
        )
    vals = (data[:, 2] + 1j * data[:, 3]).reshape(grid.n_t, grid.n_x)
    return Field(grid, vals)
