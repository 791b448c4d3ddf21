"""The Schrodinger-Benjamin-Ono system, its rescaled form and the difference system.

    i u_t + u_xx = lam * u v + beta |u|^2 u
    v_t - H v_xx + rho v v_x = (|u|^2)_x

``lam = 1`` is the original system. Nonlinear products are formed on a
zero-padded grid of 2N points, which is alias-free for both the quadratic
and the cubic terms.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np

from . import calculus
from .grid import SpectralGrid, make_grid, pad_coeffs, truncate_coeffs

Family = Literal["gaussian", "plane-wave", "random-band-limited", "file"]
FAMILIES = ("gaussian", "plane-wave", "random-band-limited", "file")


@dataclass(frozen=True)
class SboParams:
    beta: float = 1.0
    rho: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.lam <= 1.0):
            raise ValueError(f"lambda must be in (0,1], got {self.lam!r}")


def _frozen(a: np.ndarray, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SboState:
    """One point (u, v, t) on a trajectory. Arrays are read-only."""

    grid: SpectralGrid
    u: np.ndarray
    v: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "u", _frozen(self.u, complex))
        v = np.asarray(self.v)
        if np.iscomplexobj(v):
            v = v.real
        object.__setattr__(self, "v", _frozen(v, float))
        if self.u.shape != (self.grid.N,) or self.v.shape != (self.grid.N,):
            raise ValueError("u and v must be sampled on the state's grid")
        if self.t < 0:
            raise ValueError("t must be non-negative")


@dataclass(frozen=True, eq=False)
class DiffState:
    """Difference (w, z) = (u1 - u2, v1 - v2) with the sums u = u1 + u2, v = v1 + v2."""

    grid: SpectralGrid
    w: np.ndarray
    z: np.ndarray
    u_sum: np.ndarray
    v_sum: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "w", _frozen(self.w, complex))
        object.__setattr__(self, "u_sum", _frozen(self.u_sum, complex))
        for name in ("z", "v_sum"):
            a = np.asarray(getattr(self, name))
            object.__setattr__(self, name, _frozen(a.real if np.iscomplexobj(a) else a, float))

    @classmethod
    def from_pair(cls, a: SboState, b: SboState) -> "DiffState":
        if a.grid != b.grid:
            raise ValueError("states live on different grids")
        return cls(a.grid, a.u - b.u, a.v - b.v, a.u + b.u, a.v + b.v, a.t)


# ---------------------------------------------------------------------------
# Initial data


@dataclass(frozen=True)
class InitDataSpec:
    """Closed-form initial datum, sampled on any grid.

    gaussian:  amplitude * exp(-y^2 / (2 width^2)) * exp(i (wavenumber y + phase)),
               y the nearest-image offset from ``center``.
    plane-wave: amplitude * exp(i (wavenumber x + phase)).
    random-band-limited: amplitude * sum_n c_n exp(i 2 pi n scale x / base_length)
               over ``|2 pi n / base_length| <= kmax`` with Gaussian c_n of
               variance ~ (1 + k_n^2)^(-power), normalized to sum |c_n|^2 = 1.
    file:      the trigonometric interpolant of a snapshot component, dilated by ``scale``.

    Real fields use the real part of the closed form.
    """

    family: Family = "gaussian"
    amplitude: float = 1.0
    width: float = 1.0
    wavenumber: float = 0.0
    center: float = 0.0
    phase: float = 0.0
    seed: int = 0
    kmax: float = 2.0
    power: float = 0.0
    base_length: float | None = None
    scale: float = 1.0
    path: str | None = None
    component: str = "u"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown init family {self.family!r}; expected one of {FAMILIES}")
        if self.family == "gaussian" and not self.width > 0:
            raise ValueError("gaussian width must be positive")
        if self.family == "file" and not self.path:
            raise ValueError("file family needs a path")
        if self.component not in ("u", "v"):
            raise ValueError("component must be 'u' or 'v'")

    def evaluate(self, grid: SpectralGrid, real: bool = False) -> np.ndarray:
        f = _EVALUATORS[self.family](self, grid)
        return f.real.copy() if real else f.astype(complex)


def zero_spec() -> InitDataSpec:
    return InitDataSpec("plane-wave", amplitude=0.0)


def _eval_gaussian(spec: InitDataSpec, grid: SpectralGrid) -> np.ndarray:
    y = np.mod(grid.x - spec.center + 0.5 * grid.L, grid.L) - 0.5 * grid.L
    env = np.exp(-(y**2) / (2.0 * spec.width**2))
    return spec.amplitude * env * np.exp(1j * (spec.wavenumber * y + spec.phase))


def _check_periodic(kvals: np.ndarray, grid: SpectralGrid) -> None:
    m = np.asarray(kvals) * grid.L / (2.0 * np.pi)
    if np.any(np.abs(m - np.round(m)) > 1e-9 * np.maximum(1.0, np.abs(m))):
        raise ValueError("closed form is not periodic on this grid (wavenumber not a grid mode)")


def _eval_plane_wave(spec: InitDataSpec, grid: SpectralGrid) -> np.ndarray:
    _check_periodic(np.array([spec.wavenumber]), grid)
    return spec.amplitude * np.exp(1j * (spec.wavenumber * grid.x + spec.phase))


def _trig_series(spec: InitDataSpec, grid: SpectralGrid, n: np.ndarray, c: np.ndarray,
                 base: float) -> np.ndarray:
    kk = 2.0 * np.pi * n * spec.scale / base
    _check_periodic(kk, grid)
    m = np.round(kk * grid.L / (2.0 * np.pi)).astype(np.int64)
    if np.any(np.abs(m) >= grid.N // 2):
        raise ValueError("closed form is not resolved on this grid (modes beyond Nyquist)")
    coeffs = np.zeros(grid.N, dtype=complex)
    np.add.at(coeffs, m % grid.N, c)
    # exact sum_n c_n exp(i k_n x_j) via one inverse FFT
    return spec.amplitude * np.fft.ifft(coeffs) * grid.N


def random_coefficients(spec: InitDataSpec, base: float) -> tuple[np.ndarray, np.ndarray]:
    nmax = int(np.floor(spec.kmax * base / (2.0 * np.pi) + 1e-12))
    n = np.arange(-nmax, nmax + 1)
    k = 2.0 * np.pi * n / base
    rng = np.random.default_rng(spec.seed)
    c = rng.standard_normal(n.size) + 1j * rng.standard_normal(n.size)
    c *= (1.0 + k**2) ** (-0.5 * spec.power)
    nrm = np.sqrt(np.sum(np.abs(c) ** 2))
    return n, (c / nrm if nrm > 0 else c)


def _eval_random(spec: InitDataSpec, grid: SpectralGrid) -> np.ndarray:
    base = spec.base_length if spec.base_length is not None else grid.L * spec.scale
    n, c = random_coefficients(spec, base)
    return _trig_series(spec, grid, n, c, base)


def _eval_file(spec: InitDataSpec, grid: SpectralGrid) -> np.ndarray:
    from .io import read_snapshot

    snap = read_snapshot(spec.path)
    f = snap.u if spec.component == "u" else snap.v.astype(complex)
    N0 = f.size
    c = np.fft.fft(f) / N0
    n = np.fft.fftfreq(N0, d=1.0 / N0).round().astype(np.int64)
    keep = np.abs(n) < N0 // 2
    return _trig_series(spec, grid, n[keep], c[keep], snap.grid.L)


_EVALUATORS = {
    "gaussian": _eval_gaussian,
    "plane-wave": _eval_plane_wave,
    "random-band-limited": _eval_random,
    "file": _eval_file,
}


def make_state(grid: SpectralGrid, u0: InitDataSpec, v0: InitDataSpec, t: float = 0.0) -> SboState:
    return SboState(grid, u0.evaluate(grid), v0.evaluate(grid, real=True), t)


# ---------------------------------------------------------------------------
# Right-hand sides


def linear_symbols(grid: SpectralGrid) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal linear parts: ``-i k^2`` (Schrodinger) and ``i k |k|`` (from H d_x^2)."""
    lu = -1j * grid.k**2
    lv = 1j * grid.k * np.abs(grid.k)
    lv[grid.nyquist] = 0.0
    return lu, lv


def _to_fine(C: np.ndarray, N: int) -> np.ndarray:
    M = 2 * N
    return np.fft.ifft(pad_coeffs(C, M)) * (M / N)


def _back(f: np.ndarray, N: int) -> np.ndarray:
    return truncate_coeffs(np.fft.fft(f), N) * 0.5


def nonlinear_spectral(grid: SpectralGrid, U: np.ndarray, V: np.ndarray,
                       params: SboParams) -> tuple[np.ndarray, np.ndarray]:
    """Nonlinear terms of the system on raw FFT coefficients."""
    N = grid.N
    u = _to_fine(U, N)
    v = _to_fine(V, N).real
    a2 = u.real**2 + u.imag**2
    NU = -1j * (params.lam * _back(u * v, N) + params.beta * _back(a2 * u, N))
    ik = 1j * grid.k
    ik[grid.nyquist] = 0.0
    NV = ik * (-0.5 * params.rho * _back(v * v, N) + _back(a2, N))
    return NU, NV


def diff_nonlinear_spectral(grid: SpectralGrid, W: np.ndarray, Z: np.ndarray, U: np.ndarray,
                            V: np.ndarray, params: SboParams) -> tuple[np.ndarray, np.ndarray]:
    """Nonlinear terms of the difference system; U, V are coefficients of the sums."""
    N = grid.N
    w = _to_fine(W, N)
    z = _to_fine(Z, N).real
    u = _to_fine(U, N)
    v = _to_fine(V, N).real
    cub = 0.25 * (w.real**2 + w.imag**2) * w + 0.5 * (u.real**2 + u.imag**2) * w \
        + 0.25 * u * u * np.conj(w)
    NW = -1j * (params.lam * 0.5 * _back(v * w + u * z, N) + params.beta * _back(cub, N))
    ik = 1j * grid.k
    ik[grid.nyquist] = 0.0
    NZ = ik * (-0.5 * params.rho * _back(v * z, N) + _back((np.conj(u) * w).real, N))
    return NW, NZ


def rhs(state: SboState, params: SboParams) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives ``(du/dt, dv/dt)`` as physical fields."""
    g = state.grid
    U = np.fft.fft(state.u)
    V = np.fft.fft(state.v)
    lu, lv = linear_symbols(g)
    NU, NV = nonlinear_spectral(g, U, V, params)
    du = np.fft.ifft(lu * U + NU)
    dv = np.fft.ifft(lv * V + NV).real
    return du, dv


def diff_rhs(d: DiffState, params: SboParams) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives ``(dw/dt, dz/dt)`` of the difference system."""
    g = d.grid
    W = np.fft.fft(d.w)
    Z = np.fft.fft(d.z)
    lu, lv = linear_symbols(g)
    NW, NZ = diff_nonlinear_spectral(g, W, Z, np.fft.fft(d.u_sum), np.fft.fft(d.v_sum), params)
    return np.fft.ifft(lu * W + NW), np.fft.ifft(lv * Z + NZ).real


# ---------------------------------------------------------------------------
# Scaling


def _dilate(spec: InitDataSpec, lam: float) -> InitDataSpec:
    """``f -> lam * f(lam x)`` acting on the closed form (any lam > 0)."""
    if spec.family == "gaussian":
        return replace(spec, amplitude=lam * spec.amplitude, width=spec.width / lam,
                       wavenumber=lam * spec.wavenumber, center=spec.center / lam)
    if spec.family == "plane-wave":
        return replace(spec, amplitude=lam * spec.amplitude, wavenumber=lam * spec.wavenumber)
    return replace(spec, amplitude=lam * spec.amplitude, scale=lam * spec.scale)


def rescale_initdata(spec: InitDataSpec, lam: float) -> InitDataSpec:
    """Initial datum of the rescaled system, ``lam * f(lam x)`` for ``0 < lam <= 1``."""
    if not (0.0 < lam <= 1.0):
        raise ValueError(f"lambda must be in (0,1], got {lam!r}")
    if lam == 1.0:
        return spec
    return _dilate(spec, lam)


def unscale_initdata(spec: InitDataSpec, lam: float) -> InitDataSpec:
    """Inverse of :func:`rescale_initdata`."""
    if not (0.0 < lam <= 1.0):
        raise ValueError(f"lambda must be in (0,1], got {lam!r}")
    if lam == 1.0:
        return spec
    return _dilate(spec, 1.0 / lam)


def joint_norm(grid: SpectralGrid, u: np.ndarray, v: np.ndarray, s: float) -> float:
    """``||(u, v)||_{H^{s+1/2} x H^s}``."""
    return float(np.hypot(calculus.sobolev_norm(grid, u, s + 0.5), calculus.sobolev_norm(grid, v, s)))


def choose_lambda(u0: InitDataSpec, v0: InitDataSpec, delta: float, s: float,
                  grid: SpectralGrid | None = None, max_halvings: int = 60) -> float:
    """Largest ``lam = 2^-j`` whose rescaled data has joint norm <= delta.

    Rescaled data is sampled on ``(L / lam, N)`` so the closed form stays
    resolved as it widens.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    grid = grid or make_grid(100.0, 512)
    lam = 1.0
    for _ in range(max_halvings + 1):
        g = make_grid(grid.L / lam, grid.N)
        u = rescale_initdata(u0, lam).evaluate(g)
        v = rescale_initdata(v0, lam).evaluate(g, real=True)
        if joint_norm(g, u, v, s) <= delta:
            return lam
        lam *= 0.5
    raise RuntimeError(f"no admissible lambda after {max_halvings} halvings")


@dataclass
class ScalingReport:
    lam: float
    s: float
    u_norm0: float
    u_norm_lam: float
    v_norm0: float
    v_norm_lam: float
    u_ratio: float
    v_ratio: float
    u_l2_ratio: float
    v_l2_ratio: float
    sqrt_lam: float
    extra: dict = field(default_factory=dict)


def scaling_norm_check(u0: InitDataSpec, v0: InitDataSpec, lam: float, s: float,
                       grid: SpectralGrid | None = None) -> ScalingReport:
    """Measured constants in ``||u_lam||_{H^{s+1/2}} <= C lam^{1/2} (1 + lam^{s+1/2}) ||u0||``
    and ``||v_lam||_{H^s} <= C lam^{1/2} (1 + lam^s) ||v0||``.
    """
    grid = grid or make_grid(100.0, 512)
    g_lam = make_grid(grid.L / lam, grid.N)
    u = u0.evaluate(grid)
    v = v0.evaluate(grid, real=True)
    ul = rescale_initdata(u0, lam).evaluate(g_lam)
    vl = rescale_initdata(v0, lam).evaluate(g_lam, real=True)
    nu0 = calculus.sobolev_norm(grid, u, s + 0.5)
    nv0 = calculus.sobolev_norm(grid, v, s)
    nul = calculus.sobolev_norm(g_lam, ul, s + 0.5)
    nvl = calculus.sobolev_norm(g_lam, vl, s)

    def _ratio(num, den):
        return 0.0 if num == 0 else num / den

    return ScalingReport(
        lam=lam, s=s, u_norm0=nu0, u_norm_lam=nul, v_norm0=nv0, v_norm_lam=nvl,
        u_ratio=_ratio(nul, np.sqrt(lam) * (1 + lam ** (s + 0.5)) * nu0),
        v_ratio=_ratio(nvl, np.sqrt(lam) * (1 + lam**s) * nv0),
        u_l2_ratio=_ratio(calculus.sobolev_norm(g_lam, ul, 0.0), calculus.sobolev_norm(grid, u, 0.0)),
        v_l2_ratio=_ratio(calculus.sobolev_norm(g_lam, vl, 0.0), calculus.sobolev_norm(grid, v, 0.0)),
        sqrt_lam=float(np.sqrt(lam)),
    )
