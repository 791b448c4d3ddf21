"""Integrating-factor RK4 time stepping with step-doubling error control.

The linear parts of both equations are pure phases in Fourier space and are
integrated exactly; classical RK4 is applied to the nonlinearity in the
interaction picture (Lawson's scheme).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np

from . import calculus
from .grid import SpectralGrid
from .model import (
    DiffState,
    SboParams,
    SboState,
    diff_nonlinear_spectral,
    linear_symbols,
    nonlinear_spectral,
)

Status = Literal["completed", "blowup-aborted", "step-underflow"]
Observer = Callable[[float, SboState], None]


class NumericalOverflow(FloatingPointError):
    pass


class StepLimitExceeded(RuntimeError):
    def __init__(self, message: str, trajectory: "Trajectory"):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class StepControls:
    dt_init: float = 1e-3
    rel_tol: float = 1e-8
    dt_min: float = 1e-10
    dt_max: float = 1e-1
    safety: float = 0.9
    max_steps: int = 1_000_000
    cadence: float = 1e-2
    adaptive: bool = True
    blowup_ceiling: float = 1e6

    def __post_init__(self):
        if not (0 < self.dt_min <= self.dt_init <= self.dt_max):
            raise ValueError("need 0 < dt_min <= dt_init <= dt_max")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if not self.cadence > 0:
            raise ValueError("cadence must be positive")


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    states: list = field(default_factory=list)
    status: Status | None = None
    accepted: int = 0
    rejected: int = 0

    def _record(self, t: float, state) -> None:
        if self.times and t <= self.times[-1]:
            raise RuntimeError("trajectory times must increase strictly")
        self.times.append(t)
        self.states.append(state)

    def _finish(self, status: Status) -> None:
        if self.status is not None:
            raise RuntimeError("trajectory status already set")
        self.status = status

    @property
    def final(self):
        return self.states[-1]


def linear_propagators(grid: SpectralGrid, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact linear flows over ``dt``: ``exp(-i k^2 dt)`` and ``exp(i k|k| dt)``."""
    lu, lv = linear_symbols(grid)
    return np.exp(lu * dt), np.exp(lv * dt)


def _hermitian(grid: SpectralGrid, V: np.ndarray) -> np.ndarray:
    mirror = np.conj(V[(-grid.n) % grid.N])
    out = 0.5 * (V + mirror)
    out[grid.nyquist] = out[grid.nyquist].real
    return out


class _Scheme:
    """IFRK4 on a list of raw-FFT coefficient arrays with diagonal linear parts."""

    def __init__(self, lin: Sequence[np.ndarray], nonlin: Callable[[list], list]):
        self.lin = list(lin)
        self.nonlin = nonlin

    def step(self, Y: list, h: float) -> list:
        E = [np.exp(L * h) for L in self.lin]
        E2 = [np.exp(L * (0.5 * h)) for L in self.lin]
        k1 = self.nonlin(Y)
        k2 = self.nonlin([e2 * (y + 0.5 * h * a) for e2, y, a in zip(E2, Y, k1)])
        k3 = self.nonlin([e2 * y + 0.5 * h * b for e2, y, b in zip(E2, Y, k2)])
        k4 = self.nonlin([e * y + h * e2 * c for e, e2, y, c in zip(E, E2, Y, k3)])
        return [e * y + (h / 6.0) * (e * a + 2.0 * e2 * (b + c) + d)
                for e, e2, y, a, b, c, d in zip(E, E2, Y, k1, k2, k3, k4)]


def _state_scheme(grid: SpectralGrid, params: SboParams, linear_only: bool = False) -> _Scheme:
    lu, lv = linear_symbols(grid)
    if linear_only:
        return _Scheme([lu, lv], lambda Y: [np.zeros_like(Y[0]), np.zeros_like(Y[1])])
    return _Scheme([lu, lv], lambda Y: list(nonlinear_spectral(grid, Y[0], Y[1], params)))


def _pair_scheme(grid: SpectralGrid, params: SboParams) -> _Scheme:
    lu, lv = linear_symbols(grid)

    def nonlin(Y):
        U1, V1, U2, V2, W, Z = Y
        a = nonlinear_spectral(grid, U1, V1, params)
        b = nonlinear_spectral(grid, U2, V2, params)
        d = diff_nonlinear_spectral(grid, W, Z, U1 + U2, V1 + V2, params)
        return [a[0], a[1], b[0], b[1], d[0], d[1]]

    return _Scheme([lu, lv, lu, lv, lu, lv], nonlin)


def _check_finite(Y: list) -> None:
    for y in Y:
        if not np.all(np.isfinite(y)):
            raise NumericalOverflow("numerical overflow")


def step(state: SboState, params: SboParams, dt: float) -> SboState:
    """One IFRK4 step of size ``dt``."""
    g = state.grid
    scheme = _state_scheme(g, params)
    U, V = scheme.step([np.fft.fft(state.u), np.fft.fft(state.v)], dt)
    _check_finite([U, V])
    V = _hermitian(g, V)
    return SboState(g, np.fft.ifft(U), np.fft.ifft(V).real, state.t + dt)


def _rel(diff: Sequence[np.ndarray], ref: Sequence[np.ndarray]) -> float:
    num = math.sqrt(sum(float(np.vdot(d, d).real) for d in diff))
    den = math.sqrt(sum(float(np.vdot(r, r).real) for r in ref))
    if num == 0.0:
        return 0.0
    return num / den if den > 0 else math.inf


def _blowup_norm(grid: SpectralGrid, U: np.ndarray, V: np.ndarray) -> float:
    w = grid.dx / grid.N
    k2 = 1.0 + grid.k**2
    nu = np.sum(k2**2.5 * np.abs(U) ** 2) * w
    nv = np.sum(k2**2 * np.abs(V) ** 2) * w
    return float(np.sqrt(nu + nv))


class _StepLimit(Exception):
    pass


class _Driver:
    """Shared adaptive/fixed stepping loop with cadence-aligned outputs."""

    def __init__(self, scheme: _Scheme, controls: StepControls, error_groups: Sequence[Sequence[int]],
                 real_slots: Sequence[int], grid: SpectralGrid):
        self.scheme = scheme
        self.c = controls
        self.groups = error_groups
        self.real_slots = real_slots
        self.grid = grid

    def _error(self, big: list, fine: list) -> float:
        return max(_rel([fine[i] - big[i] for i in grp], [fine[i] for i in grp]) for grp in self.groups)

    def run(self, Y: list, T: float, emit: Callable[[float, list], None],
            blown: Callable[[list], bool]) -> tuple[list, Status, int, int]:
        c = self.c
        if not T > 0:
            raise ValueError("T must be positive")
        t = 0.0
        dt = c.dt_init
        j_out = 1
        n_out = max(1, int(math.ceil(T / c.cadence - 1e-9)))
        accepted = rejected = 0
        emit(0.0, Y)
        if blown(Y):
            return Y, "blowup-aborted", 0, 0
        while True:
            t_target = min(j_out * c.cadence, T) if j_out < n_out else T
            remaining = t_target - t
            if remaining <= 1e-14 * max(1.0, T):
                t = t_target
                emit(t, Y)
                if j_out >= n_out:
                    return Y, "completed", accepted, rejected
                j_out += 1
                continue
            if accepted + rejected >= c.max_steps:
                raise _StepLimit()
            h = min(dt, c.dt_max, remaining)
            clamped = h < dt
            if not c.adaptive:
                Y = self.scheme.step(Y, h)
                _check_finite(Y)
                err = 0.0
            else:
                big = self.scheme.step(Y, h)
                half = self.scheme.step(self.scheme.step(Y, 0.5 * h), 0.5 * h)
                _check_finite(half)
                err = self._error(big, half)
                if err > c.rel_tol:
                    rejected += 1
                    dt = h * max(0.2, c.safety * (c.rel_tol / err) ** 0.2)
                    if dt < c.dt_min:
                        return Y, "step-underflow", accepted, rejected
                    continue
                Y = half
            for i in self.real_slots:
                Y[i] = _hermitian(self.grid, Y[i])
            accepted += 1
            t = t_target if h == remaining else t + h
            if c.adaptive:
                grow = 2.0 if err == 0 else min(2.0, c.safety * (c.rel_tol / err) ** 0.2)
                proposal = h * grow
                dt = min(c.dt_max, max(dt, proposal) if clamped else proposal)
            if blown(Y):
                emit(t, Y)
                return Y, "blowup-aborted", accepted, rejected
            if t == t_target:
                emit(t, Y)
                if j_out >= n_out:
                    return Y, "completed", accepted, rejected
                j_out += 1


def evolve(state0: SboState, params: SboParams, T: float, controls: StepControls | None = None,
           observer: Observer | None = None, linear_only: bool = False) -> Trajectory:
    """Evolve ``state0`` to time ``T``; snapshots are stored every ``controls.cadence``."""
    controls = controls or StepControls()
    g = state0.grid
    traj = Trajectory()
    t0 = state0.t

    def emit(t, Y):
        st = SboState(g, np.fft.ifft(Y[0]), np.fft.ifft(Y[1]).real, t0 + t)
        traj._record(st.t, st)
        if observer is not None:
            observer(st.t, st)

    def blown(Y):
        return _blowup_norm(g, Y[0], Y[1]) > controls.blowup_ceiling

    driver = _Driver(_state_scheme(g, params, linear_only), controls, [(0, 1)], [1], g)
    Y0 = [np.fft.fft(state0.u), _hermitian(g, np.fft.fft(state0.v))]
    try:
        _, status, acc, rej = driver.run(Y0, T, emit, blown)
    except _StepLimit:
        raise StepLimitExceeded("max_steps exceeded", traj) from None
    traj.accepted, traj.rejected = acc, rej
    traj._finish(status)
    return traj


def evolve_pair_with_difference(state_a0: SboState, state_b0: SboState, params: SboParams, T: float,
                                controls: StepControls | None = None
                                ) -> tuple[Trajectory, Trajectory, Trajectory]:
    """Co-evolve two solutions and their difference system with a shared step size."""
    controls = controls or StepControls()
    if state_a0.grid != state_b0.grid:
        raise ValueError("states live on different grids")
    g = state_a0.grid
    ta, tb, td = Trajectory(), Trajectory(), Trajectory()
    t0 = state_a0.t

    def emit(t, Y):
        U1, V1, U2, V2, W, Z = (np.fft.ifft(y) for y in Y)
        a = SboState(g, U1, V1.real, t0 + t)
        b = SboState(g, U2, V2.real, t0 + t)
        ta._record(a.t, a)
        tb._record(b.t, b)
        td._record(a.t, DiffState(g, W, Z.real, a.u + b.u, a.v + b.v, a.t))

    def blown(Y):
        return max(_blowup_norm(g, Y[0], Y[1]), _blowup_norm(g, Y[2], Y[3])) > controls.blowup_ceiling

    driver = _Driver(_pair_scheme(g, params), controls, [(0, 1, 2, 3), (4, 5)], [1, 3, 5], g)
    Y0 = [np.fft.fft(state_a0.u), _hermitian(g, np.fft.fft(state_a0.v)),
          np.fft.fft(state_b0.u), _hermitian(g, np.fft.fft(state_b0.v)),
          np.fft.fft(state_a0.u - state_b0.u), _hermitian(g, np.fft.fft(state_a0.v - state_b0.v))]
    try:
        _, status, acc, rej = driver.run(Y0, T, emit, blown)
    except _StepLimit:
        raise StepLimitExceeded("max_steps exceeded", ta) from None
    for tr in (ta, tb, td):
        tr.accepted, tr.rejected = acc, rej
        tr._finish(status)
    return ta, tb, td


def h52_h2_norm(state: SboState) -> float:
    """``||(u, v)||_{H^{5/2} x H^2}``, the quantity watched by the blow-up monitor."""
    return float(np.hypot(calculus.sobolev_norm(state.grid, state.u, 2.5),
                          calculus.sobolev_norm(state.grid, state.v, 2.0)))
