"""Temporal and spatial refinement studies for the solver."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .grid import make_grid
from .integrator import StepControls, evolve
from .model import InitDataSpec, SboParams, make_state


@dataclass
class RefinementTable:
    kind: str
    levels: list[float]
    errors: list[float]
    slopes: list[float]
    fitted_slope: float
    extra: dict = field(default_factory=dict)


def _l2_coeff_distance(a: np.ndarray, b: np.ndarray, L: float) -> float:
    """L^2 distance between two trigonometric interpolants given on grids of sizes Na <= Nb."""
    Na, Nb = a.size, b.size
    ca = np.fft.fft(a) / Na
    cb = np.fft.fft(b) / Nb
    na = np.fft.fftfreq(Na, 1.0 / Na).round().astype(int)
    nb = np.fft.fftfreq(Nb, 1.0 / Nb).round().astype(int)
    diff = cb.copy()
    diff[na % Nb] -= ca
    return float(math.sqrt(L * np.sum(np.abs(diff) ** 2)))


def fixed_step_run(u0: InitDataSpec, v0: InitDataSpec, L: float, N: int, params: SboParams,
                   T: float, dt: float):
    """Final state of a constant-step run (no error control)."""
    g = make_grid(L, N)
    controls = StepControls(dt_init=dt, dt_min=dt, dt_max=dt, cadence=T, adaptive=False)
    return evolve(make_state(g, u0, v0), params, T, controls).final


def temporal_convergence(u0: InitDataSpec, v0: InitDataSpec, L: float, N: int, params: SboParams,
                         T: float, steps: tuple[int, ...] = (8, 16, 32, 64, 128)) -> RefinementTable:
    """Self-convergence in time: errors between successive step halvings.

    ``errors[i] = ||(u,v)_{dt_i} - (u,v)_{dt_i/2}||_{L^2}`` with ``dt_i = T / steps[i]``,
    so the slope of ``log error`` against ``log dt`` estimates the order.
    """
    finals = [fixed_step_run(u0, v0, L, N, params, T, T / n) for n in steps]
    dts = [T / n for n in steps[:-1]]
    errs = [math.hypot(_l2_coeff_distance(a.u, b.u, L), _l2_coeff_distance(a.v, b.v, L))
            for a, b in zip(finals[:-1], finals[1:])]
    return _table("temporal", dts, errs)


def spatial_convergence(u0: InitDataSpec, v0: InitDataSpec, L: float, params: SboParams, T: float,
                        sizes: tuple[int, ...] = (32, 64, 128, 256), rel_tol: float = 1e-12) -> RefinementTable:
    """Errors against the finest grid; the time error is held below ``rel_tol``."""
    controls = StepControls(rel_tol=rel_tol, cadence=T)
    finals = [evolve(make_state(make_grid(L, N), u0, v0), params, T, controls).final for N in sizes]
    ref = finals[-1]
    errs = [math.hypot(_l2_coeff_distance(f.u, ref.u, L), _l2_coeff_distance(f.v, ref.v, L))
            for f in finals[:-1]]
    table = _table("spatial", [float(n) for n in sizes[:-1]], errs)
    table.extra["drop_factors"] = [a / b if b > 0 else math.inf for a, b in zip(errs[:-1], errs[1:])]
    return table


def _table(kind: str, levels: list[float], errs: list[float]) -> RefinementTable:
    x, y = np.log(levels), np.log(np.maximum(errs, 1e-300))
    slopes = [float((y[i + 1] - y[i]) / (x[i + 1] - x[i])) for i in range(len(levels) - 1)]
    fit = float(np.polyfit(x, y, 1)[0]) if len(levels) > 1 else math.nan
    return RefinementTable(kind, list(levels), list(errs), slopes, fit)
