"""Functionals evaluated along trajectories.

Conserved quantities, modified energies of solutions and of differences,
coercivity, energy-rate ratios, Gronwall/Lipschitz bounds and the
refined-Strichartz diagnostic. Sup-norms come from 4x oversampled fields and
time integrals use the trapezoid rule on the snapshot cadence.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import calculus as C
from .grid import SpectralGrid, inner_product, integrate_product, product, sup_norm
from .integrator import Trajectory
from .model import DiffState, SboParams, SboState, joint_norm

CSV_COLUMNS = ("t", "E1", "E2", "E3", "E4", "Em_s", "Hs_u", "Hs_v", "vx_inf", "acc_L1", "acc_L2sq")
DIFF_CSV_COLUMNS = ("t", "Em0_tilde", "EmS_tilde", "H12_w", "L2_z", "HsS_w", "Hs_z", "fs")


@dataclass
class DiagnosticsRecord:
    t: float
    E1: float
    E2: float
    E3: float
    E4: float
    Em_s: float
    Hs_u: float
    Hs_v: float
    vx_inf: float
    acc_L1: float
    acc_L2sq: float
    s: float

    def row(self) -> tuple[float, ...]:
        return tuple(getattr(self, c) for c in CSV_COLUMNS)


@dataclass
class DiffDiagnosticsRecord:
    t: float
    Em0_tilde: float
    EmS_tilde: float
    H12_w: float
    L2_z: float
    HsS_w: float
    Hs_z: float
    fs: float

    def row(self) -> tuple[float, ...]:
        return tuple(getattr(self, c) for c in DIFF_CSV_COLUMNS)


def conserved_quantities(state: SboState, params: SboParams) -> tuple[float, float, float, float]:
    """``(E1, E2, E3, E4)``: mass of v, mass of u, momentum and Hamiltonian."""
    g, u, v = state.grid, state.u, state.v
    ux = C.deriv(g, u, 1)
    e1 = float(np.sum(v) * g.dx)
    e2 = inner_product(g, u, u).real
    e3 = inner_product(g, u, ux).imag + 0.5 * inner_product(g, v, v).real
    ubar = np.conj(u)
    e4 = (0.5 * C.riesz_norm(g, v, 0.5) ** 2
          - params.rho / 6.0 * integrate_product(g, v, v, v).real
          + integrate_product(g, v, u, ubar).real
          + 0.5 * params.beta * integrate_product(g, u, ubar, u, ubar).real
          + inner_product(g, ux, ux).real)
    return e1, e2, e3, e4


def modified_energy_parts(state: SboState, s: float) -> tuple[float, float]:
    """Quadratic part and cubic cross term of the modified energy at level ``s``."""
    if s < 0.5:
        raise ValueError("modified energy needs s >= 1/2")
    g, u, v = state.grid, state.u, state.v
    quad = (C.riesz_norm(g, u, 0.0) ** 2 + C.riesz_norm(g, u, s + 0.5) ** 2
            + C.riesz_norm(g, v, 0.0) ** 2 + 0.5 * C.riesz_norm(g, v, s) ** 2)
    a2 = product(g, u, np.conj(u)).real
    cross = inner_product(g, C.riesz(g, v, s - 0.5), C.riesz(g, a2, s - 0.5)).real
    return float(quad), float(cross)


def modified_energy(state: SboState, s: float) -> float:
    quad, cross = modified_energy_parts(state, s)
    return quad + cross


@dataclass
class CoercivityResult:
    ratio: float
    holds: bool
    energy: float
    sobolev_sq: float
    lower_ok: bool
    upper_ok: bool


def coercivity_check(state: SboState, s: float) -> CoercivityResult:
    """Cross-term to quadratic-part ratio and the explicit two-sided bound."""
    quad, cross = modified_energy_parts(state, s)
    ratio = 0.0 if cross == 0 else abs(cross) / quad
    sob = (C.sobolev_norm(state.grid, state.u, s + 0.5) ** 2
           + C.sobolev_norm(state.grid, state.v, s) ** 2)
    e = quad + cross
    return CoercivityResult(ratio, ratio <= 0.5, e, sob, 0.5 * sob <= e, e <= 1.5 * sob)


def records(traj: Trajectory, params: SboParams, s: float, oversample: int = 4) -> list[DiagnosticsRecord]:
    """Per-snapshot diagnostics with running time integrals of ``||v_x||_inf``."""
    out = []
    acc1 = acc2 = 0.0
    prev = None
    for t, st in zip(traj.times, traj.states):
        g = st.grid
        vx = sup_norm(g, C.deriv(g, st.v, 1), oversample)
        if prev is not None:
            dt = t - prev[0]
            acc1 += 0.5 * dt * (prev[1] + vx)
            acc2 += 0.5 * dt * (prev[1] ** 2 + vx**2)
        prev = (t, vx)
        e1, e2, e3, e4 = conserved_quantities(st, params)
        out.append(DiagnosticsRecord(
            t=t, E1=e1, E2=e2, E3=e3, E4=e4, Em_s=modified_energy(st, s),
            Hs_u=C.sobolev_norm(g, st.u, s + 0.5), Hs_v=C.sobolev_norm(g, st.v, s),
            vx_inf=vx, acc_L1=acc1, acc_L2sq=acc2, s=s))
    return out


def _uniform_prefix(times: list[float]) -> int:
    if len(times) < 2:
        return len(times)
    h = times[1] - times[0]
    n = 2
    while n < len(times) and abs((times[n] - times[n - 1]) - h) <= 1e-9 * h:
        n += 1
    return n


def time_derivative(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order finite differences on a uniform sample (one-sided at the ends)."""
    f = np.asarray(values, dtype=float)
    n = f.size
    if n < 5:
        raise ValueError("too-coarse cadence: need at least 5 uniformly spaced samples")
    d = np.empty(n)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * h)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * h)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * h)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * h)
    return d


@dataclass
class EnergyRateReport:
    max_ratio: float
    max_ratio_unmodified: float
    times: list[float] = field(default_factory=list)
    ratio: list[float] = field(default_factory=list)
    ratio_unmodified: list[float] = field(default_factory=list)


def energy_rate_check(traj: Trajectory, s: float, oversample: int = 4) -> EnergyRateReport:
    """``r(t) = |dE/dt| / ((1 + ||v_x||_inf) E)`` for the modified and the plain energy."""
    n = _uniform_prefix(traj.times)
    times = np.array(traj.times[:n])
    if n < 5:
        raise ValueError("too-coarse cadence: need at least 5 uniformly spaced samples")
    h = times[1] - times[0]
    em, eq, vx = [], [], []
    for st in traj.states[:n]:
        quad, cross = modified_energy_parts(st, s)
        em.append(quad + cross)
        eq.append(quad)
        vx.append(sup_norm(st.grid, C.deriv(st.grid, st.v, 1), oversample))
    em, eq, vx = map(np.array, (em, eq, vx))

    def _ratio(e):
        de = np.abs(time_derivative(e, h))
        den = (1.0 + vx) * e
        return np.where(den > 0, de / np.where(den > 0, den, 1.0), 0.0)

    r_m, r_q = _ratio(em), _ratio(eq)
    return EnergyRateReport(float(r_m.max()), float(r_q.max()), times.tolist(), r_m.tolist(), r_q.tolist())


@dataclass
class BoundReport:
    holds: bool
    minimal_constant: float
    growth_rate: float
    lhs: float
    rhs: float


def gronwall_check(traj: Trajectory, params: SboParams, s: float, kappa: float,
                   oversample: int = 4) -> BoundReport:
    """``sup ||(u,v)|| <= 2 exp(kappa (t + ||v_x||_{L^1_t L^inf})) ||(u0,v0)||`` at every horizon t."""
    recs = records(traj, params, s, oversample)
    norms = np.array([math.hypot(r.Hs_u, r.Hs_v) for r in recs])
    ts = np.array([r.t for r in recs]) - recs[0].t
    acc = np.array([r.acc_L1 for r in recs])
    sup = np.maximum.accumulate(norms)
    n0 = norms[0]
    if n0 == 0:
        return BoundReport(bool(np.all(sup == 0)), 0.0, 0.0, float(sup[-1]), 0.0)
    expo = ts + acc
    rhs = 2.0 * np.exp(kappa * expo) * n0
    holds = bool(np.all(sup <= rhs * (1 + 1e-12)))
    pos = expo > 0
    kmin = float(max(0.0, np.max(np.log(sup[pos] / (2.0 * n0)) / expo[pos]))) if pos.any() else 0.0
    rate = float(max(0.0, np.max(np.log(sup[pos] / n0) / expo[pos]))) if pos.any() else 0.0
    return BoundReport(holds, kmin, rate, float(sup[-1]), float(rhs[-1]))


@dataclass
class StrichartzReport:
    T: float
    lhs: float
    rhs: float
    ratio: float
    v_term: float
    forcing_term: float
    vx_l1_lhs: float
    vx_l1_rhs: float
    vx_l1_ratio: float


def forcing(state: SboState, params: SboParams) -> np.ndarray:
    """Benjamin-Ono forcing ``F = -(rho/2) (v^2)_x + (|u|^2)_x``."""
    g = state.grid
    return C.deriv(g, -0.5 * params.rho * product(g, state.v, state.v)
                   + product(g, state.u, np.conj(state.u)).real, 1)


def strichartz_check(traj: Trajectory, params: SboParams, s: float, delta: float = 1.0,
                     eps: float = 0.01, oversample: int = 4) -> StrichartzReport:
    """Empirical constants of the refined Strichartz bound and of the L^1_T L^inf bound on v_x."""
    if not (0.0 <= delta <= 1.0) or not eps > 0:
        raise ValueError("need delta in [0,1] and eps > 0")
    ts = np.array(traj.times) - traj.times[0]
    T = float(ts[-1])
    vx, jv, jf, hs_v, hs_u = [], [], [], [], []
    for st in traj.states:
        g = st.grid
        vx.append(sup_norm(g, C.deriv(g, st.v, 1), oversample))
        jv.append(C.sobolev_norm(g, st.v, 1 + delta / 4 + eps))
        jf.append(C.sobolev_norm(g, forcing(st, params), 1 - 3 * delta / 4 + eps))
        hs_v.append(C.sobolev_norm(g, st.v, s))
        hs_u.append(C.sobolev_norm(g, st.u, s))
    vx, jv, jf = map(np.array, (vx, jv, jf))
    lhs = math.sqrt(np.trapezoid(vx**2, ts)) if T > 0 else 0.0
    v_term = math.sqrt(T) * float(jv.max())
    f_term = math.sqrt(np.trapezoid(jf**2, ts)) if T > 0 else 0.0
    rhs = v_term + f_term
    ratio = 0.0 if lhs == 0 else lhs / rhs
    vx_l1_lhs = float(np.trapezoid(vx, ts)) if T > 0 else 0.0
    mv, mu = max(hs_v), max(hs_u)
    vx_l1_rhs = T * (mv + mv**2 + mu**2)
    vx_l1_ratio = 0.0 if vx_l1_lhs == 0 else vx_l1_lhs / vx_l1_rhs
    return StrichartzReport(T, lhs, rhs, ratio, v_term, f_term, vx_l1_lhs, vx_l1_rhs, vx_l1_ratio)


# ---------------------------------------------------------------------------
# Differences


def diff_energies(d: DiffState, s: float, oversample: int = 4) -> tuple[float, float, float]:
    """``(E~_m^0, E~_m^s, f_s)`` for a difference state."""
    if s <= 0.5:
        raise ValueError("difference energies need s > 1/2")
    g, w, z, u, v = d.grid, d.w, d.z, d.u_sum, d.v_sum
    ubw = product(g, np.conj(u), w)
    l2w = C.riesz_norm(g, w, 0.0)
    l2z = C.riesz_norm(g, z, 0.0)
    e0 = (l2w**2 + C.riesz_norm(g, w, 0.5) ** 2 + 0.5 * l2z**2
          + inner_product(g, C.bessel(g, z, -1.0).astype(complex), np.conj(ubw)).real)
    dsz = C.riesz_norm(g, z, s)
    dsw = C.riesz_norm(g, w, s + 0.5)
    es = (l2w**2 + dsw**2 + l2z**2 + 0.5 * dsz**2
          + inner_product(g, C.riesz(g, z, s - 0.5).astype(complex),
                          np.conj(C.riesz(g, ubw, s - 0.5))).real)
    ds_vx = sup_norm(g, C.riesz(g, C.deriv(g, v, 1), s), oversample)
    zx = sup_norm(g, C.deriv(g, z, 1), oversample)
    ds12_v = sup_norm(g, C.riesz(g, v, s + 0.5), oversample)
    ds1_u = sup_norm(g, C.riesz(g, u, s + 1.0), oversample)
    fs = (ds_vx * dsz * l2z + C.riesz_norm(g, v, s) * dsz * zx
          + ds12_v * l2w * dsw + ds1_u * l2w * dsz)
    return float(e0), float(es), float(fs)


def diff_norms(d: DiffState, sigma: float) -> float:
    """``||w||^2_{H^{sigma+1/2}} + ||z||^2_{H^sigma}``."""
    return C.sobolev_norm(d.grid, d.w, sigma + 0.5) ** 2 + C.sobolev_norm(d.grid, d.z, sigma) ** 2


def diff_records(traj: Trajectory, s: float, oversample: int = 4) -> list[DiffDiagnosticsRecord]:
    out = []
    for t, d in zip(traj.times, traj.states):
        e0, es, fs = diff_energies(d, s, oversample)
        g = d.grid
        out.append(DiffDiagnosticsRecord(
            t=t, Em0_tilde=e0, EmS_tilde=es, H12_w=C.sobolev_norm(g, d.w, 0.5),
            L2_z=C.sobolev_norm(g, d.z, 0.0), HsS_w=C.sobolev_norm(g, d.w, s + 0.5),
            Hs_z=C.sobolev_norm(g, d.z, s), fs=fs))
    return out


def accumulated_vx(traj: Trajectory, oversample: int = 4) -> float:
    """``||v_x||_{L^1_T L^inf_x}`` by the trapezoid rule."""
    ts = np.array(traj.times)
    vals = np.array([sup_norm(st.grid, C.deriv(st.grid, st.v, 1), oversample) for st in traj.states])
    return float(np.trapezoid(vals, ts)) if ts.size > 1 else 0.0


def lipschitz_check(diff_traj: Trajectory, K: float, c: float) -> BoundReport:
    """``||(w,z)||_{L^inf_T(H^{1/2} x L^2)} <= 2 exp(c (K+1) T) ||(w0,z0)||``.

    ``growth_rate`` is the smallest c with the factor 2 dropped, evaluated at
    every intermediate horizon; it is the informative number for short runs.
    """
    ts = np.array(diff_traj.times) - diff_traj.times[0]
    norms = np.array([math.sqrt(diff_norms(d, 0.0)) for d in diff_traj.states])
    n0 = norms[0]
    sup = float(norms.max())
    T = float(ts[-1])
    if n0 == 0:
        return BoundReport(bool(sup == 0), 0.0, 0.0, sup, 0.0)
    rhs = 2.0 * math.exp(c * (K + 1.0) * T) * n0
    kmin = max(0.0, math.log(sup / (2.0 * n0)) / ((K + 1.0) * T)) if T > 0 else 0.0
    pos = ts > 0
    running = np.maximum.accumulate(norms)
    rate = float(max(0.0, np.max(np.log(running[pos] / n0) / ((K + 1.0) * ts[pos])))) if pos.any() else 0.0
    return BoundReport(bool(sup <= rhs * (1 + 1e-12)), float(kmin), rate, sup, float(rhs))


def as_dict(obj) -> dict:
    return asdict(obj)
