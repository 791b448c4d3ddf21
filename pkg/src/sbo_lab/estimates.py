"""Numerical probes of multiplier and commutator inequalities, Bona-Smith
smoothing, and the a-priori existence-time formula.

Each probe draws seeded random band-limited real fields on ``[0, 2 pi)`` with
a fixed mode band, so the same continuous fields are sampled at every grid
size. A probe records the worst ratio ``lhs / rhs`` over the seeds at two
resolutions; the inequalities predict a grid-independent constant, so the
pass criterion is the relative change between the two levels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import calculus as C
from .grid import SUPPORTED_P, SpectralGrid, make_grid, oversample, product, sup_norm
from .model import InitDataSpec

PROBE_LENGTH = 2.0 * np.pi
PROBE_BAND = 32
PROBE_LEVELS = (256, 1024)
STABILITY_TOL = 0.10
CONSTANT_TOL = 1e-12


@dataclass
class ProbeReport:
    tag: str
    exponents: dict
    samples: int
    max_ratio: float
    ratio_coarse: float
    ratio_fine: float
    rel_change: float
    constant_residual: float
    passed: bool
    levels: tuple[int, int] = PROBE_LEVELS
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class CutoffChi:
    """Smooth radial cutoff: 1 on ``|r| <= 1``, 0 on ``|r| >= 2``.

    The bridge ``psi(1-t) / (psi(1-t) + psi(t))`` with ``psi(t) = exp(-1/t)``
    and ``t = |r| - 1`` is C-infinity with all derivatives vanishing at both ends.
    """

    inner: float = 1.0
    outer: float = 2.0

    def __call__(self, r) -> np.ndarray:
        a = np.abs(np.asarray(r, dtype=float))
        t = np.clip((a - self.inner) / (self.outer - self.inner), 0.0, 1.0)
        out = np.where(a <= self.inner, 1.0, 0.0)
        mid = (t > 0) & (t < 1)
        tm = t[mid]
        p1 = np.exp(-1.0 / (1.0 - tm))
        p0 = np.exp(-1.0 / tm)
        out[mid] = p1 / (p1 + p0)
        return out


# ---------------------------------------------------------------------------
# Random fields and norms


def probe_field(grid: SpectralGrid, seed: int, band: int = PROBE_BAND, power: float = 1.0) -> np.ndarray:
    """Real mean-zero field with Gaussian coefficients on modes ``1 <= |n| <= band``.

    The coefficients are drawn per integer mode, so for a fixed seed the same
    trigonometric polynomial is produced on every grid with ``N > 2 band``.
    """
    if grid.N <= 2 * band:
        raise ValueError(f"grid N={grid.N} does not resolve band {band}")
    rng = np.random.default_rng(seed)
    n = np.arange(1, band + 1)
    c = (rng.standard_normal(band) + 1j * rng.standard_normal(band)) * (1.0 + n**2) ** (-0.5 * power)
    coeffs = np.zeros(grid.N, dtype=complex)
    m = np.round(n * grid.L / PROBE_LENGTH).astype(np.int64)
    coeffs[m] = c
    coeffs[-m] = np.conj(c)
    f = np.fft.ifft(coeffs).real * grid.N
    return f / np.sqrt(np.mean(f**2))


def lp(grid: SpectralGrid, f: np.ndarray, p: float) -> float:
    """L^p norm of a band-limited field, exact for p in {2, 4, 8} at 4x oversampling."""
    if p not in SUPPORTED_P:
        raise ValueError(f"unsupported exponent p={p!r}; expected one of {SUPPORTED_P}")
    if p == np.inf:
        return sup_norm(grid, f, 4)
    if p == 2:
        return C.sobolev_norm(grid, f, 0.0)
    fine, g = oversample(grid, f, 4)
    return float((fine.dx * np.sum(np.abs(g) ** p)) ** (1.0 / p))


def _check_holder(p: float, *qs: float) -> None:
    for q in (p, *qs):
        if q not in SUPPORTED_P:
            raise ValueError(f"unsupported exponent {q!r}; expected one of {SUPPORTED_P}")
    if not math.isclose(1.0 / p, sum(1.0 / q for q in qs), abs_tol=1e-12):
        raise ValueError(f"exponents violate 1/p = sum 1/p_i: p={p}, p_i={qs}")


def _run_probe(tag: str, exponents: dict, samples: int, seed: int,
               ratio: Callable[[SpectralGrid, np.ndarray, np.ndarray], float],
               constant_residual: Callable[[SpectralGrid, np.ndarray], float]) -> ProbeReport:
    if samples < 1:
        raise ValueError("samples must be positive")
    maxima = []
    for N in PROBE_LEVELS:
        g = make_grid(PROBE_LENGTH, N)
        vals = [ratio(g, probe_field(g, seed + 2 * i), probe_field(g, seed + 2 * i + 1))
                for i in range(samples)]
        maxima.append(max(vals))
    g = make_grid(PROBE_LENGTH, PROBE_LEVELS[0])
    resid = max(constant_residual(g, probe_field(g, seed + i)) for i in range(min(samples, 10)))
    coarse, fine = maxima
    change = abs(fine - coarse) / coarse if coarse > 0 else 0.0
    ok = bool(np.isfinite(coarse) and np.isfinite(fine) and change <= STABILITY_TOL
              and resid <= CONSTANT_TOL)
    return ProbeReport(tag, exponents, samples, coarse, coarse, fine, change, resid, ok)


def _safe_ratio(num: float, den: float) -> float:
    return 0.0 if num == 0 else num / den


# ---------------------------------------------------------------------------
# Probes


def probe_fractional_leibniz(alpha: float, alpha1: float, alpha2: float, p: float = 2,
                             p1: float = 4, p2: float = 4, samples: int = 100,
                             seed: int = 0) -> ProbeReport:
    """``||D^a(fg) - f D^a g - g D^a f||_p <= C ||D^a1 f||_p1 ||D^a2 g||_p2``."""
    if not (0 < alpha < 1 and 0 < alpha1 < alpha and 0 < alpha2 < alpha
            and math.isclose(alpha, alpha1 + alpha2)):
        raise ValueError("need alpha = alpha1 + alpha2 in (0,1) with alpha1, alpha2 in (0, alpha)")
    _check_holder(p, p1, p2)
    if p == np.inf or p1 in (1, np.inf) or p2 in (1, np.inf):
        raise ValueError("need p < inf and 1 < p1, p2 < inf")

    def ratio(g, f, h):
        num = lp(g, C.commutator_Ds(g, f, h, alpha, "D^s-Leibniz-defect"), p)
        return _safe_ratio(num, lp(g, C.riesz(g, f, alpha1), p1) * lp(g, C.riesz(g, h, alpha2), p2))

    def const(g, f):
        c = np.full(g.N, 1.7)
        return (lp(g, C.commutator_Ds(g, f, c, alpha, "D^s-Leibniz-defect"), p)
                / lp(g, C.riesz(g, c * f, alpha), p))

    return _run_probe("fractional-leibniz", dict(alpha=alpha, alpha1=alpha1, alpha2=alpha2,
                                                 p=p, p1=p1, p2=p2), samples, seed, ratio, const)


def probe_kato_ponce(s: float, case: str = "I", exponents: tuple = (2, np.inf, 2),
                     samples: int = 100, seed: int = 0, hilbert: bool = False) -> ProbeReport:
    """Commutator ``[D^s; f] g`` (or ``[H D^s; f] g``).

    Case I (``0 < s <= 1``), exponents ``(p, p1, p2)``:
        ``<= C ||D^{s-1} f_x||_p1 ||g||_p2``.
    Case II (``s > 1``), exponents ``(p, p1, p2, p3, p4)``:
        ``<= C (||D^s f||_p1 ||g||_p2 + ||f_x||_p3 ||D^{s-1} g||_p4)``.
    """
    variant = "HD^s" if hilbert else "D^s"
    if case == "I":
        if not 0 < s <= 1:
            raise ValueError("case I needs 0 < s <= 1")
        if len(exponents) != 3:
            raise ValueError("case I takes exponents (p, p1, p2)")
        p, p1, p2 = exponents
        _check_holder(p, p1, p2)

        def rhs(g, f, h):
            return lp(g, C.riesz(g, C.deriv(g, f, 1), s - 1), p1) * lp(g, h, p2)
    elif case == "II":
        if not s > 1:
            raise ValueError("case II needs s > 1")
        if len(exponents) != 5:
            raise ValueError("case II takes exponents (p, p1, p2, p3, p4)")
        p, p1, p2, p3, p4 = exponents
        _check_holder(p, p1, p2)
        _check_holder(p, p3, p4)

        def rhs(g, f, h):
            return (lp(g, C.riesz(g, f, s), p1) * lp(g, h, p2)
                    + lp(g, C.deriv(g, f, 1), p3) * lp(g, C.riesz(g, h, s - 1), p4))
    else:
        raise ValueError(f"unknown case {case!r}; expected 'I' or 'II'")
    if p in (1, np.inf):
        raise ValueError("need 1 < p < inf")

    def ratio(g, f, h):
        return _safe_ratio(lp(g, C.commutator_Ds(g, f, h, s, variant), p), rhs(g, f, h))

    def const(g, h):
        c = np.full(g.N, -0.6)
        return lp(g, C.commutator_Ds(g, c, h, s, variant), p) / lp(g, C.riesz(g, c * h, s), p)

    tag = f"kato-ponce-{case}" + ("-HDs" if hilbert else "")
    return _run_probe(tag, dict(s=s, case=case, exponents=list(exponents), hilbert=hilbert),
                      samples, seed, ratio, const)


def probe_calderon(l: int, m: int, p: float = 2, samples: int = 100, seed: int = 0) -> ProbeReport:
    """``||d^l [H; f] d^m g||_p <= C ||d^{l+m} f||_inf ||g||_p``."""
    if int(l) != l or int(m) != m or l < 0 or m < 0:
        raise ValueError("l and m must be non-negative integers")
    if p not in (2, 4):
        raise ValueError("p must be 2 or 4")
    l, m = int(l), int(m)

    def _d(g, f, k):
        return f if k == 0 else C.deriv(g, f, k)

    def ratio(g, f, h):
        num = lp(g, _d(g, C.hilbert_commutator(g, f, _d(g, h, m)), l), p)
        return _safe_ratio(num, lp(g, _d(g, f, l + m), np.inf) * lp(g, h, p))

    def const(g, h):
        c = np.full(g.N, 2.3)
        lead = lp(g, _d(g, C.hilbert(g, c * _d(g, h, m)), l), p)
        return lp(g, _d(g, C.hilbert_commutator(g, c, _d(g, h, m)), l), p) / lead

    return _run_probe("calderon", dict(l=l, m=m, p=p), samples, seed, ratio, const)


def sharp_commutator(grid: SpectralGrid, f: np.ndarray, g: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    """``D^{a+b}(g D^{1-(a+b)} f) - D^a(g D^{1-a} f)``."""
    ab = alpha + beta
    first = C.riesz(grid, product(grid, g, C.riesz(grid, f, 1.0 - ab)), ab)
    second = C.riesz(grid, product(grid, g, C.riesz(grid, f, 1.0 - alpha)), alpha)
    return first - second


def probe_sharp_commutation(alpha: float, beta: float, p: float = 2, samples: int = 100,
                            seed: int = 0) -> ProbeReport:
    """``||sharp_commutator(f, g)||_p <= C ||g_x||_inf ||f||_p``."""
    if not (0 <= alpha < 1 and 0 < beta <= 1 - alpha):
        raise ValueError("need 0 <= alpha < 1 and 0 < beta <= 1 - alpha")
    if p not in (2, 4):
        raise ValueError("p must be 2 or 4")

    def ratio(grid, f, g):
        num = lp(grid, sharp_commutator(grid, f, g, alpha, beta), p)
        return _safe_ratio(num, lp(grid, C.deriv(grid, g, 1), np.inf) * lp(grid, f, p))

    def const(grid, f):
        c = np.full(grid.N, 0.9)
        lead = lp(grid, C.riesz(grid, c * C.riesz(grid, f, 1.0 - alpha - beta), alpha + beta), p)
        return lp(grid, sharp_commutator(grid, f, c, alpha, beta), p) / lead

    return _run_probe("sharp-commutation", dict(alpha=alpha, beta=beta, p=p), samples, seed, ratio, const)


def default_probes(seed: int = 0, samples: int = 100) -> list[ProbeReport]:
    """The shipped probe suite."""
    return [
        probe_fractional_leibniz(0.5, 0.25, 0.25, 2, 4, 4, samples, seed),
        probe_kato_ponce(0.75, "I", (2, np.inf, 2), samples, seed),
        probe_kato_ponce(0.75, "I", (2, np.inf, 2), samples, seed, hilbert=True),
        probe_kato_ponce(1.5, "II", (2, np.inf, 2, np.inf, 2), samples, seed),
        probe_kato_ponce(1.5, "II", (2, np.inf, 2, np.inf, 2), samples, seed, hilbert=True),
        probe_calderon(1, 1, 2, samples, seed),
        probe_sharp_commutation(0.25, 0.5, 2, samples, seed),
    ]


# ---------------------------------------------------------------------------
# Bona-Smith smoothing


def bona_smith_project(grid: SpectralGrid, f: np.ndarray, n: float, chi: CutoffChi | None = None) -> np.ndarray:
    """Smooth low-pass ``(chi(|k| / n) f_hat)^vee``."""
    if not n >= 1:
        raise ValueError(f"cutoff n must be >= 1, got {n!r}")
    chi = chi or CutoffChi()
    return C.apply_multiplier(grid, f, chi(grid.k / n).astype(complex))


def power_law_spec(exponent: float, kmax: float, seed: int = 0) -> InitDataSpec:
    """Random data whose coefficient variance decays like ``(1 + k^2)^-exponent``."""
    return InitDataSpec("random-band-limited", amplitude=1.0, kmax=kmax, power=exponent, seed=seed)


def bona_smith_spec(level: float, kmax: float = 511.0, seed: int = 0) -> InitDataSpec:
    """Shipped ladder datum for regularity level ``level``: coefficients ~ ``(1 + k^2)^{-(level+1)/2}``."""
    return power_law_spec(level + 1.0, kmax, seed)


@dataclass
class BonaSmithReport:
    s: float
    sigma: float
    ladder: list[float]
    growth: list[float]
    decay: list[float]
    growth_slope: float
    decay_slope: float
    contraction_ok: bool
    passed: bool


def _slope(x, y) -> float:
    x, y = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    return float(np.polyfit(x, y, 1)[0])


def bona_smith_rates(spec: InitDataSpec, s: float, sigma: float, ladder=(4, 8, 16, 32, 64),
                     grid: SpectralGrid | None = None, level: float | None = None,
                     chi: CutoffChi | None = None) -> BonaSmithReport:
    """Log-log slopes of ``||P_n f||_{H^{r+sigma}}`` and ``||P_n f - P_{2n} f||_{H^{r-sigma}}``.

    ``r`` is the regularity level of the datum, ``s + 1/2`` by default (the
    Schrodinger component); pass ``level=s`` for the Benjamin-Ono component.
    The difference uses ``m = 2n``. The contraction flag checks
    ``||P_n f||_{H^q} <= ||f||_{H^q}`` for every level ``q`` touched.
    """
    if not 0 <= sigma <= s:
        raise ValueError(f"sigma must lie in [0, s], got {sigma!r}")
    ladder = [float(n) for n in ladder]
    if len(ladder) < 2 or any(b <= a for a, b in zip(ladder, ladder[1:])):
        raise ValueError("ladder must be increasing with at least two levels")
    grid = grid or make_grid(PROBE_LENGTH, 1024)
    chi = chi or CutoffChi()
    r = s + 0.5 if level is None else level
    f = spec.evaluate(grid, real=True)
    growth, decay = [], []
    contraction = True
    for n in ladder:
        pn = bona_smith_project(grid, f, n, chi)
        p2n = bona_smith_project(grid, f, 2 * n, chi)
        growth.append(C.sobolev_norm(grid, pn, r + sigma))
        decay.append(C.sobolev_norm(grid, pn - p2n, r - sigma))
        for q in (r - sigma, r, r + sigma):
            contraction &= C.sobolev_norm(grid, pn, q) <= C.sobolev_norm(grid, f, q) * (1 + 1e-12)
    gs, ds = _slope(ladder, growth), _slope(ladder, decay)
    ok = bool(gs <= sigma + 0.1 and ds <= -sigma + 0.1 and contraction)
    return BonaSmithReport(s, sigma, ladder, growth, decay, gs, ds, bool(contraction), ok)


def apriori_time(norm: float, A_s: float) -> float:
    """Existence time ``(A_s (1 + norm))^-2`` of the small-data theory."""
    if not A_s > 0:
        raise ValueError(f"A_s must be positive, got {A_s!r}")
    if not norm >= 0:
        raise ValueError(f"norm must be non-negative, got {norm!r}")
    return (A_s * (1.0 + norm)) ** -2
