"""Fourier-multiplier calculus on a :class:`~sbo_lab.grid.SpectralGrid`.

Conventions: ``sgn(0) = 0`` and ``|0|^s = 0`` for ``s > 0``. Multipliers with an
odd symbol annihilate the Nyquist mode, which has no well-defined sign.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy.optimize import minimize_scalar

from .grid import SpectralGrid, _check, product

Parity = Literal["even", "odd", "none"]


@dataclass(frozen=True)
class MultiplierSpec:
    """A Fourier multiplier ``k -> symbol(k)`` with a parity tag for Nyquist handling."""

    symbol: Callable[[np.ndarray], np.ndarray]
    parity: Parity = "none"

    def table(self, grid: SpectralGrid) -> np.ndarray:
        m = np.asarray(self.symbol(np.asarray(grid.k, dtype=float)), dtype=complex)
        m = np.broadcast_to(m, grid.k.shape).copy()
        if self.parity == "odd":
            m[grid.nyquist] = 0.0
        if not np.all(np.isfinite(m)):
            raise ValueError("multiplier symbol is not finite on the grid")
        return m


def apply_multiplier(grid: SpectralGrid, f: np.ndarray, table: np.ndarray) -> np.ndarray:
    """Apply a multiplier table (FFT ordering) to a field.

    Real input gives real output whenever the table is Hermitian; the
    imaginary round-off is dropped in that case.
    """
    f = _check(grid, f)
    out = np.fft.ifft(table * np.fft.fft(f))
    if np.isrealobj(f) and _is_hermitian(grid, table):
        return out.real.copy()
    return out


def _is_hermitian(grid: SpectralGrid, table: np.ndarray) -> bool:
    mirrored = table[(-grid.n) % grid.N]
    return bool(np.allclose(mirrored, np.conj(table), rtol=1e-14, atol=0.0))


def _sgn_table(grid: SpectralGrid) -> np.ndarray:
    s = np.sign(grid.k).astype(float)
    s[grid.nyquist] = 0.0
    return s


def hilbert_symbol(grid: SpectralGrid) -> np.ndarray:
    return -1j * _sgn_table(grid)


def deriv_symbol(grid: SpectralGrid, m: int) -> np.ndarray:
    sym = (1j * grid.k) ** m
    if m % 2 == 1:
        sym[grid.nyquist] = 0.0
    return sym


def riesz_symbol(grid: SpectralGrid, s: float) -> np.ndarray:
    absk = np.abs(grid.k)
    sym = np.zeros(grid.N)
    nz = absk > 0
    sym[nz] = absk[nz] ** s
    if s == 0:
        sym[~nz] = 1.0
    return sym.astype(complex)


def bessel_symbol(grid: SpectralGrid, s: float) -> np.ndarray:
    return ((1.0 + grid.k**2) ** (0.5 * s)).astype(complex)


def hilbert(grid: SpectralGrid, f: np.ndarray) -> np.ndarray:
    """Hilbert transform, symbol ``-i sgn(k)``."""
    return apply_multiplier(grid, f, hilbert_symbol(grid))


def deriv(grid: SpectralGrid, f: np.ndarray, m: int = 1) -> np.ndarray:
    """``m``-th derivative, symbol ``(ik)^m``."""
    if int(m) != m or m < 1:
        raise ValueError(f"derivative order must be a positive integer, got {m!r}")
    return apply_multiplier(grid, f, deriv_symbol(grid, int(m)))


def riesz(grid: SpectralGrid, f: np.ndarray, s: float) -> np.ndarray:
    """Riesz potential ``D^s``, symbol ``|k|^s``.

    The k=0 mode passes unchanged for ``s == 0`` and is zeroed otherwise.
    """
    if s <= -1:
        raise ValueError(f"riesz order must exceed -1, got {s!r}")
    return apply_multiplier(grid, f, riesz_symbol(grid, s))


def bessel(grid: SpectralGrid, f: np.ndarray, s: float) -> np.ndarray:
    """Bessel potential ``J^s``, symbol ``(1 + k^2)^(s/2)``."""
    return apply_multiplier(grid, f, bessel_symbol(grid, s))


def sobolev_norm(grid: SpectralGrid, f: np.ndarray, s: float) -> float:
    """``||f||_{H^s} = ||J^s f||_{L^2}`` computed as a coefficient sum."""
    f = _check(grid, f)
    c = np.fft.fft(f)
    w = (1.0 + grid.k**2) ** s
    return float(np.sqrt(grid.dx / grid.N * np.sum(w * (c.real**2 + c.imag**2))))


def riesz_norm(grid: SpectralGrid, f: np.ndarray, s: float) -> float:
    """``||D^s f||_{L^2}``."""
    f = _check(grid, f)
    c = np.fft.fft(f)
    w = np.abs(riesz_symbol(grid, 2 * s)) if s != 0 else np.ones(grid.N)
    return float(np.sqrt(grid.dx / grid.N * np.sum(w * (c.real**2 + c.imag**2))))


# Closed-form symbols of T1(D) = J^{-1} H d_x^2 - d_x and T2(D) = D^{3/2} J^{-1} - D^{1/2}.
# |xi| - sqrt(1 + xi^2) is evaluated as -1 / (|xi| + sqrt(1 + xi^2)) to avoid cancellation.

def t1_symbol(xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    r = np.sqrt(1.0 + xi**2)
    return 1j * xi / r * (-1.0 / (np.abs(xi) + r))


def t2_symbol(xi: np.ndarray) -> np.ndarray:
    xi = np.asarray(xi, dtype=float)
    r = np.sqrt(1.0 + xi**2)
    return (np.sqrt(np.abs(xi)) / r * (-1.0 / (np.abs(xi) + r))).astype(complex)


def t1_apply(grid: SpectralGrid, f: np.ndarray) -> np.ndarray:
    return apply_multiplier(grid, f, MultiplierSpec(t1_symbol, "odd").table(grid))


def t2_apply(grid: SpectralGrid, f: np.ndarray) -> np.ndarray:
    return apply_multiplier(grid, f, MultiplierSpec(t2_symbol, "even").table(grid))


def symbol_sup(symbol: Callable[[np.ndarray], np.ndarray], xi_max: float = 1e6,
               points: int = 20001) -> float:
    """``sup |symbol|`` over ``[0, xi_max]``: log-spaced scan plus bounded Brent refinement."""
    xi = np.concatenate([[0.0], np.logspace(-8, np.log10(xi_max), points - 1)])
    vals = np.abs(symbol(xi))
    i = int(np.argmax(vals))
    lo = xi[max(i - 1, 0)]
    hi = xi[min(i + 1, len(xi) - 1)]
    best = float(vals[i])
    if hi > lo:
        res = minimize_scalar(lambda t: -float(np.abs(symbol(np.array([t])))[0]),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-12, "maxiter": 500})
        best = max(best, -float(res.fun))
    return best


def t1_symbol_sup(points: int = 20001) -> float:
    return symbol_sup(t1_symbol, points=points)


def t2_symbol_sup(points: int = 20001) -> float:
    return symbol_sup(t2_symbol, points=points)


CommutatorVariant = Literal["D^s", "HD^s", "D^s-Leibniz-defect"]


def commutator_Ds(grid: SpectralGrid, f: np.ndarray, g: np.ndarray, s: float,
                  variant: CommutatorVariant = "D^s") -> np.ndarray:
    """Commutator-type expressions with dealiased products.

    ``"D^s"``: ``D^s(fg) - f D^s g``; ``"HD^s"``: the same with ``H D^s``;
    ``"D^s-Leibniz-defect"``: ``D^s(fg) - f D^s g - g D^s f``.
    """
    if s <= 0:
        raise ValueError(f"commutator order must be positive, got {s!r}")
    if variant == "D^s":
        op = riesz_symbol(grid, s)
    elif variant == "HD^s":
        op = hilbert_symbol(grid) * riesz_symbol(grid, s)
    elif variant == "D^s-Leibniz-defect":
        op = riesz_symbol(grid, s)
    else:
        raise ValueError(f"unknown commutator variant {variant!r}")
    out = apply_multiplier(grid, product(grid, f, g), op) - product(grid, f, apply_multiplier(grid, g, op))
    if variant == "D^s-Leibniz-defect":
        out = out - product(grid, g, apply_multiplier(grid, f, op))
    return out


def hilbert_commutator(grid: SpectralGrid, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    """``[H; f] g = H(fg) - f H g``."""
    return hilbert(grid, product(grid, f, g)) - product(grid, f, hilbert(grid, g))
