"""Periodic collocation grid and the discrete Fourier transform contract.

Fields are plain 1-D numpy arrays sampled at the nodes ``x_j = j L / N``.
Complex arrays hold Schrodinger-type fields (u, w); float arrays hold the
Benjamin-Ono-type fields (v, z).

Spectral coefficients use the Plancherel-unitary normalization

    f_hat = fft(f) * sqrt(L) / N,

so that ``dx * sum |f_j|^2 == sum |f_hat_n|^2`` and every L^2 integral is a
plain coefficient sum. Coefficients are kept in numpy FFT ordering.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

SUPPORTED_P = (1, 2, 4, 8, np.inf)


@dataclass(frozen=True)
class SpectralGrid:
    """Uniform periodic grid on [0, L) with N collocation points."""

    L: float
    N: int

    @cached_property
    def dx(self) -> float:
        return self.L / self.N

    @cached_property
    def x(self) -> np.ndarray:
        x = np.arange(self.N) * self.dx
        x.flags.writeable = False
        return x

    @cached_property
    def n(self) -> np.ndarray:
        """Integer mode indices in FFT ordering, ``{-N/2, ..., N/2-1}``."""
        n = np.fft.fftfreq(self.N, d=1.0 / self.N).round().astype(np.int64)
        n.flags.writeable = False
        return n

    @cached_property
    def k(self) -> np.ndarray:
        """Angular wavenumbers ``2 pi n / L`` in FFT ordering."""
        k = 2.0 * np.pi * self.n / self.L
        k.flags.writeable = False
        return k

    @property
    def nyquist(self) -> int:
        """Array index of the unpaired mode n = -N/2."""
        return self.N // 2

    def refined(self, factor: int) -> "SpectralGrid":
        return SpectralGrid(self.L, self.N * factor)


def _is_pow2(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def make_grid(L: float, N: int) -> SpectralGrid:
    if isinstance(N, bool) or int(N) != N or N < 8 or not _is_pow2(int(N)):
        raise ValueError(f"N must be even power of two >= 8, got {N!r}")
    if not np.isfinite(L) or L <= 0:
        raise ValueError(f"L must be positive, got {L!r}")
    return SpectralGrid(float(L), int(N))


def _check(grid: SpectralGrid, f: np.ndarray) -> np.ndarray:
    f = np.asarray(f)
    if f.shape != (grid.N,):
        raise ValueError(f"field has shape {f.shape}, expected ({grid.N},)")
    return f


def to_spectral(grid: SpectralGrid, f: np.ndarray) -> np.ndarray:
    f = _check(grid, f)
    return np.fft.fft(f) * (np.sqrt(grid.L) / grid.N)


def from_spectral(grid: SpectralGrid, coeffs: np.ndarray, real: bool = False) -> np.ndarray:
    """Inverse of :func:`to_spectral`. ``real=True`` drops the imaginary part."""
    coeffs = _check(grid, coeffs)
    f = np.fft.ifft(coeffs) * (grid.N / np.sqrt(grid.L))
    return f.real.copy() if real else f


def inner_product(grid: SpectralGrid, f: np.ndarray, g: np.ndarray) -> complex:
    """Discrete ``integral f conj(g) dx``."""
    f = _check(grid, f)
    g = _check(grid, g)
    return complex(grid.dx * np.vdot(g, f))


def lp_norm(grid: SpectralGrid, f: np.ndarray, p: float) -> float:
    """Rectangle-rule L^p norm; ``p=inf`` is the max over the given samples.

    Callers wanting an accurate sup-norm between nodes should pass an
    oversampled field (see :func:`sup_norm`).
    """
    f = _check(grid, f)
    if p not in SUPPORTED_P:
        raise ValueError(f"unsupported exponent p={p!r}; expected one of {SUPPORTED_P}")
    a = np.abs(f)
    if p == np.inf:
        return float(a.max())
    if p == 2:
        return float(np.sqrt(grid.dx * np.dot(a, a)))
    return float((grid.dx * np.sum(a**p)) ** (1.0 / p))


def pad_coeffs(coeffs: np.ndarray, M: int) -> np.ndarray:
    """Zero-pad raw FFT coefficients of length N to length M >= N.

    The Nyquist coefficient is split evenly between +-N/2 so that real
    fields stay real and values at the original nodes are reproduced.
    """
    N = coeffs.shape[-1]
    if M == N:
        return coeffs.copy()
    h = N // 2
    out = np.zeros(coeffs.shape[:-1] + (M,), dtype=complex)
    out[..., :h] = coeffs[..., :h]
    out[..., M - h + 1:] = coeffs[..., h + 1:]
    out[..., h] = 0.5 * coeffs[..., h]
    out[..., M - h] = 0.5 * coeffs[..., h]
    return out


def truncate_coeffs(coeffs: np.ndarray, N: int) -> np.ndarray:
    """Keep modes ``|n| < N/2`` of length-M raw coefficients; Nyquist is zeroed."""
    M = coeffs.shape[-1]
    h = N // 2
    out = np.zeros(coeffs.shape[:-1] + (N,), dtype=complex)
    out[..., :h] = coeffs[..., :h]
    out[..., h + 1:] = coeffs[..., M - h + 1:]
    return out


def oversample(grid: SpectralGrid, f: np.ndarray, factor: int = 4) -> tuple[SpectralGrid, np.ndarray]:
    """Band-limited interpolation of ``f`` onto ``factor * N`` points."""
    f = _check(grid, f)
    if factor < 1 or not _is_pow2(int(factor)):
        raise ValueError(f"oversampling factor must be a power of two, got {factor!r}")
    fine = grid.refined(factor)
    if factor == 1:
        return fine, f.copy()
    M = fine.N
    g = np.fft.ifft(pad_coeffs(np.fft.fft(f), M)) * (M / grid.N)
    return fine, (g.real.copy() if np.isrealobj(f) else g)


def sup_norm(grid: SpectralGrid, f: np.ndarray, factor: int = 4) -> float:
    """Sup-norm of the band-limited interpolant, evaluated on an oversampled grid."""
    fine, g = oversample(grid, f, factor)
    return lp_norm(fine, g, np.inf)


@lru_cache(maxsize=None)
def _pad_size(N: int, nfactors: int) -> int:
    # Smallest even M with nfactors*N/2 < M, i.e. the (p+1)/2 rule; p=2 gives 3N/2.
    return (nfactors + 1) * N // 2


def product(grid: SpectralGrid, *factors: np.ndarray) -> np.ndarray:
    """Alias-free pointwise product of band-limited fields, projected back to the grid.

    Each factor is zero-padded to ``(p+1) N / 2`` points (the 3/2 rule for
    p=2 factors), multiplied there, and truncated to ``|n| < N/2``. The result
    is the exact Fourier projection of the continuous product.
    """
    if not factors:
        raise ValueError("product needs at least one factor")
    factors = tuple(_check(grid, f) for f in factors)
    N = grid.N
    M = _pad_size(N, len(factors))
    acc = None
    for f in factors:
        g = np.fft.ifft(pad_coeffs(np.fft.fft(f), M)) * (M / N)
        acc = g if acc is None else acc * g
    out = np.fft.ifft(truncate_coeffs(np.fft.fft(acc) * (N / M), N))
    if all(np.isrealobj(f) for f in factors):
        return out.real.copy()
    return out


def integrate_product(grid: SpectralGrid, *factors: np.ndarray) -> complex:
    """Exact ``integral prod(factors) dx`` for band-limited fields."""
    factors = tuple(_check(grid, f) for f in factors)
    N = grid.N
    M = _pad_size(N, len(factors))
    acc = None
    for f in factors:
        g = np.fft.ifft(pad_coeffs(np.fft.fft(f), M)) * (M / N)
        acc = g if acc is None else acc * g
    return complex(np.sum(acc) * grid.L / M)


def remove_nyquist(grid: SpectralGrid, f: np.ndarray) -> np.ndarray:
    """Project ``f`` onto the modes ``|n| < N/2``."""
    f = _check(grid, f)
    c = np.fft.fft(f)
    c[grid.nyquist] = 0.0
    out = np.fft.ifft(c)
    return out.real.copy() if np.isrealobj(f) else out
