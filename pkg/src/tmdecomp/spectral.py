"""Unitary DFT, periodograms and frequency-position bookkeeping.

Positions are 1-based throughout the public interface: position ``t``
corresponds to DFT bin ``t - 1`` and its dual position is ``T - t + 2``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SpectralDensity",
    "fourier_basis",
    "dft",
    "idft",
    "spectral_density",
    "aggregate_density",
    "dual_position",
    "position_period_hours",
]

DC = "DC"


@dataclass(frozen=True)
class SpectralDensity:
    """Nonnegative power per DFT position (``phi[t - 1]`` is position ``t``)."""

    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        if phi.ndim != 1:
            raise ValueError("spectral density must be one-dimensional")
        if np.any(phi < 0) or not np.all(np.isfinite(phi)):
            raise ValueError("spectral density must be finite and nonnegative")
        object.__setattr__(self, "phi", phi)

    @property
    def T(self) -> int:
        return self.phi.shape[0]

    def at(self, t: int) -> float:
        """Power at 1-based position ``t``."""
        _check_position(t, self.T)
        return float(self.phi[t - 1])


def fourier_basis(T: int) -> np.ndarray:
    """Dense ``T x T`` matrix whose column ``t`` is ``W_t``.

    ``W[k, t] = exp(-2j*pi*t*k/T) / sqrt(T)`` with 0-based indices. Only meant
    for small ``T`` (test oracles and the dense noise prox).
    """
    k = np.arange(T)
    return np.exp(-2j * np.pi * np.outer(k, k) / T) / np.sqrt(T)


def dft(x, axis: int = 0) -> np.ndarray:
    """Unitary forward DFT ``W^T x`` along ``axis`` (columns for matrices)."""
    return np.fft.fft(np.asarray(x, dtype=float), axis=axis, norm="ortho")


def idft(alpha, axis: int = 0) -> np.ndarray:
    """Inverse of :func:`dft` (complex output)."""
    return np.fft.ifft(alpha, axis=axis, norm="ortho")


def spectral_density(x) -> SpectralDensity:
    """Periodogram ``|dft(x)|^2`` of a real vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a vector; use aggregate_density for matrices")
    return SpectralDensity(np.abs(dft(x)) ** 2)


def aggregate_density(M) -> SpectralDensity:
    """Sum of the per-column periodograms of a ``T x P`` matrix."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    return SpectralDensity(np.sum(np.abs(dft(M, axis=0)) ** 2, axis=1))


def _check_position(t: int, T: int) -> None:
    if not 1 <= t <= T:
        raise ValueError(f"position {t} outside [1, {T}]")


def dual_position(t: int, T: int) -> int:
    """Mirror position ``T - t + 2`` (position 1 is its own dual)."""
    _check_position(t, T)
    return 1 if t == 1 else T - t + 2


def position_period_hours(t: int, T: int, interval_seconds: float = 300):
    """Period in hours captured at position ``t``, or ``"DC"`` for ``t = 1``."""
    _check_position(t, T)
    if t == 1:
        return DC
    # bin t-1 and its mirror T-t+1 complete the same number of cycles
    cycles = min(t - 1, T - t + 1)
    return T / cycles * interval_seconds / 3600.0
