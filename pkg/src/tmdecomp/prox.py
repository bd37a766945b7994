"""Proximal operators for the three blocks of the APG step.

* low-rank block: singular value thresholding
* sparse block: entry-wise soft thresholding
* noise block: the frequency-weighted quadratic

      argmin_N  (L_f/2) ||N - G||_F^2 + mu*gamma ||C W^T N||_F^2

  which is diagonal in the Fourier domain, so the production path is a
  per-frequency shrink. A dense linear solve is kept as a cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .spectral import dft, fourier_basis, idft
from .weights import WeightVector

__all__ = [
    "ProxContext",
    "soft_threshold",
    "svt",
    "noise_shrink_factors",
    "noise_prox_dense",
    "noise_prox_fft",
    "noise_prox",
]


@dataclass(frozen=True)
class ProxContext:
    mu: float
    lam: float
    gamma: float
    weights: WeightVector
    L_f: float = 3.0

    def __post_init__(self):
        if self.mu <= 0 or self.lam <= 0 or self.gamma < 0:
            raise ValueError("need mu > 0, lambda > 0 and gamma >= 0")
        if self.L_f <= 0:
            raise ValueError("L_f must be positive")


def soft_threshold(M, eps: float) -> np.ndarray:
    """Entry-wise ``sign(m) * max(|m| - eps, 0)``."""
    if eps <= 0:
        raise ValueError("threshold must be positive")
    M = np.asarray(M, dtype=float)
    return np.sign(M) * np.maximum(np.abs(M) - eps, 0.0)


def _svt(M: np.ndarray, eps: float):
    if not np.all(np.isfinite(M)):
        raise FloatingPointError("svt: non-finite input")
    U, s, Vt = np.linalg.svd(M, full_matrices=False)
    s = np.maximum(s - eps, 0.0)
    r = int(np.count_nonzero(s))
    Z = (U[:, :r] * s[:r]) @ Vt[:r]
    return Z, s[:r]


def svt(M, eps: float) -> tuple[np.ndarray, int]:
    """Singular value thresholding.

    Returns the shrunk matrix and the number of singular values that
    survived the threshold.
    """
    if eps <= 0:
        raise ValueError("threshold must be positive")
    Z, s = _svt(np.asarray(M, dtype=float), eps)
    return Z, s.size


def noise_shrink_factors(ctx: ProxContext) -> np.ndarray:
    """Per-position multiplier ``L_f / (L_f + 2 mu gamma c_t^2)``."""
    c2 = ctx.weights.c ** 2
    return ctx.L_f / (ctx.L_f + 2.0 * ctx.mu * ctx.gamma * c2)


def _check_weights(G: np.ndarray, ctx: ProxContext) -> None:
    if G.shape[0] != ctx.weights.T:
        raise ValueError(
            f"weights have length {ctx.weights.T}, matrix has {G.shape[0]} rows")


def noise_prox_dense(G, ctx: ProxContext) -> np.ndarray:
    """Explicit linear solve ``L_f (L_f I + 2 mu gamma H)^{-1} G``.

    ``H = conj(W) C^2 W^T`` is the Hessian of ``||C W^T N||_F^2 / 2``; the
    conjugate matters, since ``W`` is symmetric and ``W W^T`` is the index
    reversal rather than the identity. Cost is cubic in ``T``; intended for
    small problems and as an oracle for :func:`noise_prox_fft`.
    """
    G = np.asarray(G, dtype=float)
    _check_weights(G, ctx)
    if not ctx.weights.is_symmetric():
        raise ValueError("weights must satisfy c_t == c_(T-t+2) for a real solution")
    T = G.shape[0]
    W = fourier_basis(T)
    H = ctx.L_f * np.eye(T) + 2.0 * ctx.mu * ctx.gamma * (W.conj() * ctx.weights.c ** 2) @ W.T
    N = ctx.L_f * np.linalg.solve(H, G.astype(complex))
    scale = max(1.0, float(np.max(np.abs(N))))
    if np.max(np.abs(N.imag)) > 1e-9 * scale:
        raise FloatingPointError("dense noise prox produced a complex solution")
    return N.real


def noise_prox_fft(G, ctx: ProxContext) -> np.ndarray:
    """Same solution as :func:`noise_prox_dense` in ``O(T P log T)``."""
    G = np.asarray(G, dtype=float)
    _check_weights(G, ctx)
    f = noise_shrink_factors(ctx)
    if G.ndim == 1:
        alpha = dft(G) * f
    else:
        alpha = dft(G, axis=0) * f[:, None]
    N = idft(alpha, axis=0)
    col_norm = np.linalg.norm(G, axis=0)
    if np.any(np.max(np.abs(N.imag), axis=0) > 1e-8 * np.maximum(col_norm, 1e-300)):
        raise FloatingPointError("noise prox: imaginary residue too large "
                                 "(are the weights symmetric?)")
    return N.real


def noise_prox(G, ctx: ProxContext) -> np.ndarray:
    """Solver entry point: scalar shrink for flat weights, FFT otherwise."""
    if ctx.weights.is_uniform:
        return (ctx.L_f / (ctx.L_f + 2.0 * ctx.mu * ctx.gamma)) * np.asarray(G, dtype=float)
    return noise_prox_fft(G, ctx)
