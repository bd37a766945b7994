"""Accelerated proximal gradient solver with continuation.

Minimizes ``mu * g(A, E, N) + f(A, E, N)`` where

    g = ||A||_* + lam ||E||_1 + gamma ||C W^T N||_F^2
    f = 0.5 ||A + E + N - X||_F^2

while ``mu`` is decreased geometrically from ``mu0`` to ``mu_bar``. With
uniform weights the noise term is ``gamma ||N||_F^2`` and the problem is the
classic stable PCP.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .dataset import Decomposition, Diagnostics
from .prox import ProxContext, _svt, noise_prox, soft_threshold
from .spectral import dft
from .weights import WeightVector, uniform_weights

__all__ = [
    "SolverConfig",
    "default_lambda",
    "default_gamma",
    "spectral_norm",
    "momentum_point",
    "gradient_point",
    "objective",
    "k0_bound",
    "solve",
]

log = logging.getLogger(__name__)


def default_lambda(T: int, P: int) -> float:
    return 1.0 / math.sqrt(max(T, P))


def default_gamma(T: int, P: int) -> float:
    return 1.0 / (2.0 * math.sqrt(2.0 * math.log(T * P) * max(T, P)))


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters.

    ``lam`` and ``gamma`` left as ``None`` are filled from the matrix shape by
    :meth:`resolve`; ``weights=None`` means uniform weights (plain SPCP).
    """

    lam: float | None = None
    gamma: float | None = None
    eta: float = 0.9
    mu0_factor: float = 0.99
    mu_bar_factor: float = 1e-5
    L_f: float = 3.0
    max_iters: int = 1000
    tol: float = 1e-7
    weights: WeightVector | None = field(default=None, compare=False)

    def __post_init__(self):
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.gamma is not None and self.gamma <= 0:
            raise ValueError("gamma must be positive")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.L_f < 3:
            raise ValueError("L_f must be >= 3 for three blocks")
        if not 0 < self.mu_bar_factor < 1 or self.mu0_factor <= 0:
            raise ValueError("need mu0_factor > 0 and 0 < mu_bar_factor < 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def resolve(self, T: int, P: int) -> "SolverConfig":
        """Copy with ``lam``, ``gamma`` and ``weights`` filled in for a T x P input."""
        weights = self.weights if self.weights is not None else uniform_weights(T)
        if weights.T != T:
            raise ValueError(f"weights have length {weights.T}, expected T={T}")
        return replace(
            self,
            lam=self.lam if self.lam is not None else default_lambda(T, P),
            gamma=self.gamma if self.gamma is not None else default_gamma(T, P),
            weights=weights,
        )

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "lam", "gamma", "eta", "mu0_factor", "mu_bar_factor", "L_f",
            "max_iters", "tol")}
        w = self.weights
        d["weights"] = None if w is None else (
            "uniform" if w.spec is None and w.is_uniform else
            (w.spec.to_dict() if w.spec is not None else "custom"))
        return d


def spectral_norm(X) -> float:
    """Largest singular value."""
    X = np.asarray(X, dtype=float)
    if X.size == 0:
        return 0.0
    return float(np.linalg.norm(X, 2))


def momentum_point(cur, prev, t_k: float, t_prev: float) -> np.ndarray:
    """``cur + ((t_prev - 1) / t_k) * (cur - prev)``."""
    cur = np.asarray(cur, dtype=float)
    prev = np.asarray(prev, dtype=float)
    if cur.shape != prev.shape:
        raise ValueError(f"shape mismatch {cur.shape} vs {prev.shape}")
    w = (t_prev - 1.0) / t_k
    if w == 0.0:
        return cur.copy()
    return cur + w * (cur - prev)


def gradient_point(YA, YE, YN, X, L_f: float = 3.0):
    """Gradient step on ``f`` shared by all three blocks."""
    R = (YA + YE + YN - X) / L_f
    return YA - R, YE - R, YN - R


def objective(A, E, N, X, mu: float, lam: float, gamma: float,
              weights: WeightVector, nuclear: float | None = None) -> float:
    """``mu * g(A, E, N) + f(A, E, N)``.

    ``nuclear`` may carry a precomputed ``||A||_*``.
    """
    if nuclear is None:
        nuclear = float(np.sum(np.linalg.svd(A, compute_uv=False)))
    if weights.is_uniform:
        quad = float(np.sum(N * N))
    else:
        quad = float(np.sum((weights.c[:, None] * np.abs(dft(N, axis=0))) ** 2))
    g = nuclear + lam * float(np.sum(np.abs(E))) + gamma * quad
    R = A + E + N - X
    return mu * g + 0.5 * float(np.sum(R * R))


def k0_bound(mu0: float, mu_bar: float, eta: float) -> int:
    """Iteration after which ``mu_k`` has reached ``mu_bar``."""
    if not (mu0 > mu_bar > 0) or not 0 < eta < 1:
        raise ValueError("need mu0 > mu_bar > 0 and 0 < eta < 1")
    ratio = math.log(mu0 / mu_bar) / math.log(1.0 / eta)
    # guard against log round-off turning an exact integer into n + 1e-15
    r = round(ratio)
    if abs(ratio - r) < 1e-9:
        return int(r)
    return int(math.ceil(ratio))


def _rel_change(new: np.ndarray, old: np.ndarray) -> float:
    return float(np.linalg.norm(new - old) / max(1.0, np.linalg.norm(old)))


def solve(X, cfg: SolverConfig | None = None,
          callback: Callable[[int, np.ndarray, np.ndarray, np.ndarray], None] | None = None,
          ) -> Decomposition:
    """Decompose ``X`` (already noise-normalized) into ``A + E + N``.

    Parameters
    ----------
    X : array_like, shape (T, P)
    cfg : SolverConfig, optional
        Defaults to plain SPCP with the standard parameters.
    callback : callable, optional
        Called as ``callback(k, A, E, N)`` with the iterate produced by
        iteration ``k`` (1-based). The arrays must not be modified.

    Returns
    -------
    Decomposition
        The iterate with the lowest objective at ``mu_bar``. When
        ``max_iters`` is reached first, ``diagnostics.converged`` is False.
    """
    X = getattr(X, "data", X)
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite entries")
    T, P = X.shape
    cfg = (cfg or SolverConfig()).resolve(T, P)
    lam, gamma, L_f, w = cfg.lam, cfg.gamma, cfg.L_f, cfg.weights

    norm_X = spectral_norm(X)
    zeros = np.zeros_like(X)
    if norm_X == 0.0:
        diag = Diagnostics(iterations=1, converged=True, final_mu=0.0,
                           residual_fro=0.0, objective_trace=[0.0], mu_trace=[0.0])
        if callback is not None:
            callback(1, zeros, zeros, zeros)
        return Decomposition(zeros, zeros.copy(), zeros.copy(), diag)

    mu0 = cfg.mu0_factor * norm_X
    mu_bar = cfg.mu_bar_factor * mu0
    mu = mu0

    A = A_prev = zeros
    E = E_prev = zeros
    N = N_prev = zeros
    t_k = t_prev = 1.0

    obj_trace: list[float] = []
    mu_trace: list[float] = []
    best = None
    best_obj = math.inf
    converged = False
    k = 0
    while k < cfg.max_iters:
        YA = momentum_point(A, A_prev, t_k, t_prev)
        YE = momentum_point(E, E_prev, t_k, t_prev)
        YN = momentum_point(N, N_prev, t_k, t_prev)
        GA, GE, GN = gradient_point(YA, YE, YN, X, L_f)

        A_new, s_new = _svt(GA, mu / L_f)
        E_new = soft_threshold(GE, lam * mu / L_f)
        N_new = noise_prox(GN, ProxContext(mu=mu, lam=lam, gamma=gamma,
                                           weights=w, L_f=L_f))
        k += 1
        if not (np.all(np.isfinite(A_new)) and np.all(np.isfinite(E_new))
                and np.all(np.isfinite(N_new))):
            raise FloatingPointError(f"non-finite iterate at iteration {k}")

        F = objective(A_new, E_new, N_new, X, mu_bar, lam, gamma, w,
                      nuclear=float(np.sum(s_new)))
        obj_trace.append(F)
        mu_trace.append(mu)
        if callback is not None:
            callback(k, A_new, E_new, N_new)

        change = max(_rel_change(A_new, A), _rel_change(E_new, E),
                     _rel_change(N_new, N))
        at_floor = mu <= mu_bar

        A_prev, A = A, A_new
        E_prev, E = E, E_new
        N_prev, N = N, N_new
        if F < best_obj:
            best_obj, best = F, (A, E, N)

        t_prev, t_k = t_k, (1.0 + math.sqrt(4.0 * t_k * t_k + 1.0)) / 2.0
        mu = max(cfg.eta * mu, mu_bar)

        if at_floor and change < cfg.tol:
            converged = True
            break

    if not converged:
        log.warning("solver stopped at max_iters=%d without converging", cfg.max_iters)
    A, E, N = best
    residual = float(np.linalg.norm(A + E + N - X) / np.linalg.norm(X))
    diag = Diagnostics(iterations=k, converged=converged, final_mu=mu_trace[-1],
                       residual_fro=residual, objective_trace=obj_trace,
                       mu_trace=mu_trace)
    return Decomposition(A, E, N, diag)
