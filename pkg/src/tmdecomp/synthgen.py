"""Synthetic traffic with known low-rank, sparse and noise parts.

Randomness comes from ``numpy.random.default_rng(seed)`` (PCG64), drawn in a
fixed order, so a spec and seed pin the output bit for bit.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .dataset import Decomposition, TrafficMatrix

__all__ = ["DEFAULT_HARMONICS", "SynthSpec", "generate"]

# (period in hours, amplitude in units of the noise scale)
DEFAULT_HARMONICS = ((24.0, 8.0), (12.0, 4.0), (6.0, 2.0), (3.0, 1.0),
                     (1.5, 0.5), (1.0, 0.25))


@dataclass(frozen=True)
class SynthSpec:
    T: int = 2016
    P: int = 20
    rank_r: int = 4
    harmonics: tuple[tuple[float, float], ...] = DEFAULT_HARMONICS
    baseline: float = 20.0
    anomaly_density: float = 0.005
    anomaly_magnitude: float = 10.0
    noise_sigma: float | tuple[float, ...] = 1.0
    interval_seconds: int = 300
    seed: int = 0
    positive_fraction: float = field(default=0.9)

    def __post_init__(self):
        object.__setattr__(self, "harmonics",
                           tuple((float(p), float(a)) for p, a in self.harmonics))
        if not isinstance(self.noise_sigma, (int, float)):
            object.__setattr__(self, "noise_sigma",
                               tuple(float(s) for s in self.noise_sigma))
        if self.T < 2 or self.P < 1:
            raise ValueError("need T >= 2 and P >= 1")
        if not 1 <= self.rank_r <= min(self.T, self.P):
            raise ValueError(f"rank_r must lie in [1, {min(self.T, self.P)}]")
        if not 0 <= self.anomaly_density <= 1:
            raise ValueError("anomaly_density must lie in [0, 1]")
        if self.anomaly_magnitude < 0:
            raise ValueError("anomaly_magnitude must be nonnegative")
        if any(p <= 0 for p, _ in self.harmonics):
            raise ValueError("harmonic periods must be positive")
        sig = np.atleast_1d(np.asarray(self.noise_sigma, dtype=float))
        if sig.size not in (1, self.P) or np.any(sig < 0):
            raise ValueError("noise_sigma must be a nonnegative scalar or length-P vector")
        if not 0 <= self.positive_fraction <= 1:
            raise ValueError("positive_fraction must lie in [0, 1]")

    def sigma_vector(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.noise_sigma, dtype=float),
                               (self.P,)).copy()

    def to_dict(self) -> dict:
        d = asdict(self)
        d["harmonics"] = [list(h) for h in self.harmonics]
        if isinstance(self.noise_sigma, tuple):
            d["noise_sigma"] = list(self.noise_sigma)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        d = dict(d)
        d["harmonics"] = tuple(tuple(h) for h in d.get("harmonics", DEFAULT_HARMONICS))
        if isinstance(d.get("noise_sigma"), list):
            d["noise_sigma"] = tuple(d["noise_sigma"])
        return cls(**d)


def _time_profiles(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    hours = np.arange(spec.T) * spec.interval_seconds / 3600.0
    U = np.empty((spec.T, spec.rank_r))
    for i in range(spec.rank_r):
        offset = spec.baseline * rng.uniform(0.5, 1.5)
        u = np.full(spec.T, offset)
        for period, amp in spec.harmonics:
            scale = rng.uniform(0.5, 1.5)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            u += amp * scale * np.cos(2.0 * np.pi * hours / period + phase)
        U[:, i] = u
    return U


def generate(spec: SynthSpec) -> tuple[TrafficMatrix, Decomposition]:
    """Draw ``X = A* + E* + N*`` and return it with the ground truth.

    ``A*`` is a sum of ``rank_r`` rank-one terms (a smooth diurnal time
    profile times nonnegative flow loadings normalized to mean one). ``E*``
    has exactly ``round(density * T * P)`` nonzero entries of size
    ``magnitude * (1 + |z|)``, positive with probability ``positive_fraction``.
    ``N*`` is Gaussian white noise with per-column scale ``noise_sigma``.
    """
    rng = np.random.default_rng(spec.seed)
    T, P = spec.T, spec.P

    U = _time_profiles(spec, rng)
    V = rng.uniform(0.0, 1.0, size=(P, spec.rank_r))
    V /= V.mean(axis=0, keepdims=True)
    A = U @ V.T / spec.rank_r

    n_anom = int(round(spec.anomaly_density * T * P))
    E = np.zeros((T, P))
    if n_anom:
        idx = rng.choice(T * P, size=n_anom, replace=False)
        sizes = spec.anomaly_magnitude * (1.0 + np.abs(rng.standard_normal(n_anom)))
        signs = np.where(rng.uniform(size=n_anom) < spec.positive_fraction, 1.0, -1.0)
        E.flat[idx] = signs * sizes

    N = rng.standard_normal((T, P)) * spec.sigma_vector()[None, :]

    X = TrafficMatrix(A + E + N, interval_seconds=spec.interval_seconds)
    return X, Decomposition(A, E, N)
