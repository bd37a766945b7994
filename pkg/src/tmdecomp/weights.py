"""Frequency-domain weights ``c_1..c_T`` for the noise regularizer.

The unscaled profile is a symmetric decaying curve ``v`` plus an extra
penalty ``rho`` on a set of harmonic positions and their duals. A single
scale ``beta`` is then solved so that ``sum(c**2) == T``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .spectral import dual_position

__all__ = [
    "PAPER_T",
    "PAPER_S1A",
    "DEFAULT_PERIODS_HOURS",
    "WeightSpec",
    "WeightVector",
    "positions_from_periods",
    "default_s1a",
    "v",
    "build_weights",
    "uniform_weights",
    "s1_positions",
]

PAPER_T = 2016
PAPER_S1A = (8, 15, 29, 57, 113, 169)
DEFAULT_PERIODS_HOURS = (24.0, 12.0, 6.0, 3.0, 1.5, 1.0)


def positions_from_periods(periods_hours: Iterable[float], T: int,
                           interval_seconds: float = 300,
                           tol: float = 0.25) -> tuple[int, ...]:
    """Convert harmonic periods (hours) into 1-based DFT positions.

    A period maps to ``T * interval / (period * 3600) + 1``. Raises
    ``ValueError`` when that value is farther than ``tol`` from an integer
    or when the position falls outside ``[2, T // 2 + 1]``.
    """
    out = []
    for period in periods_hours:
        if period <= 0:
            raise ValueError(f"period must be positive, got {period}")
        exact = T * interval_seconds / (period * 3600.0) + 1
        pos = int(round(exact))
        if abs(exact - pos) > tol:
            raise ValueError(
                f"period {period}h falls at position {exact:.3f}, "
                f"not within {tol} of an integer position for T={T}")
        if not 2 <= pos <= T // 2 + 1:
            raise ValueError(
                f"period {period}h maps to position {pos}, outside "
                f"[2, {T // 2 + 1}] for T={T}")
        out.append(pos)
    return tuple(out)


def default_s1a(T: int, interval_seconds: float = 300) -> tuple[int, ...]:
    """Default penalized positions for length ``T``.

    For the weekly 5-minute layout this is exactly ``PAPER_S1A``. Otherwise
    the default diurnal periods are converted and the ones that do not land
    on a usable position are dropped.
    """
    if T == PAPER_T and interval_seconds == 300:
        return PAPER_S1A
    keep = []
    for period in DEFAULT_PERIODS_HOURS:
        try:
            keep.extend(positions_from_periods([period], T, interval_seconds))
        except ValueError:
            continue
    return tuple(sorted(set(keep)))


@dataclass(frozen=True)
class WeightSpec:
    """Recipe for the weight vector.

    ``s1a`` defaults to :func:`default_s1a` when left as ``None``.
    """

    T: int
    s1a: tuple[int, ...] | None = None
    rho: float = 2.0
    decay_scale: float = 200.0
    amplitude: float = 4.0
    offset: float = 1.0
    interval_seconds: float = 300

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be >= 1")
        s1a = default_s1a(self.T, self.interval_seconds) if self.s1a is None \
            else tuple(int(t) for t in self.s1a)
        object.__setattr__(self, "s1a", s1a)
        hi = self.T // 2 + 1
        bad = [t for t in s1a if not 2 <= t <= hi]
        if bad:
            raise ValueError(f"s1a positions {bad} outside [2, {hi}]")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.decay_scale <= 0:
            raise ValueError("decay_scale must be positive")
        if self.amplitude < 0 or self.offset <= 0:
            raise ValueError("need amplitude >= 0 and offset > 0")

    @property
    def s1(self) -> tuple[int, ...]:
        """``s1a`` together with the dual positions, sorted."""
        both = set(self.s1a) | {dual_position(t, self.T) for t in self.s1a}
        return tuple(sorted(both))

    def to_dict(self) -> dict:
        return {
            "T": self.T, "s1a": list(self.s1a), "rho": self.rho,
            "decay_scale": self.decay_scale, "amplitude": self.amplitude,
            "offset": self.offset, "interval_seconds": self.interval_seconds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WeightSpec":
        d = dict(d)
        if d.get("s1a") is not None:
            d["s1a"] = tuple(d["s1a"])
        return cls(**d)


@dataclass(frozen=True)
class WeightVector:
    """Diagonal of ``C`` and the scale ``beta`` that normalized it."""

    c: np.ndarray
    beta: float = 1.0
    spec: WeightSpec | None = field(default=None, compare=False)

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("weights must be a non-empty vector")
        if not np.all(np.isfinite(c)) or np.any(c <= 0):
            raise ValueError("weights must be finite and positive")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    @property
    def T(self) -> int:
        return self.c.shape[0]

    @property
    def is_uniform(self) -> bool:
        return bool(np.all(self.c == 1.0))

    def is_symmetric(self, rtol: float = 1e-12) -> bool:
        """``c_t == c_{T-t+2}`` for every ``t >= 2``."""
        tail = self.c[1:]
        return bool(np.allclose(tail, tail[::-1], rtol=rtol, atol=0))


def _profile(x, spec: WeightSpec) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    T = spec.T
    lower = x < T / 2 + 1
    dist = np.where(lower, x - 1, T - x + 1)
    return spec.amplitude * np.exp(-dist / spec.decay_scale) + spec.offset


def v(x, spec: WeightSpec):
    """Symmetric decaying profile evaluated at real ``x`` in ``[1, T]``."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 1) or np.any(arr > spec.T):
        raise ValueError(f"x outside [1, {spec.T}]")
    out = _profile(arr, spec)
    return float(out) if out.ndim == 0 else out


def build_weights(spec: WeightSpec) -> WeightVector:
    t = np.arange(1, spec.T + 1)
    w = _profile(t, spec)
    s1 = np.asarray(spec.s1, dtype=int)
    if s1.size:
        w[s1 - 1] += spec.rho
    beta = float(np.sqrt(spec.T / np.sum(w * w)))
    return WeightVector(beta * w, beta=beta, spec=spec)


def uniform_weights(T: int) -> WeightVector:
    """All-ones weights; the regularizer then reduces to ``||N||_F^2``."""
    if T < 1:
        raise ValueError("T must be >= 1")
    return WeightVector(np.ones(T), beta=1.0)


def s1_positions(weights: WeightVector | None, T: int,
                 fallback: Sequence[int] | None = None) -> tuple[int, ...]:
    """Penalized positions carried by ``weights`` (or a default set)."""
    if weights is not None and weights.spec is not None:
        return weights.spec.s1
    if fallback is not None:
        return tuple(sorted(set(fallback) | {dual_position(t, T) for t in fallback}))
    return WeightSpec(T).s1
