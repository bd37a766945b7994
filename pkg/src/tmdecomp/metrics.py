"""Evaluation of a decomposition and side-by-side comparison of two methods."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .dataset import Decomposition
from .spectral import SpectralDensity, aggregate_density

__all__ = [
    "EvalReport",
    "Comparison",
    "numerical_rank",
    "pearson_abs",
    "spectral_flatness",
    "evaluate",
    "compare_reports",
]


def numerical_rank(M, rel_tol: float = 1e-8) -> int:
    """Number of singular values above ``rel_tol * sigma_max``."""
    s = np.linalg.svd(np.atleast_2d(np.asarray(M, dtype=float)), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def pearson_abs(a, n) -> float:
    """``|corr(a, n)|``; 0.0 (with a warning) if either input is constant."""
    a = np.asarray(a, dtype=float)
    n = np.asarray(n, dtype=float)
    if a.shape != n.shape:
        raise ValueError(f"length mismatch {a.shape} vs {n.shape}")
    a = a - a.mean()
    n = n - n.mean()
    den = math.sqrt(float(a @ a) * float(n @ n))
    if den == 0.0:
        warnings.warn("pearson_abs: constant input, returning 0", RuntimeWarning,
                      stacklevel=2)
        return 0.0
    return min(1.0, abs(float(a @ n)) / den)


def _pearson_columns(A: np.ndarray, N: np.ndarray) -> tuple[np.ndarray, list[int]]:
    out = np.empty(A.shape[1])
    degenerate = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        for j in range(A.shape[1]):
            before = len(caught)
            out[j] = pearson_abs(A[:, j], N[:, j])
            if len(caught) > before:
                degenerate.append(j + 1)
    return out, degenerate


def spectral_flatness(phi, exclude_dc: bool = True) -> float:
    """Geometric over arithmetic mean of a power spectrum (1 = white).

    An all-zero spectrum is reported as 1.0 with a warning.
    """
    if isinstance(phi, SpectralDensity):
        phi = phi.phi
    phi = np.asarray(phi, dtype=float)
    if np.any(phi < 0):
        raise ValueError("power spectrum must be nonnegative")
    p = phi[1:] if exclude_dc else phi
    mean = float(np.mean(p))
    if mean == 0.0:
        warnings.warn("spectral_flatness: all-zero spectrum", RuntimeWarning,
                      stacklevel=2)
        return 1.0
    if np.any(p == 0):
        return 0.0
    gmean = math.exp(float(np.mean(np.log(p))))
    return min(1.0, gmean / mean)


@dataclass
class EvalReport:
    rank_A: int
    fro_A: float
    fro_E: float
    fro_N: float
    pearson_abs: np.ndarray
    spectral_flatness_N: float
    peak_spectra: dict[int, float]
    degenerate_flows: list[int] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "rank_A": self.rank_A,
            "fro_A": self.fro_A,
            "fro_E": self.fro_E,
            "fro_N": self.fro_N,
            "pearson_abs": [float(x) for x in self.pearson_abs],
            "spectral_flatness_N": self.spectral_flatness_N,
            "peak_spectra": {str(t): v for t, v in self.peak_spectra.items()},
            "degenerate_flows": list(self.degenerate_flows),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(
            rank_A=int(d["rank_A"]), fro_A=float(d["fro_A"]),
            fro_E=float(d["fro_E"]), fro_N=float(d["fro_N"]),
            pearson_abs=np.asarray(d["pearson_abs"], dtype=float),
            spectral_flatness_N=float(d["spectral_flatness_N"]),
            peak_spectra={int(t): float(v) for t, v in d["peak_spectra"].items()},
            degenerate_flows=list(d.get("degenerate_flows", [])),
        )


def evaluate(d: Decomposition, s1=(), rank_tol: float = 1e-8) -> EvalReport:
    """Metrics for one decomposition; ``s1`` lists the positions to report."""
    Phi = aggregate_density(d.N)
    pear, degenerate = _pearson_columns(d.A, d.N)
    return EvalReport(
        rank_A=numerical_rank(d.A, rank_tol),
        fro_A=float(np.linalg.norm(d.A)),
        fro_E=float(np.linalg.norm(d.E)),
        fro_N=float(np.linalg.norm(d.N)),
        pearson_abs=pear,
        spectral_flatness_N=spectral_flatness(Phi),
        peak_spectra={int(t): Phi.at(int(t)) for t in s1},
        degenerate_flows=degenerate,
    )


@dataclass
class Comparison:
    """``fdr`` relative to ``spcp``."""

    flatness_gain: float
    rank_ratio: float
    fro_ratio: float
    frac_pearson_decreased: float
    median_pearson_fdr: float
    median_pearson_spcp: float
    peak_ratio: dict[int, float]

    def to_dict(self) -> dict:
        return {
            "flatness_gain": self.flatness_gain,
            "rank_ratio": self.rank_ratio,
            "fro_ratio": self.fro_ratio,
            "fro_ratio_str": f"{self.fro_ratio:.4f}",
            "frac_pearson_decreased": self.frac_pearson_decreased,
            "median_pearson_fdr": self.median_pearson_fdr,
            "median_pearson_spcp": self.median_pearson_spcp,
            "peak_ratio": {str(t): r for t, r in self.peak_ratio.items()},
        }


def _ratio(a: float, b: float) -> float:
    if b == 0:
        return 1.0 if a == 0 else math.inf
    return a / b


def compare_reports(fdr: EvalReport, spcp: EvalReport) -> Comparison:
    if fdr.pearson_abs.shape != spcp.pearson_abs.shape:
        raise ValueError("reports describe matrices with different flow counts")
    common = sorted(set(fdr.peak_spectra) & set(spcp.peak_spectra))
    return Comparison(
        flatness_gain=fdr.spectral_flatness_N - spcp.spectral_flatness_N,
        rank_ratio=_ratio(fdr.rank_A, spcp.rank_A),
        fro_ratio=_ratio(fdr.fro_A, spcp.fro_A),
        frac_pearson_decreased=float(np.mean(fdr.pearson_abs < spcp.pearson_abs)),
        median_pearson_fdr=float(np.median(fdr.pearson_abs)),
        median_pearson_spcp=float(np.median(spcp.pearson_abs)),
        peak_ratio={t: _ratio(fdr.peak_spectra[t], spcp.peak_spectra[t]) for t in common},
    )
