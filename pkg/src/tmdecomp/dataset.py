"""Traffic matrices on disk and in memory.

CSV files hold one time sample per row and one OD flow per column, with an
optional header row of flow ids. The binary layout is an 8-byte header
(``T`` and ``P`` as little-endian uint32) followed by ``T * P`` little-endian
float64 values in column-major order.
"""

from __future__ import annotations

import csv
import json
import logging
import math
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "MatrixFormatError",
    "TrafficMatrix",
    "NoiseScales",
    "Diagnostics",
    "Decomposition",
    "load_matrix",
    "save_matrix",
    "read_csv_matrix",
    "write_csv_matrix",
    "estimate_noise_scales",
    "normalize",
    "denormalize",
    "save_decomposition",
    "load_decomposition",
]

log = logging.getLogger(__name__)

MAD_TO_SIGMA = 0.6745
_HEADER = struct.Struct("<II")


class MatrixFormatError(ValueError):
    """Malformed matrix file."""


@dataclass(frozen=True)
class TrafficMatrix:
    data: np.ndarray
    interval_seconds: int = 300
    flow_ids: tuple[str, ...] | None = None

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise ValueError("traffic matrix must be 2-D")
        T, P = data.shape
        if T < 2 or P < 1:
            raise ValueError(f"need T >= 2 and P >= 1, got {T}x{P}")
        if not np.all(np.isfinite(data)):
            r, c = np.argwhere(~np.isfinite(data))[0]
            raise ValueError(f"non-finite entry at row {r + 1}, column {c + 1}")
        if int(self.interval_seconds) != self.interval_seconds or self.interval_seconds <= 0:
            raise ValueError("interval_seconds must be a positive integer")
        ids = self.flow_ids
        if ids is None:
            ids = tuple(str(j + 1) for j in range(P))
        ids = tuple(str(i) for i in ids)
        if len(ids) != P:
            raise ValueError(f"{len(ids)} flow ids for {P} columns")
        if len(set(ids)) != P:
            raise ValueError("flow ids must be distinct")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "interval_seconds", int(self.interval_seconds))
        object.__setattr__(self, "flow_ids", ids)

    @property
    def T(self) -> int:
        return self.data.shape[0]

    @property
    def P(self) -> int:
        return self.data.shape[1]

    def with_data(self, data) -> "TrafficMatrix":
        return TrafficMatrix(data, self.interval_seconds, self.flow_ids)


@dataclass(frozen=True)
class NoiseScales:
    sigma: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        if s.ndim != 1:
            raise ValueError("sigma must be a vector")
        if not np.all(np.isfinite(s)) or np.any(s <= 0):
            raise ValueError("every sigma must be finite and positive")
        object.__setattr__(self, "sigma", s)


@dataclass
class Diagnostics:
    iterations: int
    converged: bool
    final_mu: float
    residual_fro: float
    objective_trace: list[float] = field(default_factory=list)
    mu_trace: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "final_mu": float(self.final_mu),
            "residual_fro": float(self.residual_fro),
            "objective_trace": [float(x) for x in self.objective_trace],
            "mu_trace": [float(x) for x in self.mu_trace],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Diagnostics":
        return cls(iterations=d["iterations"], converged=d["converged"],
                   final_mu=d["final_mu"], residual_fro=d["residual_fro"],
                   objective_trace=list(d.get("objective_trace", [])),
                   mu_trace=list(d.get("mu_trace", [])))


@dataclass
class Decomposition:
    A: np.ndarray
    E: np.ndarray
    N: np.ndarray
    diagnostics: Diagnostics | None = None

    def __post_init__(self):
        self.A, self.E, self.N = (np.asarray(M, dtype=float)
                                  for M in (self.A, self.E, self.N))
        if not self.A.shape == self.E.shape == self.N.shape:
            raise ValueError("A, E and N must share a shape")
        for name in "AEN":
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} contains non-finite entries")

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape


# --------------------------------------------------------------------------
# CSV / binary I/O

def _parse_float(tok: str, row: int, col: int) -> float:
    try:
        x = float(tok)
    except ValueError:
        raise MatrixFormatError(
            f"non-numeric entry {tok!r} at row {row}, column {col}") from None
    if not math.isfinite(x):
        raise MatrixFormatError(f"non-finite entry {tok!r} at row {row}, column {col}")
    return x


def _is_number(tok: str) -> bool:
    try:
        float(tok)
    except ValueError:
        return False
    return True


def read_csv_matrix(path, header: bool | None = None):
    """Parse a numeric CSV into ``(array, header_tokens_or_None)``.

    With ``header=None`` the first row is taken as a header when none of
    its cells parse as numbers.
    """
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except (OSError, UnicodeDecodeError, csv.Error) as exc:
        raise MatrixFormatError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise MatrixFormatError(f"{path}: empty file")
    names = None
    first = [c.strip() for c in rows[0]]
    if header is None:
        header = not any(_is_number(c) for c in first)
    if header:
        names = first
        rows = rows[1:]
        if not rows:
            raise MatrixFormatError(f"{path}: header but no data rows")
    width = len(rows[0])
    data = np.empty((len(rows), width))
    offset = 2 if header else 1
    for i, row in enumerate(rows):
        if len(row) != width:
            raise MatrixFormatError(
                f"ragged row {i + offset}: {len(row)} columns, expected {width}")
        for j, tok in enumerate(row):
            data[i, j] = _parse_float(tok.strip(), i + offset, j + 1)
    if names is not None and len(names) != width:
        raise MatrixFormatError(f"header has {len(names)} names for {width} columns")
    return data, names


def write_csv_matrix(path, M, header=None) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", newline="") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        for row in M:
            fh.write(",".join(repr(float(x)) for x in row) + "\n")


def _read_binary(path) -> np.ndarray:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise MatrixFormatError(f"cannot read {path}: {exc}") from exc
    if len(raw) < _HEADER.size:
        raise MatrixFormatError(f"{path}: truncated header")
    T, P = _HEADER.unpack_from(raw)
    expected = _HEADER.size + 8 * T * P
    if len(raw) != expected:
        raise MatrixFormatError(
            f"{path}: {len(raw)} bytes, expected {expected} for {T}x{P}")
    flat = np.frombuffer(raw, dtype="<f8", offset=_HEADER.size)
    data = flat.reshape((T, P), order="F").astype(float)
    bad = np.argwhere(~np.isfinite(data))
    if bad.size:
        r, c = bad[0]
        raise MatrixFormatError(f"non-finite entry at row {r + 1}, column {c + 1}")
    return data


def _write_binary(path, M: np.ndarray) -> None:
    T, P = M.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(T, P))
        fh.write(np.asarray(M, dtype="<f8").tobytes(order="F"))


def load_matrix(path, format: str = "csv", interval_seconds: int = 300,
                header: bool | None = None) -> TrafficMatrix:
    """Load a traffic matrix; raises :class:`MatrixFormatError` on bad input."""
    if format == "csv":
        data, names = read_csv_matrix(path, header=header)
    elif format == "binary":
        data, names = _read_binary(path), None
    else:
        raise ValueError(f"unknown format {format!r}")
    try:
        return TrafficMatrix(data, interval_seconds, names)
    except ValueError as exc:
        raise MatrixFormatError(f"{path}: {exc}") from exc


def save_matrix(tm: TrafficMatrix, path, format: str = "csv",
                header: bool = False) -> None:
    if format == "csv":
        write_csv_matrix(path, tm.data, tm.flow_ids if header else None)
    elif format == "binary":
        _write_binary(path, tm.data)
    else:
        raise ValueError(f"unknown format {format!r}")


# --------------------------------------------------------------------------
# noise normalization

def estimate_noise_scales(X, floor: float = 1e-8) -> NoiseScales:
    """Robust per-column white-noise scale from first differences.

    ``sigma_j = MAD(diff(X_j)) / (sqrt(2) * 0.6745)``. Differencing removes
    the slowly varying deterministic part and the median absolute deviation
    ignores isolated spikes. Columns whose estimate is zero are clamped to
    ``floor * max|X_j|`` (or ``floor`` for an all-zero column) with a warning.
    """
    data = np.asarray(getattr(X, "data", X), dtype=float)
    if data.ndim != 2 or data.shape[0] < 3:
        raise ValueError("need a 2-D matrix with at least 3 rows")
    d = np.diff(data, axis=0)
    mad = np.median(np.abs(d - np.median(d, axis=0)), axis=0)
    sigma = mad / (math.sqrt(2.0) * MAD_TO_SIGMA)
    peak = np.max(np.abs(data), axis=0)
    lo = floor * np.where(peak > 0, peak, 1.0)
    small = ~(sigma > lo)
    if np.any(small):
        warnings.warn(f"noise scale clamped to floor for columns "
                      f"{(np.flatnonzero(small) + 1).tolist()}", RuntimeWarning,
                      stacklevel=2)
        sigma = np.where(small, lo, sigma)
    return NoiseScales(sigma)


def _scale_columns(X, factors: np.ndarray, op):
    tm = X if isinstance(X, TrafficMatrix) else None
    data = np.asarray(getattr(X, "data", X), dtype=float)
    if data.ndim != 2 or data.shape[1] != factors.shape[0]:
        raise ValueError(f"{factors.shape[0]} scales for matrix of shape {data.shape}")
    out = op(data, factors[None, :])
    return tm.with_data(out) if tm is not None else out


def normalize(X, s: NoiseScales):
    """Divide column ``j`` by ``sigma_j``."""
    return _scale_columns(X, s.sigma, np.divide)


def denormalize(X, s: NoiseScales):
    """Multiply column ``j`` by ``sigma_j`` (inverse of :func:`normalize`)."""
    return _scale_columns(X, s.sigma, np.multiply)


# --------------------------------------------------------------------------
# decompositions

def save_decomposition(d: Decomposition, directory) -> None:
    """Write ``A.csv``, ``E.csv``, ``N.csv`` and ``diagnostics.json``."""
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for name in "AEN":
        write_csv_matrix(out / f"{name}.csv", getattr(d, name))
    diag = d.diagnostics or Diagnostics(0, False, 0.0, float("nan"))
    with open(out / "diagnostics.json", "w") as fh:
        json.dump(diag.to_dict(), fh, indent=2)
        fh.write("\n")


def load_decomposition(directory) -> Decomposition:
    src = Path(directory)
    mats = [read_csv_matrix(src / f"{name}.csv", header=False)[0] for name in "AEN"]
    diag = None
    if (src / "diagnostics.json").exists():
        with open(src / "diagnostics.json") as fh:
            diag = Diagnostics.from_dict(json.load(fh))
    return Decomposition(*mats, diagnostics=diag)
