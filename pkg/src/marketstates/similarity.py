"""Stock distance transform and the inter-frame similarity matrix."""

from __future__ import annotations

import csv
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corrmat import CorrelationFrame
from .errors import ValidationError

CACHE_MAGIC = b"ZETA"
_HEADER = struct.Struct("<4sId")  # magic, n, epsilon -> 16 bytes
_CHUNK = 128


@dataclass(frozen=True)
class DistanceMatrix:
    matrix: np.ndarray
    frame: CorrelationFrame | None = None


@dataclass(frozen=True)
class SimilarityMatrix:
    matrix: np.ndarray
    end_dates: list
    epsilon: float


def stock_distances(frame: CorrelationFrame) -> DistanceMatrix:
    """``d_ij = sqrt(2 (1 - C_ij))``."""
    c = frame.matrix
    if np.any(c > 1.0) or np.any(c < -1.0):
        raise ValidationError("correlation entries outside [-1, 1]")
    d = np.sqrt(2.0 * (1.0 - c))
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d, frame)


def _check_pair(a: CorrelationFrame, b: CorrelationFrame):
    if a.matrix.shape != b.matrix.shape:
        raise ValidationError(f"frame shapes differ: {a.matrix.shape} vs {b.matrix.shape}")
    if a.epsilon != b.epsilon:
        raise ValidationError(f"frames mapped with different epsilon: {a.epsilon} vs {b.epsilon}")


def _normalizer(n: int, mode: str) -> float:
    if mode == "all":
        return float(n * n)
    if mode == "offdiag":
        return float(n * (n - 1))
    raise ValueError(f"unknown similarity mode {mode!r}")


def _pack(frame: CorrelationFrame) -> tuple[np.ndarray, np.ndarray]:
    c = frame.matrix
    return c[np.triu_indices(c.shape[0], k=1)], np.diagonal(c)


def _row(upper, diag, p, norm, diag_weight) -> np.ndarray:
    """zeta(p, q) for q > p. Each entry is reduced over a single contiguous row, so the
    result does not depend on how rows are batched."""
    out = np.empty(upper.shape[0] - p - 1)
    for lo in range(p + 1, upper.shape[0], _CHUNK):
        hi = min(lo + _CHUNK, upper.shape[0])
        s = 2.0 * np.abs(upper[lo:hi] - upper[p]).sum(axis=1)
        s += diag_weight * np.abs(diag[lo:hi] - diag[p]).sum(axis=1)
        out[lo - p - 1 : hi - p - 1] = s / norm
    return out


def frame_similarity(a: CorrelationFrame, b: CorrelationFrame, mode: str = "all") -> float:
    """Mean absolute elementwise difference between two frames."""
    _check_pair(a, b)
    ua, da = _pack(a)
    ub, db = _pack(b)
    upper = np.vstack([ua, ub])
    diag = np.vstack([da, db])
    n = a.n
    return float(_row(upper, diag, 0, _normalizer(n, mode), 1.0 if mode == "all" else 0.0)[0])


def similarity_matrix(frames: list[CorrelationFrame], mode: str = "all", workers: int = 1) -> SimilarityMatrix:
    if not frames:
        raise ValidationError("no frames")
    for f in frames[1:]:
        _check_pair(frames[0], f)
    packed = [_pack(f) for f in frames]
    upper = np.vstack([p[0] for p in packed])
    diag = np.vstack([p[1] for p in packed])
    n_frames, n = len(frames), frames[0].n
    norm = _normalizer(n, mode)
    dw = 1.0 if mode == "all" else 0.0

    def job(p):
        return _row(upper, diag, p, norm, dw)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(job, range(n_frames)))
    else:
        rows = [job(p) for p in range(n_frames)]
    z = np.zeros((n_frames, n_frames))
    for p, r in enumerate(rows):
        z[p, p + 1 :] = r
        z[p + 1 :, p] = r
    return SimilarityMatrix(z, [f.end_date for f in frames], frames[0].epsilon)


def write_similarity_csv(sim: SimilarityMatrix, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["" if d is None else d for d in sim.end_dates])
        for row in sim.matrix:
            w.writerow([repr(float(x)) for x in row])


def write_similarity_cache(sim: SimilarityMatrix, path) -> None:
    n = sim.matrix.shape[0]
    with Path(path).open("wb") as fh:
        fh.write(_HEADER.pack(CACHE_MAGIC, n, float(sim.epsilon)))
        fh.write(np.ascontiguousarray(sim.matrix, dtype="<f8").tobytes())


def read_similarity_cache(path, end_dates=None) -> SimilarityMatrix:
    raw = Path(path).read_bytes()
    if len(raw) < _HEADER.size:
        raise ValidationError(f"{path}: truncated similarity cache")
    magic, n, eps = _HEADER.unpack_from(raw)
    if magic != CACHE_MAGIC:
        raise ValidationError(f"{path}: bad magic {magic!r}")
    body = raw[_HEADER.size :]
    if len(body) != 8 * n * n:
        raise ValidationError(f"{path}: expected {n}x{n} doubles, found {len(body)} bytes")
    z = np.frombuffer(body, dtype="<f8").reshape(n, n).astype(float)
    if end_dates is None:
        end_dates = [None] * n
    return SimilarityMatrix(z, list(end_dates), eps)
