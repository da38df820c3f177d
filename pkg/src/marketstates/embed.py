"""Classical (Torgerson) multidimensional scaling."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError

log = logging.getLogger(__name__)

_ZERO_EIG = 1e-12  # relative to the largest |eigenvalue|


@dataclass(frozen=True)
class Embedding:
    coordinates: np.ndarray  # (n, D)
    eigenvalues_used: np.ndarray  # D largest, descending, unclamped
    stress: float
    negative_mass: float  # |sum of negative eigenvalues| / sum |eigenvalues|

    @property
    def dim(self) -> int:
        return self.coordinates.shape[1]


def classical_mds(dist, dim: int = 2) -> Embedding:
    """Embed a symmetric distance matrix into ``dim`` coordinates.

    Double-centres the squared distances, ``B = -1/2 J D^2 J``, and scales the
    top eigenvectors by the square root of their eigenvalues (negative ones
    clamped to zero, as are those below 1e-12 of the largest). Eigenvector signs are fixed so that the largest-magnitude
    component of each is positive, which makes the output deterministic.
    """
    d = np.asarray(dist, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValidationError(f"distance matrix must be square, got {d.shape}")
    if dim < 1 or dim > d.shape[0]:
        raise ValidationError(f"cannot embed {d.shape[0]} points in {dim} dimensions")
    scale = max(float(np.abs(d).max()), 1.0)
    if not np.allclose(d, d.T, rtol=0, atol=1e-12 * scale):
        raise ValidationError("distance matrix is not symmetric")
    if np.any(d < 0):
        raise ValidationError("distance matrix has negative entries")

    n = d.shape[0]
    d2 = d * d
    row = d2.mean(axis=1)
    b = -0.5 * (d2 - row[:, None] - row[None, :] + row.mean())
    b = 0.5 * (b + b.T)
    try:
        lam, vec = np.linalg.eigh(b)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"MDS eigendecomposition failed: {exc}") from exc
    order = np.argsort(lam)[::-1][:dim]
    lam_top, vec_top = lam[order], vec[:, order]
    pivot = np.argmax(np.abs(vec_top), axis=0)
    signs = np.sign(vec_top[pivot, np.arange(dim)])
    signs[signs == 0] = 1.0
    # roundoff-level eigenvalues would otherwise leak ~sqrt(1e-16) coordinates
    floor = _ZERO_EIG * max(float(np.abs(lam).max()), np.finfo(float).tiny)
    coords = vec_top * signs * np.sqrt(np.where(lam_top > floor, lam_top, 0.0))
    coords -= coords.mean(axis=0)

    total = np.abs(lam).sum()
    neg = float(-lam[lam < 0].sum() / total) if total > 0 else 0.0
    if neg > 0.05:
        log.info("MDS input is non-Euclidean: negative eigenvalue mass %.3f", neg)
    return Embedding(coords, lam_top, _stress(d, coords), neg)


def pairwise_distances(x: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - x[None, :, :]
    return np.sqrt((diff * diff).sum(axis=-1))


def _stress(d: np.ndarray, coords: np.ndarray) -> float:
    denom = float((d * d).sum())
    if denom == 0.0:
        return 0.0
    resid = d - pairwise_distances(coords)
    return float(np.sqrt((resid * resid).sum() / denom))
