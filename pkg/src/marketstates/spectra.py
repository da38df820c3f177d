"""Eigenvalue spectra of correlation frames."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corrmat import CorrelationFrame, mean_correlation, power_map
from .errors import NumericalError, ValidationError


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray  # ascending
    zero_count: int
    lambda_max: float
    emerging: np.ndarray | None  # only for power-mapped frames


def eigenvalues(matrix: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.eigvalsh(matrix)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"symmetric eigensolver failed: {exc}") from exc


def spectrum(frame: CorrelationFrame, tol: float = 1e-10, epoch_length: int | None = None) -> Spectrum:
    """Full spectrum of a frame.

    ``zero_count`` counts eigenvalues with ``|lambda| < tol``. For a power-mapped
    frame the emerging spectrum is the ``N - M + 1`` eigenvalues of smallest
    magnitude, where ``M`` is the epoch length (taken from the frame's epoch
    unless given). It is left empty when ``M >= N``: no degenerate block exists.
    """
    c = frame.matrix
    if not np.allclose(c, c.T, rtol=0, atol=1e-12):
        raise ValidationError("correlation frame is not symmetric")
    lam = eigenvalues(c)
    zero_count = int(np.count_nonzero(np.abs(lam) < tol))
    emerging = None
    if frame.epsilon > 0:
        m = epoch_length if epoch_length is not None else (frame.epoch.length if frame.epoch else None)
        if m is None:
            raise ValidationError("epoch length unknown; pass epoch_length for the emerging spectrum")
        size = max(c.shape[0] - m + 1, 0)
        idx = np.sort(np.argsort(np.abs(lam), kind="stable")[:size])
        emerging = lam[idx]
    return Spectrum(lam, zero_count, float(lam[-1]), emerging)


def epsilon_sweep(frame: CorrelationFrame, eps_list, mode: str = "all") -> list[tuple[float, float, float]]:
    """``(epsilon, lambda_max, mu)`` of the power-mapped frame for each epsilon."""
    if frame.epsilon != 0.0:
        raise ValidationError("epsilon sweep needs a raw frame")
    out = []
    for eps in eps_list:
        mapped = power_map(frame, float(eps))
        out.append((float(eps), float(eigenvalues(mapped.matrix)[-1]), mean_correlation(mapped, mode)))
    return out
