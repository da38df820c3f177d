"""Epoch correlation matrices, the power map, and scalar frame descriptors."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .panel import EpochWindow, ReturnPanel


@dataclass(frozen=True)
class CorrelationFrame:
    matrix: np.ndarray
    epoch: EpochWindow | None = None
    epsilon: float = 0.0

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def end_date(self):
        return self.epoch.end_date if self.epoch is not None else None


@dataclass
class FrameDescriptor:
    end_date: str | None
    mu: float
    gini: float  # nan when undefined
    lambda_max: float = math.nan


def pearson_frame(returns: ReturnPanel, epoch: EpochWindow) -> CorrelationFrame:
    """Pearson correlations of the in-epoch returns (biased moment form)."""
    block = returns.returns[:, epoch.start_index : epoch.end_index + 1]
    return CorrelationFrame(pearson_matrix(block, returns.tickers, epoch), epoch, 0.0)


def pearson_matrix(block: np.ndarray, tickers=None, epoch=None) -> np.ndarray:
    m = block.shape[1]
    centered = block - block.mean(axis=1, keepdims=True)
    var = np.einsum("ij,ij->i", centered, centered) / m
    flat = var <= 0.0
    if flat.any():
        names = [tickers[i] if tickers else str(i) for i in np.flatnonzero(flat)]
        where = f" in epoch ending {epoch.end_date}" if epoch is not None and epoch.end_date else ""
        raise NumericalError(f"zero return variance{where} for: {', '.join(names)}")
    sd = np.sqrt(var)
    c = (centered @ centered.T) / m / np.outer(sd, sd)
    c = 0.5 * (c + c.T)
    np.clip(c, -1.0, 1.0, out=c)
    np.fill_diagonal(c, 1.0)
    c.setflags(write=False)
    return c


def power_map(frame: CorrelationFrame, epsilon: float) -> CorrelationFrame:
    """Elementwise ``sign(C) * |C|**(1 + epsilon)``; raw frames only."""
    if frame.epsilon != 0.0:
        raise ValidationError(f"frame already power-mapped with epsilon={frame.epsilon}; map raw frames only")
    if epsilon < 0:
        raise ValidationError(f"epsilon must be non-negative, got {epsilon}")
    if epsilon == 0:
        return CorrelationFrame(frame.matrix, frame.epoch, 0.0)
    c = frame.matrix
    out = np.sign(c) * np.abs(c) ** (1.0 + epsilon)
    out.setflags(write=False)
    return CorrelationFrame(out, frame.epoch, float(epsilon))


def mean_correlation(frame: CorrelationFrame, mode: str = "all") -> float:
    """Average coefficient. ``mode="all"`` averages all N^2 entries,
    ``"offdiag"`` only the N(N-1) off-diagonal ones."""
    c = frame.matrix
    n = c.shape[0]
    if mode == "all":
        return float(c.sum() / (n * n))
    if mode == "offdiag":
        return float((c.sum() - np.trace(c)) / (n * (n - 1)))
    raise ValueError(f"unknown mean-correlation mode {mode!r}")


def upper_coefficients(matrix: np.ndarray) -> np.ndarray:
    iu = np.triu_indices(matrix.shape[0], k=1)
    return matrix[iu]


def gini(frame: CorrelationFrame) -> float:
    """Gini coefficient of the upper-triangle coefficients; nan if their mean is not positive."""
    x = np.sort(upper_coefficients(frame.matrix))
    m = x.size
    mean = x.mean()
    if not mean > 0:
        return math.nan
    # sum_{a,b} |x_a - x_b| = 2 * sum_i (2i - m - 1) x_(i) over sorted x
    i = np.arange(1, m + 1)
    total = 2.0 * np.dot(2 * i - m - 1, x)
    return float(total / (2.0 * m * m * mean))


def describe(frame: CorrelationFrame, mode: str = "all") -> FrameDescriptor:
    lam = float(np.linalg.eigvalsh(frame.matrix)[-1])
    return FrameDescriptor(frame.end_date, mean_correlation(frame, mode), gini(frame), lam)


def compute_frames(returns: ReturnPanel, windows: list[EpochWindow], workers: int = 1) -> list[CorrelationFrame]:
    if workers <= 1:
        return [pearson_frame(returns, w) for w in windows]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(lambda w: pearson_frame(returns, w), windows))
