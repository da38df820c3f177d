"""Ordered market states and their Markov-chain dynamics."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import networkx as nx
import numpy as np

from .errors import NumericalError, ValidationError

log = logging.getLogger(__name__)

ROW_SUM_TOL = 5e-3  # published tables are rounded to three decimals


@dataclass(frozen=True)
class StateModel:
    k: int
    state_of_epoch: np.ndarray  # 0-based; state 0 calmest, k-1 critical
    state_mean_corr: np.ndarray
    representative_frame: list  # per-state elementwise mean matrix
    cluster_to_state: dict


@dataclass(frozen=True)
class TransitionMatrix:
    W: np.ndarray
    counts: np.ndarray
    zero_rows: tuple  # states never observed as the first of a pair


@dataclass(frozen=True)
class StationaryDistribution:
    P0: np.ndarray
    method: str  # "linear" or "power"


@dataclass(frozen=True)
class PrecursorEntry:
    state: int
    transition: float  # W[state, critical]
    joint: float | None  # counts[state, critical] / total pairs


def state_names(k: int) -> list[str]:
    return [f"S{i + 1}" for i in range(k)]


def order_states(labels, mu, matrices=None) -> StateModel:
    """Relabel clusters so that mean correlation increases with state index.

    ``mu`` is the per-epoch mean correlation. Clusters whose means agree to
    1e-12 are ordered by their earliest member epoch.
    """
    labels = np.asarray(labels)
    mu = np.asarray(mu, dtype=float)
    if labels.shape != mu.shape:
        raise ValidationError("labels and mean correlations differ in length")
    clusters = sorted(set(labels.tolist()))
    if len(clusters) < 2:
        raise ValidationError("need at least two clusters to order states")
    means = {c: float(mu[labels == c].mean()) for c in clusters}
    first = {c: int(np.flatnonzero(labels == c)[0]) for c in clusters}
    order = sorted(clusters, key=lambda c: (means[c], first[c]))
    for a, b in zip(order, order[1:]):
        if abs(means[a] - means[b]) <= 1e-12:
            log.warning("clusters %s and %s tie on mean correlation; ordered by first epoch", a, b)
    mapping = {c: i for i, c in enumerate(order)}
    seq = np.array([mapping[c] for c in labels.tolist()], dtype=int)
    reps = []
    if matrices is not None:
        for c in order:
            members = [matrices[i] for i in np.flatnonzero(labels == c)]
            reps.append(np.mean(members, axis=0))
    return StateModel(
        k=len(order),
        state_of_epoch=seq,
        state_mean_corr=np.array([means[c] for c in order]),
        representative_frame=reps,
        cluster_to_state=mapping,
    )


def transition_matrix(seq, k: int | None = None) -> TransitionMatrix:
    """Row-normalised counts of consecutive pairs; rows with no data stay zero."""
    seq = np.asarray(seq, dtype=int)
    if seq.size < 2:
        raise ValidationError("state sequence needs at least two epochs")
    if seq.min() < 0:
        raise ValidationError("state indices must be non-negative")
    k = int(seq.max()) + 1 if k is None else k
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (seq[:-1], seq[1:]), 1)
    rows = counts.sum(axis=1)
    W = np.zeros((k, k))
    nz = rows > 0
    W[nz] = counts[nz] / rows[nz, None]
    zero_rows = tuple(int(i) for i in np.flatnonzero(~nz))
    if zero_rows:
        log.warning("states never followed by another epoch: %s", zero_rows)
    return TransitionMatrix(W, counts, zero_rows)


def _class_structure(W: np.ndarray):
    g = nx.DiGraph()
    k = W.shape[0]
    g.add_nodes_from(range(k))
    g.add_edges_from((i, j) for i in range(k) for j in range(k) if W[i, j] > 0)
    classes = [sorted(c) for c in nx.strongly_connected_components(g)]
    closed = [sorted(c) for c in nx.attracting_components(g)]
    return g, sorted(classes), sorted(closed)


def _describe(classes, closed) -> str:
    fmt = lambda cs: ", ".join("{" + ",".join(f"S{i + 1}" for i in c) + "}" for c in cs)
    return f"communicating classes {fmt(classes)}; closed {fmt(closed)}"


def stationary_distribution(W, row_tol: float = ROW_SUM_TOL, max_iter: int = 1_000_000,
                            tol: float = 1e-14) -> StationaryDistribution:
    """Solve ``P = W^T P`` with ``sum(P) = 1``.

    Rows summing to 1 within ``row_tol`` are renormalised first. Irreducible
    aperiodic chains are solved directly; chains with transient states or
    periodicity fall back to power iteration from the uniform vector. Several
    closed classes, zero rows and non-convergence raise ``NumericalError``.
    """
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValidationError(f"transition matrix must be square, got {W.shape}")
    if np.any(W < 0):
        raise ValidationError("transition matrix has negative entries")
    sums = W.sum(axis=1)
    if np.any(sums == 0):
        zero = [f"S{i + 1}" for i in np.flatnonzero(sums == 0)]
        raise NumericalError(f"no outgoing transitions from {', '.join(zero)}; chain is reducible")
    if np.any(np.abs(sums - 1) > row_tol):
        raise ValidationError(f"rows do not sum to 1 within {row_tol}: {sums}")
    W = W / sums[:, None]
    k = W.shape[0]

    g, classes, closed = _class_structure(W)
    if len(closed) > 1:
        raise NumericalError("stationary distribution is not unique: " + _describe(classes, closed))
    if len(classes) == 1 and nx.is_aperiodic(g):
        a = W.T - np.eye(k)
        a[-1, :] = 1.0
        rhs = np.zeros(k)
        rhs[-1] = 1.0
        try:
            p = np.linalg.solve(a, rhs)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"stationary solve failed: {exc}") from exc
        p = np.clip(p, 0.0, None)
        return StationaryDistribution(p / p.sum(), "linear")

    p = np.full(k, 1.0 / k)
    for _ in range(max_iter):
        nxt = W.T @ p
        if np.abs(nxt - p).max() < tol:
            return StationaryDistribution(nxt / nxt.sum(), "power")
        p = nxt
    raise NumericalError("power iteration did not converge (periodic chain?): " + _describe(classes, closed))


def empirical_frequencies(seq, k: int | None = None) -> np.ndarray:
    seq = np.asarray(seq, dtype=int)
    if seq.size == 0:
        raise ValidationError("empty state sequence")
    k = int(seq.max()) + 1 if k is None else k
    return np.bincount(seq, minlength=k) / seq.size


def occupancy_windows(seq, k: int | None = None, window: int = 10, step: int = 1) -> np.ndarray:
    """State occupancy fractions over sliding blocks of ``window`` epochs.

    Row ``i`` covers epochs ``i*step .. i*step + window - 1``.
    """
    seq = np.asarray(seq, dtype=int)
    if window < 1 or step < 1:
        raise ValidationError("window and step must be positive")
    k = int(seq.max()) + 1 if k is None else k
    if seq.size < window:
        return np.zeros((0, k))
    onehot = np.eye(k)[seq]
    csum = np.vstack([np.zeros(k), np.cumsum(onehot, axis=0)])
    starts = np.arange(0, seq.size - window + 1, step)
    return (csum[starts + window] - csum[starts]) / window


def precursor_report(W, counts=None) -> list[PrecursorEntry]:
    """Inflows into the critical (last) state, largest transition probability first."""
    W = np.asarray(W, dtype=float)
    k = W.shape[0]
    if k < 2:
        raise ValidationError("need at least two states")
    crit = k - 1
    total = None if counts is None else float(np.asarray(counts).sum())
    out = []
    for i in range(k - 1):
        joint = None
        if counts is not None and total > 0:
            joint = float(np.asarray(counts)[i, crit] / total)
        out.append(PrecursorEntry(i, float(W[i, crit]), joint))
    out.sort(key=lambda e: (-e.transition, e.state))
    return out
