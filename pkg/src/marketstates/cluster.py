"""Seeded k-means, ensemble statistics of the intra-cluster distance, and k selection."""

from __future__ import annotations

import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError, ValidationError

MAX_ITER = 300


@dataclass(frozen=True)
class KMeansResult:
    labels: np.ndarray
    centroids: np.ndarray
    mean_intra: float
    inertia: float  # within-cluster sum of squares
    iterations: int
    seed: int
    objective_history: tuple = ()

    @property
    def k(self) -> int:
        return self.centroids.shape[0]


@dataclass(frozen=True)
class EnsembleStats:
    k: int
    runs: int
    mean_of_mean_intra: float
    std_of_mean_intra: float
    per_run: tuple
    seeds: tuple
    best: KMeansResult = field(repr=False, compare=False)


@dataclass(frozen=True)
class KSelection:
    k: int
    min_std: float
    tolerance: float
    candidates: tuple  # admissible k whose std is within tolerance of the minimum
    stds: dict


def _sq_dists(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - c[None, :, :]
    return (diff * diff).sum(axis=-1)


def _init_centroids(x, k, rng, init):
    n = x.shape[0]
    if init == "forgy":
        return x[rng.choice(n, size=k, replace=False)].copy()
    if init == "kmeans++":
        idx = [int(rng.integers(n))]
        d2 = _sq_dists(x, x[idx]).min(axis=1)
        for _ in range(1, k):
            total = d2.sum()
            j = int(rng.integers(n)) if total == 0 else int(rng.choice(n, p=d2 / total))
            idx.append(j)
            d2 = np.minimum(d2, _sq_dists(x, x[[j]])[:, 0])
        return x[idx].copy()
    raise ValueError(f"unknown init {init!r}")


def _repair_empty(x, labels, centroids, k):
    """Give each empty cluster the point farthest from its current centroid."""
    for j in range(k):
        counts = np.bincount(labels, minlength=k)
        if counts[j]:
            continue
        d = ((x - centroids[labels]) ** 2).sum(axis=1)
        d[counts[labels] <= 1] = -1.0  # never empty another cluster
        far = int(np.argmax(d))
        labels[far] = j
        centroids[j] = x[far]
    return labels


def _update(x, labels, k):
    c = np.zeros((k, x.shape[1]))
    np.add.at(c, labels, x)
    return c / np.bincount(labels, minlength=k)[:, None]


def _inertia(x, labels, centroids):
    r = x - centroids[labels]
    return float((r * r).sum())


def intra_distance(x, labels, centroids, mode: str = "cluster") -> float:
    """Mean point-to-centroid Euclidean distance.

    ``"cluster"`` averages within each cluster and then across clusters;
    ``"pooled"`` averages over all points at once.
    """
    dist = np.sqrt(((x - centroids[labels]) ** 2).sum(axis=1))
    if mode == "pooled":
        return float(dist.mean())
    if mode != "cluster":
        raise ValueError(f"unknown intra-distance mode {mode!r}")
    k = centroids.shape[0]
    per = np.bincount(labels, weights=dist, minlength=k) / np.bincount(labels, minlength=k)
    return float(per.mean())


def kmeans(points, k: int, seed: int, init: str = "forgy", intra_mode: str = "cluster",
           max_iter: int = MAX_ITER, n_init: int = 1) -> KMeansResult:
    """Lloyd iteration from seeded initial centroids.

    With ``n_init > 1`` the run draws that many initialisations from the same
    seeded stream and keeps the lowest-inertia outcome (earliest on ties).
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 2:
        raise ValidationError("points must be an (n, D) array")
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValidationError(f"k must satisfy 1 <= k <= n={n}, got {k}")
    if n_init < 1:
        raise ValidationError(f"n_init must be positive, got {n_init}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_init):
        res = _lloyd(x, k, _init_centroids(x, k, rng, init), max_iter)
        if best is None or res[3] < best[3]:
            best = res
    labels, centroids, it, _, history = best
    return KMeansResult(
        labels=labels,
        centroids=centroids,
        mean_intra=intra_distance(x, labels, centroids, intra_mode),
        inertia=history[-1],
        iterations=it,
        seed=int(seed),
        objective_history=tuple(history),
    )


def _lloyd(x, k, centroids, max_iter):

    labels = np.argmin(_sq_dists(x, centroids), axis=1)
    labels = _repair_empty(x, labels, centroids, k)
    centroids = _update(x, labels, k)
    history = [_inertia(x, labels, centroids)]
    it = 0
    for it in range(1, max_iter + 1):
        new = np.argmin(_sq_dists(x, centroids), axis=1)
        new = _repair_empty(x, new, centroids, k)
        if np.array_equal(new, labels):
            break
        labels = new
        centroids = _update(x, labels, k)
        history.append(_inertia(x, labels, centroids))
        if history[-1] > history[-2] * (1 + 1e-12) + 1e-300:
            raise NumericalError(f"k-means objective increased: {history[-2]!r} -> {history[-1]!r}")
    return labels, centroids, it, history[-1], history


def run_seeds(master_seed: int, k: int, runs: int) -> list[int]:
    """Per-run seeds for one k: ``SeedSequence(master_seed, spawn_key=(k,))`` words."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(k,))
    return [int(s) for s in ss.generate_state(runs, dtype=np.uint32)]


def ensemble_stats(points, k: int, runs: int = 500, master_seed: int = 0, workers: int = 1,
                   init: str = "forgy", intra_mode: str = "cluster", n_init: int = 1) -> EnsembleStats:
    """Run k-means from ``runs`` seeded initialisations and summarise ``mean_intra``.

    The standard deviation is the population value across runs. The run with
    the smallest inertia (earliest on ties) is kept as ``best``.
    """
    if runs < 2:
        raise ValidationError(f"ensemble needs at least 2 runs, got {runs}")
    seeds = run_seeds(master_seed, k, runs)

    def one(s):
        return kmeans(points, k, s, init=init, intra_mode=intra_mode, n_init=n_init)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]
    vals = [r.mean_intra for r in results]
    best = min(range(runs), key=lambda i: (results[i].inertia, i))
    return EnsembleStats(
        k=k,
        runs=runs,
        mean_of_mean_intra=statistics.fmean(vals),
        std_of_mean_intra=statistics.pstdev(vals),
        per_run=tuple(vals),
        seeds=tuple(seeds),
        best=results[best],
    )


def optimal_k(stats_list, eta: float = 0.05) -> KSelection:
    """Largest k (k >= 2) whose ensemble std is within ``eta * (max - min)`` of the minimum std.

    ``stats_list`` must cover k = 1..k_max contiguously; k = 1 has trivially
    zero spread and is never admissible.
    """
    ks = [s.k for s in stats_list]
    if ks != list(range(1, len(ks) + 1)):
        raise ValidationError(f"stats must cover k = 1..k_max contiguously, got {ks}")
    if len(ks) < 2:
        raise ValidationError("need k_max >= 2")
    stds = {s.k: s.std_of_mean_intra for s in stats_list}
    admissible = {k: v for k, v in stds.items() if k >= 2}
    lo, hi = min(admissible.values()), max(admissible.values())
    tol = eta * (hi - lo)
    cands = tuple(k for k, v in admissible.items() if v <= lo + tol)
    return KSelection(k=max(cands), min_std=lo, tolerance=tol, candidates=cands, stds=stds)
