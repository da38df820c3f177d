"""End-to-end orchestration from a price CSV to every export file."""

from __future__ import annotations

import contextlib
import csv
import hashlib
import json
import logging
import platform
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .cluster import EnsembleStats, ensemble_stats, optimal_k
from .config import PipelineConfig
from .corrmat import CorrelationFrame, compute_frames, describe, mean_correlation, power_map
from .embed import Embedding, classical_mds
from .errors import MarketStatesError, NumericalError
from .panel import load_price_panel, log_returns, epoch_windows
from .similarity import (
    SimilarityMatrix,
    read_similarity_cache,
    similarity_matrix,
    write_similarity_cache,
    write_similarity_csv,
)
from .spectra import spectrum
from .states import (
    empirical_frequencies,
    occupancy_windows,
    order_states,
    precursor_report,
    state_names,
    stationary_distribution,
    transition_matrix,
)

log = logging.getLogger(__name__)

EXECUTION_ONLY = ("output", "workers", "use_cache")
STAGES = ("panel", "frames", "similarity", "embed", "cluster", "states")


@dataclass
class RunResult:
    config: PipelineConfig
    manifest: dict = field(default_factory=dict)
    frames: list = field(default_factory=list)
    mapped: list = field(default_factory=list)
    similarity: SimilarityMatrix | None = None
    embedding: Embedding | None = None
    stats: list = field(default_factory=list)
    selected_k: int | None = None
    state_model: object = None
    transitions: object = None
    stationary: object = None


@contextlib.contextmanager
def stage(name: str):
    try:
        yield
    except MarketStatesError as exc:
        if exc.stage is None:
            exc.stage = name
        raise
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        raise NumericalError(str(exc), stage=name) from exc


def _fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    return "" if np.isnan(x) else repr(x)


def _write_rows(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest() if path else ""


def _config_echo(cfg: PipelineConfig) -> dict:
    """Config minus execution-only knobs, which must not change any output byte."""
    d = cfg.as_dict()
    for key in EXECUTION_ONLY:
        d.pop(key)
    return d


def _cache_key(cfg: PipelineConfig, epsilon: float) -> str:
    parts = [
        __version__,
        _sha256(cfg.input),
        _sha256(cfg.sectors) if cfg.sectors else "",
        str(cfg.epoch_length),
        str(cfg.shift),
        repr(float(epsilon)),
        cfg.similarity_mode,
    ]
    return hashlib.sha256("|".join(parts).encode()).hexdigest()


def load_frames(cfg: PipelineConfig):
    with stage("panel"):
        panel = load_price_panel(cfg.input, cfg.sectors or None)
        returns = log_returns(panel)
        windows = epoch_windows(returns.n_days, cfg.epoch_length, cfg.shift, returns.dates)
    with stage("frames"):
        frames = compute_frames(returns, windows, cfg.workers)
    return panel, frames


def export_frames(out: Path, cfg: PipelineConfig, frames, mapped) -> list[str]:
    files = []
    for name, group in (("descriptors.csv", frames), ("descriptors_mapped.csv", mapped)):
        rows = []
        for f in group:
            d = describe(f, cfg.mean_mode)
            rows.append([f.end_date, _fmt(d.mu), _fmt(d.gini), _fmt(d.lambda_max)])
        _write_rows(out / name, ["end_date", "mu", "gini", "lambda_max"], rows)
        files.append(name)
    if cfg.export_spectra:
        rows = []
        for f, g in zip(frames, mapped):
            for fr in (f, g) if g.epsilon != f.epsilon else (f,):
                s = spectrum(fr, cfg.spectrum_tol)
                rows.extend([fr.end_date, _fmt(fr.epsilon), i, _fmt(v)] for i, v in enumerate(s.eigenvalues))
        _write_rows(out / "spectra.csv", ["end_date", "epsilon", "index", "eigenvalue"], rows)
        files.append("spectra.csv")
    return files


def compute_similarity(cfg: PipelineConfig, mapped: list[CorrelationFrame], out: Path | None,
                       epsilon: float, prefix: str = "similarity") -> SimilarityMatrix:
    """Similarity matrix, reusing ``<prefix>.bin`` when its key sidecar matches."""
    dates = [f.end_date for f in mapped]
    if out is not None:
        key = _cache_key(cfg, epsilon)
        bin_path, key_path = out / f"{prefix}.bin", out / f"{prefix}.key"
        if cfg.use_cache and bin_path.exists() and key_path.exists() and key_path.read_text().strip() == key:
            sim = read_similarity_cache(bin_path, dates)
            if sim.matrix.shape[0] == len(mapped):
                log.info("reusing similarity cache %s", bin_path)
                return sim
    sim = similarity_matrix(mapped, cfg.similarity_mode, cfg.workers)
    if out is not None:
        write_similarity_cache(sim, bin_path)
        key_path.write_text(key + "\n")
    return sim


def cluster_ensembles(cfg: PipelineConfig, coords: np.ndarray) -> list[EnsembleStats]:
    k_max = min(cfg.k_max, coords.shape[0])
    return [
        ensemble_stats(coords, k, cfg.runs, cfg.seed, cfg.workers, cfg.init, cfg.intra_mode, cfg.restarts)
        for k in range(1, k_max + 1)
    ]


def export_cluster_stats(out: Path, stats, stem: str = "cluster") -> list[str]:
    _write_rows(
        out / f"{stem}_stats.csv",
        ["k", "mean_intra_mean", "mean_intra_std"],
        [[s.k, _fmt(s.mean_of_mean_intra), _fmt(s.std_of_mean_intra)] for s in stats],
    )
    _write_rows(
        out / f"{stem}_runs.csv",
        ["k", "run", "seed", "mean_intra"],
        [[s.k, i, seed, _fmt(v)] for s in stats for i, (seed, v) in enumerate(zip(s.seeds, s.per_run))],
    )
    return [f"{stem}_stats.csv", f"{stem}_runs.csv"]


def _selection_trace(sel) -> dict:
    return {
        "selected_k": sel.k,
        "min_std": sel.min_std,
        "tolerance": sel.tolerance,
        "candidates": list(sel.candidates),
        "std_by_k": {str(k): v for k, v in sel.stds.items()},
    }


def _export_states(out: Path, cfg: PipelineConfig, res: RunResult, tickers) -> tuple[list[str], dict]:
    frames = res.frames
    dates = [f.end_date for f in frames]
    best = res.stats[res.selected_k - 1].best
    mu = [mean_correlation(f, cfg.mean_mode) for f in frames]
    model = order_states(best.labels, mu, [f.matrix for f in frames])
    res.state_model = model
    k = model.k
    names = state_names(k)
    files = []

    _write_rows(out / "states.csv", ["end_date", "state"],
                [[d, names[s]] for d, s in zip(dates, model.state_of_epoch)])
    tm = transition_matrix(model.state_of_epoch, k)
    res.transitions = tm
    _write_rows(out / "transitions.csv", ["first\\second", *names],
                [[names[i], *(_fmt(v) for v in tm.W[i])] for i in range(k)])
    _write_rows(out / "transition_counts.csv", ["first\\second", *names],
                [[names[i], *(int(v) for v in tm.counts[i])] for i in range(k)])
    files += ["states.csv", "transitions.csv", "transition_counts.csv"]

    emp = empirical_frequencies(model.state_of_epoch, k)
    stationary_error = None
    try:
        res.stationary = stationary_distribution(tm.W)
        p0 = res.stationary.P0
    except NumericalError as exc:
        stationary_error = str(exc)
        log.warning("stationary distribution unavailable: %s", exc)
        p0 = [None] * k
    _write_json(out / "stationary.json", [
        {"state": names[i], "stationary": None if p0[i] is None else float(p0[i]), "empirical": float(emp[i])}
        for i in range(k)
    ])
    files.append("stationary.json")

    occ = occupancy_windows(model.state_of_epoch, k, cfg.occupancy_window)
    w = cfg.occupancy_window
    _write_rows(out / "occupancy.csv", ["end_date", *names],
                [[dates[i + w - 1], *(_fmt(v) for v in row)] for i, row in enumerate(occ)])
    files.append("occupancy.csv")

    report = precursor_report(tm.W, tm.counts)
    _write_rows(out / "precursors.csv", ["state", "to_critical", "joint"],
                [[names[e.state], _fmt(e.transition), _fmt(e.joint)] for e in report])
    files.append("precursors.csv")

    for i, mat in enumerate(model.representative_frame):
        name = f"representative_{names[i]}.csv"
        _write_rows(out / name, ["ticker", *tickers],
                    [[t, *(_fmt(v) for v in row)] for t, row in zip(tickers, mat)])
        files.append(name)

    summary = {
        "k": k,
        "state_mean_corr": [float(x) for x in model.state_mean_corr],
        "zero_rows": [names[i] for i in tm.zero_rows],
        "stationary_error": stationary_error,
        "precursor": names[report[0].state] if report else None,
    }
    return files, summary


def run_pipeline(cfg: PipelineConfig, until: str = "states") -> RunResult:
    """Run stages up to and including ``until`` and write their exports plus ``manifest.json``."""
    cfg.validate()
    if until not in STAGES:
        raise ValueError(f"unknown stage {until!r}")
    stop = STAGES.index(until)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    res = RunResult(cfg)
    files: list[str] = []

    panel, frames = load_frames(cfg)
    res.frames = frames
    manifest = {
        "package": "marketstates",
        "version": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
        "config": _config_echo(cfg),
        "input_sha256": _sha256(cfg.input),
        "n_stocks": panel.n_stocks,
        "n_price_days": panel.n_days,
        "n_frames": len(frames),
        "seed_derivation": "run seeds for k = SeedSequence(seed, spawn_key=(k,)).generate_state(runs, uint32)",
    }

    if stop >= STAGES.index("frames"):
        with stage("frames"):
            res.mapped = [power_map(f, cfg.epsilon) for f in frames]
            files += export_frames(out, cfg, frames, res.mapped)
    if stop >= STAGES.index("similarity"):
        with stage("similarity"):
            res.similarity = compute_similarity(cfg, res.mapped, out, cfg.epsilon)
            write_similarity_csv(res.similarity, out / "similarity.csv")
            files += ["similarity.csv", "similarity.bin"]
    if stop >= STAGES.index("embed"):
        with stage("embed"):
            res.embedding = classical_mds(res.similarity.matrix, cfg.mds_dim)
            axes = ["x", "y", "z"][: cfg.mds_dim]
            _write_rows(out / "embedding.csv", ["end_date", *axes],
                        [[f.end_date, *(_fmt(v) for v in row)] for f, row in zip(frames, res.embedding.coordinates)])
            files.append("embedding.csv")
            manifest["mds"] = {
                "eigenvalues_used": [float(v) for v in res.embedding.eigenvalues_used],
                "stress": res.embedding.stress,
                "negative_eigenvalue_mass": res.embedding.negative_mass,
            }
    if stop >= STAGES.index("cluster"):
        with stage("cluster"):
            res.stats = cluster_ensembles(cfg, res.embedding.coordinates)
            files += export_cluster_stats(out, res.stats)
            sel = optimal_k(res.stats, cfg.eta)
            res.selected_k = sel.k
            manifest["selection"] = _selection_trace(sel)
    if stop >= STAGES.index("states"):
        with stage("states"):
            state_files, summary = _export_states(out, cfg, res, panel.tickers)
            files += state_files
            manifest["states"] = summary

    manifest["files"] = sorted(files)
    res.manifest = manifest
    _write_json(out / "manifest.json", manifest)
    return res


def sweep_epsilon(cfg: PipelineConfig, eps_list=None) -> dict:
    """Similarity, MDS and cluster ensembles for each epsilon; one stats table per epsilon."""
    cfg.validate()
    eps_list = tuple(cfg.sweep_eps if eps_list is None else eps_list)
    out = Path(cfg.output)
    out.mkdir(parents=True, exist_ok=True)
    _, frames = load_frames(cfg)
    entries = []
    for eps in eps_list:
        tag = f"eps{eps:.2f}"
        with stage("similarity"):
            mapped = [power_map(f, float(eps)) for f in frames]
            sim = compute_similarity(cfg, mapped, out, float(eps), prefix=f"similarity_{tag}")
        with stage("embed"):
            emb = classical_mds(sim.matrix, cfg.mds_dim)
        with stage("cluster"):
            stats = cluster_ensembles(cfg, emb.coordinates)
            files = export_cluster_stats(out, stats, stem=f"cluster_{tag}")
            sel = optimal_k(stats, cfg.eta)
        entries.append({"epsilon": float(eps), "files": files, **_selection_trace(sel)})
    manifest = {
        "package": "marketstates",
        "version": __version__,
        "config": _config_echo(cfg),
        "input_sha256": _sha256(cfg.input),
        "n_frames": len(frames),
        "sweep": entries,
    }
    _write_json(out / "sweep_manifest.json", manifest)
    return manifest
