"""Exit criteria. Each test records one PASS/FAIL line, printed in the terminal summary."""

import bisect
import time
import timeit
from pathlib import Path

import numpy as np
import pytest

from marketstates.cluster import kmeans
from marketstates.config import PipelineConfig
from marketstates.corrmat import CorrelationFrame, pearson_matrix, power_map
from marketstates.embed import classical_mds, pairwise_distances
from marketstates.panel import EpochWindow, epoch_windows, write_price_panel
from marketstates.pipeline import run_pipeline
from marketstates.reference import JPN_STATIONARY, JPN_W, USA_STATIONARY, USA_W
from marketstates.spectra import spectrum
from marketstates.states import empirical_frequencies, stationary_distribution, transition_matrix
from marketstates.synth import SynthConfig, synth_panel

from conftest import ACCEPTANCE_LINES
from test_cluster import brute_force_sse

PLANTED = (0.05, 0.25, 0.50, 0.80)


def record(num, title, ok, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {title} -- {detail}")
    assert ok, detail


def planted_input(tmp_path, seed=0):
    # 2000 return days, switches every 500: 49 whole epochs per regime at M=20, shift=10
    cfg = SynthConfig(n_stocks=50, n_days=2001, levels=PLANTED, switches=(500, 1000, 1500), seed=seed)
    path = tmp_path / f"planted_{seed}.csv"
    write_price_panel(synth_panel(cfg), path)
    return path


def test_c1_stationary_regression():
    usa = stationary_distribution(USA_W).P0
    jpn = stationary_distribution(JPN_W).P0
    t_usa = min(timeit.repeat(lambda: stationary_distribution(USA_W), number=50, repeat=5)) / 50
    t_jpn = min(timeit.repeat(lambda: stationary_distribution(JPN_W), number=50, repeat=5)) / 50
    err = max(np.abs(usa - USA_STATIONARY).max(), np.abs(jpn - JPN_STATIONARY).max())
    ok = err <= 0.002 and max(t_usa, t_jpn) < 1e-3
    record(1, "stationary distribution of published tables", ok,
           f"USA {np.round(usa, 4)}, JPN {np.round(jpn, 4)}, max dev {err:.4f} (<=0.002), "
           f"{max(t_usa, t_jpn) * 1e3:.3f} ms (<1 ms)")


def test_c2_frame_counts():
    usa = len(epoch_windows(8060, 20, 10))
    jpn = len(epoch_windows(7990, 20, 10))
    record(2, "epoch window counts", (usa, jpn) == (805, 798), f"n={usa} (805), n={jpn} (798)")


def test_c3_degeneracy():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    r = 0.5 * rng.standard_normal(20) + rng.standard_normal((194, 20))
    raw = CorrelationFrame(pearson_matrix(r), EpochWindow(0, 19), 0.0)
    s0 = spectrum(raw, tol=1e-10)
    s6 = spectrum(power_map(raw, 0.6), tol=1e-10)
    dt = time.perf_counter() - t0
    ok = (s0.zero_count == 175 and s6.zero_count == 0 and np.any(s6.emerging < 0)
          and s6.lambda_max < s0.lambda_max and dt < 5)
    record(3, "zero-eigenvalue degeneracy and its breaking", ok,
           f"zeros {s0.zero_count} (175) -> {s6.zero_count} (0), "
           f"{int(np.sum(s6.emerging < 0))} negative emerging, "
           f"lambda_max {s0.lambda_max:.2f} -> {s6.lambda_max:.2f}, {dt:.2f} s")


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_c4_planted_regimes(tmp_path, seed):
    path = planted_input(tmp_path, seed)
    cfg = PipelineConfig(input=str(path), output=str(tmp_path / "out"))
    t0 = time.perf_counter()
    res = run_pipeline(cfg)
    dt = time.perf_counter() - t0
    mu = res.state_model.state_mean_corr
    k = res.selected_k
    ok = (k == 4 and np.all(np.diff(mu) > 0) and len(mu) == 4
          and np.max(np.abs(mu - np.array(PLANTED))) <= 0.1 and dt < 120)
    record(4, f"planted 4-regime panel, data seed {seed}", ok,
           f"optimal k={k} (4), state means {np.round(mu, 3)} vs {PLANTED} (+-0.1), {dt:.1f} s (<120 s)")


def test_c5_kmeans_brute_force():
    t0 = time.perf_counter()
    rng = np.random.default_rng(555)
    mismatches = 0
    for _ in range(30):
        n = int(rng.integers(3, 9))
        k = int(rng.integers(1, min(3, n) + 1))
        x = rng.random((n, 2))
        best = min(kmeans(x, k, seed=s).inertia for s in range(50))
        if not np.isclose(best, brute_force_sse(x, k), rtol=1e-12, atol=1e-15):
            mismatches += 1
    dt = time.perf_counter() - t0
    record(5, "k-means vs exhaustive partition optimum", mismatches == 0 and dt < 10,
           f"{30 - mismatches}/30 instances at the global optimum, {dt:.2f} s (<10 s)")


def test_c6_mds_fidelity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(66)
    worst = 0.0
    for i in range(50):
        dim = 2 + i % 2
        pts = rng.normal(scale=rng.uniform(0.1, 100), size=(int(rng.integers(4, 60)), dim))
        d = pairwise_distances(pts)
        got = pairwise_distances(classical_mds(d, dim).coordinates)
        off = ~np.eye(len(d), dtype=bool)
        worst = max(worst, float(np.max(np.abs(got[off] - d[off]) / d[off])))
    dt = time.perf_counter() - t0
    record(6, "classical MDS distance recovery", worst <= 1e-8 and dt < 5,
           f"worst relative error {worst:.2e} (<=1e-8), {dt:.2f} s (<5 s)")


def sample_chain(W, steps, seed):
    cdf = [list(np.cumsum(row / row.sum())) for row in W]
    u = np.random.default_rng(seed).random(steps).tolist()
    last = W.shape[0] - 1
    seq = [0] * steps
    s = 0
    for t in range(steps):
        seq[t] = s
        s = min(bisect.bisect_right(cdf[s], u[t]), last)
    return np.array(seq)


def test_c7_markov_round_trip():
    t0 = time.perf_counter()
    seq = sample_chain(USA_W, 1_000_000, seed=77)
    W = transition_matrix(seq, 4).W
    freq = empirical_frequencies(seq, 4)
    dt = time.perf_counter() - t0
    w_err = float(np.max(np.abs(W - USA_W)))
    f_err = float(np.max(np.abs(freq - USA_STATIONARY)))
    ok = w_err <= 0.005 and f_err <= 0.005 and dt < 10
    record(7, "Markov chain sample and re-estimate", ok,
           f"max |W err| {w_err:.4f}, max |freq err| {f_err:.4f} (<=0.005), {dt:.2f} s (<10 s)")


def test_c8_determinism(tmp_path):
    path = planted_input(tmp_path, 0)
    outs = []
    for name, workers in (("a", 1), ("b", 4)):
        cfg = PipelineConfig(input=str(path), output=str(tmp_path / name), workers=workers, use_cache=False)
        run_pipeline(cfg)
        outs.append({p.name: p.read_bytes() for p in sorted((tmp_path / name).iterdir())})
    same = outs[0].keys() == outs[1].keys() and all(outs[0][f] == outs[1][f] for f in outs[0])
    diff = [f for f in outs[0] if outs[0].get(f) != outs[1].get(f)]
    record(8, "byte-identical reruns across worker counts", same,
           f"{len(outs[0])} files compared, differing: {diff or 'none'}")
