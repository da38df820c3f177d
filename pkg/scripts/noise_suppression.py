"""Spectrum of one singular frame (N=194, M=20) and how the power map reshapes it.

Prints the zero-eigenvalue count, the emerging spectrum range and an epsilon
sweep of lambda_max and mean correlation for a synthetic one-factor frame.
"""

import numpy as np

from marketstates.corrmat import CorrelationFrame, pearson_matrix, power_map
from marketstates.panel import EpochWindow
from marketstates.spectra import epsilon_sweep, spectrum

rng = np.random.default_rng(0)
n, m = 194, 20
returns = 0.6 * rng.standard_normal(m) + rng.standard_normal((n, m))
raw = CorrelationFrame(pearson_matrix(returns), EpochWindow(0, m - 1), 0.0)

for eps in (0.0, 0.01, 0.6):
    s = spectrum(power_map(raw, eps))
    line = f"eps={eps:<5} zeros={s.zero_count:<4} lambda_max={s.lambda_max:.2f}"
    if s.emerging is not None:
        line += f"  emerging in [{s.emerging.min():.2e}, {s.emerging.max():.2e}], {np.sum(s.emerging < 0)} negative"
    print(line)

print("\neps   lambda_max  mu")
for eps, lam, mu in epsilon_sweep(raw, [round(0.1 * i, 1) for i in range(8)]):
    print(f"{eps:<5} {lam:8.3f}   {mu:.4f}")
