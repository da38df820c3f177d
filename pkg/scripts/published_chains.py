"""Equilibrium distributions and crash-precursor inflows for the published USA/JPN transition tables."""

import numpy as np

from marketstates import reference as ref
from marketstates.states import precursor_report, state_names, stationary_distribution

for market, W, p_pub, f_pub in (
    ("USA", ref.USA_W, ref.USA_STATIONARY, ref.USA_EMPIRICAL),
    ("JPN", ref.JPN_W, ref.JPN_STATIONARY, ref.JPN_EMPIRICAL),
):
    names = state_names(W.shape[0])
    p0 = stationary_distribution(W).P0
    print(f"{market}")
    print("  state  stationary  published  observed")
    for n, a, b, c in zip(names, p0, p_pub, f_pub):
        print(f"  {n:<6} {a:.4f}      {b:.3f}      {c:.3f}")
    top = precursor_report(W)
    print("  inflows to", names[-1] + ":", ", ".join(f"{names[e.state]} {e.transition:.3f}" for e in top))
    print()
