"""Published transition tables and equilibrium vectors for the USA (S&P 500) and JPN (Nikkei 225) studies.

Rows are the first state, columns the state that follows. Entries are rounded
to three decimals, so rows sum to 1 only within about 2e-3.
"""

import numpy as np

USA_W = np.array([
    [0.869, 0.112, 0.017, 0.002],
    [0.221, 0.623, 0.152, 0.004],
    [0.033, 0.333, 0.575, 0.058],
    [0.000, 0.000, 0.273, 0.727],
])

JPN_W = np.array([
    [0.809, 0.155, 0.023, 0.009, 0.005],
    [0.150, 0.634, 0.179, 0.033, 0.004],
    [0.014, 0.234, 0.603, 0.120, 0.029],
    [0.011, 0.075, 0.330, 0.511, 0.075],
    [0.036, 0.000, 0.107, 0.393, 0.464],
])

USA_STATIONARY = np.array([0.523, 0.288, 0.149, 0.040])
JPN_STATIONARY = np.array([0.274, 0.308, 0.263, 0.119, 0.036])

USA_EMPIRICAL = np.array([0.523, 0.287, 0.149, 0.041])
JPN_EMPIRICAL = np.array([0.277, 0.308, 0.262, 0.118, 0.035])

# (price days, return days, stocks, frames) per market
USA_SHAPE = dict(price_days=8068, return_days=8060, n_stocks=194, n_frames=805)
JPN_SHAPE = dict(price_days=7998, return_days=7990, n_stocks=165, n_frames=798)
