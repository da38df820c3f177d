"""Synthetic price panels: a correlated geometric random walk with regime switches."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .panel import PricePanel


@dataclass
class SynthConfig:
    n_stocks: int = 50
    n_days: int = 2001  # price days; returns are one fewer
    levels: tuple = (0.05, 0.25, 0.50, 0.80)  # off-diagonal correlation per regime
    switches: tuple = (500, 1000, 1500)  # return-day index where each later regime starts
    n_blocks: int = 1
    block_strength: float = 0.0  # extra within-block correlation
    volatility: float = 0.01
    factor_block: int = 10  # >0: rescale the market factor to unit realized variance per block
    start_price: float = 100.0
    start_date: str = "2000-01-03"
    seed: int = 0


def regime_of_day(cfg: SynthConfig) -> np.ndarray:
    t_ret = cfg.n_days - 1
    if len(cfg.switches) != len(cfg.levels) - 1:
        raise ConfigError("need exactly one switch day between consecutive regimes")
    if list(cfg.switches) != sorted(cfg.switches) or any(not 0 < s < t_ret for s in cfg.switches):
        raise ConfigError(f"switch days must be increasing and inside (0, {t_ret})")
    return np.searchsorted(np.asarray(cfg.switches), np.arange(t_ret), side="right")


def synth_returns(cfg: SynthConfig) -> np.ndarray:
    """(N, T-1) log returns. Within regime r, stock pairs in different blocks have
    correlation ``levels[r]``; pairs in the same block add ``block_strength``."""
    for c in cfg.levels:
        if not 0.0 <= c and c + cfg.block_strength <= 1.0:
            raise ConfigError(f"level {c} with block strength {cfg.block_strength} is not a valid correlation")
    rng = np.random.default_rng(cfg.seed)
    n, t = cfg.n_stocks, cfg.n_days - 1
    regime = regime_of_day(cfg)
    c = np.asarray(cfg.levels, dtype=float)[regime]  # (t,)
    market = rng.standard_normal(t)
    if cfg.factor_block > 0:
        market = _stabilize(market, cfg.factor_block)
    blocks = rng.standard_normal((cfg.n_blocks, t))
    idio = rng.standard_normal((n, t))
    block_of = np.arange(n) * cfg.n_blocks // n
    s = cfg.block_strength
    z = np.sqrt(c) * market + np.sqrt(s) * blocks[block_of] + np.sqrt(1.0 - c - s) * idio
    return cfg.volatility * z


def synth_panel(cfg: SynthConfig, tickers=None) -> PricePanel:
    r = synth_returns(cfg)
    logp = np.log(cfg.start_price) + np.concatenate([np.zeros((r.shape[0], 1)), np.cumsum(r, axis=1)], axis=1)
    days = np.busday_offset(np.datetime64(cfg.start_date), np.arange(cfg.n_days), roll="forward")
    if tickers is None:
        tickers = [f"STK{i:03d}" for i in range(cfg.n_stocks)]
    elif len(tickers) != cfg.n_stocks:
        raise ConfigError("ticker list length differs from n_stocks")
    sectors = [f"B{b}" for b in np.arange(cfg.n_stocks) * cfg.n_blocks // cfg.n_stocks]
    return PricePanel(tickers=list(tickers), dates=[str(d) for d in days], prices=np.exp(logp), sectors=sectors)


def _stabilize(x: np.ndarray, block: int) -> np.ndarray:
    """Demean and rescale each consecutive block to unit sample variance.

    Removes the chi-square wobble of the realized factor variance so that the
    planted correlation level is what each epoch actually sees.
    """
    out = x.copy()
    for lo in range(0, x.size, block):
        seg = out[lo : lo + block]
        if seg.size < 2:
            continue
        seg -= seg.mean()
        seg /= np.sqrt((seg * seg).mean())
    return out
