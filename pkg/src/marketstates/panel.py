"""Price panels, log returns and rolling epoch windows."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class PricePanel:
    """N stocks by T trading days of adjusted close prices."""

    tickers: list[str]
    dates: list[str]
    prices: np.ndarray  # (N, T)
    sectors: list[str] | None = None

    def __post_init__(self):
        prices = np.asarray(self.prices, dtype=float)
        object.__setattr__(self, "prices", prices)
        prices.setflags(write=False)
        if prices.ndim != 2 or prices.shape != (len(self.tickers), len(self.dates)):
            raise ValidationError(
                f"price matrix shape {prices.shape} does not match "
                f"{len(self.tickers)} tickers x {len(self.dates)} dates"
            )
        n, t = prices.shape
        if n < 2 or t < 2:
            raise ValidationError(f"need at least 2 tickers and 2 dates, got N={n}, T={t}")
        if len(set(self.tickers)) != n:
            dup = sorted({x for x in self.tickers if self.tickers.count(x) > 1})
            raise ValidationError(f"duplicate tickers: {', '.join(dup)}")
        for a, b in zip(self.dates, self.dates[1:]):
            if not a < b:
                raise ValidationError(f"dates not strictly increasing at {a!r} -> {b!r}")
        bad = ~np.isfinite(prices) | (prices <= 0)
        if bad.any():
            raise ValidationError(_bad_price_report(self.tickers, self.dates, prices, bad))
        if self.sectors is not None and len(self.sectors) != n:
            raise ValidationError("sector list length differs from ticker count")

    @property
    def n_stocks(self) -> int:
        return len(self.tickers)

    @property
    def n_days(self) -> int:
        return len(self.dates)


@dataclass(frozen=True)
class ReturnPanel:
    tickers: list[str]
    dates: list[str]  # later day of each price pair
    returns: np.ndarray  # (N, T-1)

    def __post_init__(self):
        if not np.all(np.isfinite(self.returns)):
            raise ValidationError("non-finite log return")

    @property
    def n_days(self) -> int:
        return self.returns.shape[1]


@dataclass(frozen=True)
class EpochWindow:
    """Inclusive index range into the return dates."""

    start_index: int
    end_index: int
    end_date: str | None = field(default=None, compare=False)

    @property
    def length(self) -> int:
        return self.end_index - self.start_index + 1


def _bad_price_report(tickers, dates, prices, bad) -> str:
    lines = []
    for k in np.flatnonzero(bad.any(axis=1)):
        cols = np.flatnonzero(bad[k])
        shown = ", ".join(f"{dates[c]}={float(prices[k, c])!r}" for c in cols[:5])
        more = f" (+{len(cols) - 5} more)" if len(cols) > 5 else ""
        lines.append(f"  {tickers[k]}: {shown}{more}")
    return "missing or non-positive prices:\n" + "\n".join(lines)


def load_price_panel(path, sectors_path=None) -> PricePanel:
    """Read a wide price CSV: ``date`` column then one column per ticker.

    An optional sidecar CSV with ``ticker,sector`` rows attaches sector labels.
    Empty cells are treated as missing and rejected with a per-ticker report.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    if not rows or not rows[0] or rows[0][0].strip().lower() != "date":
        raise ValidationError(f"{path}: header must start with a 'date' column")
    tickers = [h.strip() for h in rows[0][1:]]
    dates, cols = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(tickers) + 1:
            raise ValidationError(f"{path}:{lineno}: expected {len(tickers) + 1} fields, got {len(row)}")
        dates.append(row[0].strip())
        vals = []
        for cell in row[1:]:
            cell = cell.strip()
            try:
                vals.append(float(cell) if cell else np.nan)
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: unparseable price {cell!r}") from None
        cols.append(vals)
    prices = np.array(cols, dtype=float).T if cols else np.empty((len(tickers), 0))

    sectors = None
    if sectors_path is not None:
        sectors = _read_sectors(Path(sectors_path), tickers)
    return PricePanel(tickers=tickers, dates=dates, prices=prices, sectors=sectors)


def _read_sectors(path: Path, tickers: list[str]) -> list[str]:
    with path.open(newline="") as fh:
        table = {r["ticker"].strip(): r["sector"].strip() for r in csv.DictReader(fh)}
    missing = [t for t in tickers if t not in table]
    if missing:
        raise ValidationError(f"{path}: no sector for {', '.join(missing[:10])}")
    return [table[t] for t in tickers]


def write_price_panel(panel: PricePanel, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["date", *panel.tickers])
        for j, d in enumerate(panel.dates):
            w.writerow([d, *(repr(float(x)) for x in panel.prices[:, j])])


def log_returns(panel: PricePanel) -> ReturnPanel:
    logp = np.log(panel.prices)
    r = logp[:, 1:] - logp[:, :-1]
    r.setflags(write=False)
    return ReturnPanel(tickers=list(panel.tickers), dates=list(panel.dates[1:]), returns=r)


def n_epochs(t_ret: int, m: int, shift: int) -> int:
    return (t_ret - m) // shift + 1


def epoch_windows(t_ret: int, m: int, shift: int, dates=None) -> list[EpochWindow]:
    """Windows of ``m`` return days starting at 0, shift, 2*shift, ..."""
    if m < 1 or shift < 1:
        raise ValidationError(f"epoch length and shift must be positive (M={m}, shift={shift})")
    if m > t_ret:
        raise ValidationError(f"epoch length M={m} exceeds the {t_ret} available return days")
    out = []
    for start in range(0, t_ret - m + 1, shift):
        end = start + m - 1
        out.append(EpochWindow(start, end, dates[end] if dates is not None else None))
    return out
