"""Pipeline configuration: dataclass defaults plus a flat ``key = value`` file format."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

DEFAULT_SWEEP = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)


@dataclass
class PipelineConfig:
    input: str = ""
    sectors: str = ""
    output: str = "out"
    epoch_length: int = 20
    shift: int = 10
    epsilon: float = 0.6
    mds_dim: int = 2
    k_max: int = 8
    runs: int = 500
    restarts: int = 10  # Lloyd initialisations per ensemble run
    init: str = "forgy"
    seed: int = 0
    mean_mode: str = "all"
    similarity_mode: str = "all"
    intra_mode: str = "cluster"
    eta: float = 0.05
    occupancy_window: int = 10
    spectrum_tol: float = 1e-10
    export_spectra: bool = True
    use_cache: bool = True
    workers: int = 1
    sweep_eps: tuple = field(default=DEFAULT_SWEEP)

    def validate(self) -> "PipelineConfig":
        checks = [
            (self.epoch_length >= 2, "epoch_length must be >= 2"),
            (self.shift >= 1, "shift must be >= 1"),
            (self.epsilon >= 0, "epsilon must be >= 0"),
            (self.mds_dim in (2, 3), "mds_dim must be 2 or 3"),
            (self.runs >= 2, "runs must be >= 2"),
            (self.restarts >= 1, "restarts must be >= 1"),
            (self.k_max >= 2, "k_max must be >= 2"),
            (self.init in ("forgy", "kmeans++"), "init must be forgy or kmeans++"),
            (self.mean_mode in ("all", "offdiag"), "mean_mode must be all or offdiag"),
            (self.similarity_mode in ("all", "offdiag"), "similarity_mode must be all or offdiag"),
            (self.intra_mode in ("cluster", "pooled"), "intra_mode must be cluster or pooled"),
            (self.eta >= 0, "eta must be >= 0"),
            (self.occupancy_window >= 1, "occupancy_window must be >= 1"),
            (self.workers >= 1, "workers must be >= 1"),
            (all(e >= 0 for e in self.sweep_eps), "sweep_eps entries must be >= 0"),
        ]
        bad = [msg for ok, msg in checks if not ok]
        if bad:
            raise ConfigError("; ".join(bad))
        return self

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["sweep_eps"] = list(self.sweep_eps)
        return d


_FIELDS = {f.name: f for f in dataclasses.fields(PipelineConfig)}


def _coerce(key: str, raw: str):
    if key not in _FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    kind = type(getattr(PipelineConfig(), key))
    raw = raw.strip()
    try:
        if kind is bool:
            low = raw.lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(raw)
            return low in ("true", "1", "yes")
        if kind is tuple:
            return tuple(float(x) for x in raw.replace(",", " ").split())
        return kind(raw)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_overrides(pairs) -> dict:
    out = {}
    for item in pairs:
        if "=" not in item:
            raise ConfigError(f"expected KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        k = k.strip().replace("-", "_")
        out[k] = _coerce(k, v)
    return out


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        pairs.append(line)
    return parse_overrides(pairs)


def load_config(path=None, overrides=()) -> PipelineConfig:
    values = read_config_file(path) if path else {}
    values.update(parse_overrides(overrides))
    return PipelineConfig(**values).validate()


def write_config_file(cfg: PipelineConfig, path) -> None:
    lines = []
    for k, v in cfg.as_dict().items():
        if isinstance(v, list):
            v = ", ".join(repr(x) for x in v)
        lines.append(f"{k} = {v}")
    Path(path).write_text("\n".join(lines) + "\n")
