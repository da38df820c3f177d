"""Command-line entry point: ``marketstates <subcommand>``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import load_config
from .errors import ConfigError, MarketStatesError
from .panel import write_price_panel
from .pipeline import run_pipeline, sweep_epsilon
from .synth import SynthConfig, synth_panel

STAGE_COMMANDS = {
    "frames": "frames",
    "similarity": "similarity",
    "embed": "embed",
    "cluster": "cluster",
    "states": "states",
    "run": "states",
}


def _floats(text):
    return tuple(float(x) for x in text.replace(",", " ").split())


def _ints(text):
    return tuple(int(x) for x in text.replace(",", " ").split())


def _add_pipeline_args(p):
    p.add_argument("-c", "--config", help="key = value configuration file")
    p.add_argument("-i", "--input", help="price CSV (overrides config)")
    p.add_argument("-o", "--output", help="output directory (overrides config)")
    p.add_argument("--sectors", help="ticker,sector sidecar CSV")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key; repeatable")


def build_parser():
    parser = argparse.ArgumentParser(prog="marketstates", description=__doc__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in STAGE_COMMANDS:
        p = sub.add_parser(name, help=f"run the pipeline through the {STAGE_COMMANDS[name]} stage")
        _add_pipeline_args(p)

    p = sub.add_parser("sweep", help="cluster statistics for a list of epsilon values")
    _add_pipeline_args(p)
    p.add_argument("--eps", type=_floats, help="comma-separated epsilon list (default 0.1..0.7)")

    p = sub.add_parser("synth", help="write a synthetic regime-switching price CSV")
    d = SynthConfig()
    p.add_argument("--out", required=True)
    p.add_argument("--sectors-out")
    p.add_argument("--n-stocks", type=int, default=d.n_stocks)
    p.add_argument("--n-days", type=int, default=d.n_days, help="number of price days")
    p.add_argument("--levels", type=_floats, default=d.levels)
    p.add_argument("--switches", type=_ints, default=d.switches)
    p.add_argument("--n-blocks", type=int, default=d.n_blocks)
    p.add_argument("--block-strength", type=float, default=d.block_strength)
    p.add_argument("--factor-block", type=int, default=d.factor_block,
                   help="stabilise factor variance over blocks of this many days (0 = off)")
    p.add_argument("--volatility", type=float, default=d.volatility)
    p.add_argument("--seed", type=int, default=d.seed)
    return parser


def _pipeline_config(args):
    overrides = list(args.overrides)
    for key in ("input", "output", "sectors", "seed", "workers"):
        val = getattr(args, key)
        if val is not None:
            overrides.append(f"{key}={val}")
    cfg = load_config(args.config, overrides)
    if not cfg.input:
        raise ConfigError("no input price file (use --input or set input in the config)")
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            cfg = SynthConfig(
                n_stocks=args.n_stocks, n_days=args.n_days, levels=args.levels, switches=args.switches,
                n_blocks=args.n_blocks, block_strength=args.block_strength, factor_block=args.factor_block,
                volatility=args.volatility, seed=args.seed,
            )
            panel = synth_panel(cfg)
            write_price_panel(panel, args.out)
            if args.sectors_out:
                Path(args.sectors_out).write_text(
                    "ticker,sector\n" + "".join(f"{t},{s}\n" for t, s in zip(panel.tickers, panel.sectors))
                )
            print(f"wrote {panel.n_stocks} x {panel.n_days} prices to {args.out}")
            return 0

        cfg = _pipeline_config(args)
        if args.command == "sweep":
            manifest = sweep_epsilon(cfg, args.eps)
            for e in manifest["sweep"]:
                print(f"epsilon={e['epsilon']:g} selected_k={e['selected_k']}")
            return 0

        res = run_pipeline(cfg, until=STAGE_COMMANDS[args.command])
        summary = {"n_frames": res.manifest["n_frames"], "files": len(res.manifest["files"])}
        if res.selected_k is not None:
            summary["selected_k"] = res.selected_k
        print(json.dumps(summary))
        return 0
    except MarketStatesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
