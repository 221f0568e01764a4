"""Command-line entry point.

One subcommand per experiment kind plus `rerun`; exit codes: 0 ok,
2 config error, 3 feasibility error, 4 particle-system check failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from .experiments import (CheckFailure, ConfigError, ExperimentConfig,
                          rerun, run)
from .particles import FeasibilityError

KINDS = ("simulate", "render", "check-system", "defects", "entry-time",
         "density", "convergence", "qualitative-monitor")


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gliderlab",
        description="cellular-automata particle laboratory")
    sub = p.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        sp = sub.add_parser(kind, help=f"run a {kind} experiment")
        sp.add_argument("--config", help="key=value config file")
        sp.add_argument("--seed", type=int, help="master seed override")
        sp.add_argument("--out", help="output path prefix")
        sp.add_argument("--threads", type=int,
                        help="worker threads for trajectory loops")
        sp.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE", help="set any config key")
    sp = sub.add_parser("rerun", help="re-execute a run manifest")
    sp.add_argument("manifest")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "rerun":
            man = rerun(args.manifest)
        else:
            cfg = (ExperimentConfig.from_file(args.config) if args.config
                   else ExperimentConfig())
            cfg.override("kind", args.command)
            if args.seed is not None:
                cfg.override("seed", str(args.seed))
            if args.out is not None:
                cfg.override("out", args.out)
            for ov in args.override:
                if "=" not in ov:
                    raise ConfigError(f"--override needs KEY=VALUE, got {ov!r}")
                k, v = ov.split("=", 1)
                cfg.override(k.strip(), v.strip())
            if args.threads:
                os.environ.setdefault("NUMBA_NUM_THREADS", str(args.threads))
            man = run(cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except FeasibilityError as e:
        print(f"feasibility error: {e}", file=sys.stderr)
        return 3
    except CheckFailure as e:
        print(f"check failure: {e}", file=sys.stderr)
        return 4
    print(f"ok: hash={man.config_hash} outputs={man.outputs} "
          f"summary={man.summary}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
