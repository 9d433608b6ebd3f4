"""Command line entry point.

Exit codes: 0 success, 2 configuration or usage error, 3 run failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import harness
from .errors import ConfigError, FlapfinError
from .plant import apply_damage

EXIT_OK, EXIT_CONFIG, EXIT_FAILURE = 0, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="flapfin", description="Closed-loop flapping-fin trajectory optimization.")
    p.add_argument("--root", default="runs", help="directory holding run folders (default: runs)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="optimize from a JSON config (resumes if interrupted)")
    r.add_argument("--config", required=True)

    b = sub.add_parser("branch", help="resume a run's snapshot on damaged fins")
    b.add_argument("--run", required=True)
    b.add_argument("--at-gen", type=int, required=True)
    b.add_argument("--damage-fraction", type=float, default=0.442)
    b.add_argument("--branches", type=int, default=5)
    b.add_argument("--seeds", type=int, nargs="+")
    b.add_argument("--sampling-seeds", type=int, nargs="+",
                   help="restart each branch's sampling stream (default: keep the snapshot's)")

    a = sub.add_parser("analyze", help="write every report table for some runs")
    a.add_argument("--runs", nargs="+", required=True)
    a.add_argument("--out", required=True)

    e = sub.add_parser("export", help="print one table of one run")
    e.add_argument("--run", required=True)
    e.add_argument("--what", choices=harness.EXPORTS, required=True)
    e.add_argument("--format", choices=["csv"], default="csv")
    e.add_argument("--output", help="file to write (default: stdout)")
    return p


def _main(argv) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    root = Path(args.root)

    if args.command == "run":
        cfg = harness.RunConfig.load(args.config)
        res = harness.run(cfg, root)
        print(json.dumps({"run": res.run_id, "termination": res.termination,
                          "generations": len(res.log.records)}))
    elif args.command == "branch":
        parent = harness.RunStore(root, args.run).load_config()
        if not 0.0 <= args.damage_fraction < 1.0:
            raise ConfigError("--damage-fraction must lie in [0, 1)")
        damage = apply_damage(parent.plant.fin, args.damage_fraction)
        results = harness.branch(root, args.run, args.at_gen, damage, args.branches, args.seeds,
                                 sampling_seeds=args.sampling_seeds)
        for res in results:
            print(json.dumps({"run": res.run_id, "termination": res.termination,
                              "generations": len(res.log.records)}))
    elif args.command == "analyze":
        print(json.dumps(harness.report(root, args.runs, args.out)))
    elif args.command == "export":
        rows = harness.export(root, args.run, args.what)
        if args.output:
            harness.write_csv(args.output, rows)
        else:
            sys.stdout.write(harness.csv_text(rows))
    return EXIT_OK


def main(argv=None) -> int:
    try:
        return _main(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FlapfinError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
