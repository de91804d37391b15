"""Command-line entry point: ``mrelab run | sweep | verify``."""

from __future__ import annotations

import argparse
import json
import sys

from .errors import MrelabError
from .harness import Scenario, run, sweep, verify


def _parse_grid(args: list[str]) -> dict[str, list]:
    """Parse repeated ``key=v1,v2,...`` grid axes into a dict of lists."""
    grid: dict[str, list] = {}
    for item in args:
        if "=" not in item:
            raise SystemExit(f"bad --grid entry {item!r}; expected key=v1,v2,...")
        key, _, values = item.partition("=")
        parsed = []
        for tok in values.split(","):
            try:
                parsed.append(json.loads(tok))
            except json.JSONDecodeError:
                parsed.append(tok)
        grid[key.strip()] = parsed
    return grid


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="mrelab",
        description="Relaxation-equation laboratory: run scenarios, sweep "
                    "parameters, and verify the shipped assertion suites.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute one scenario TOML file")
    p_run.add_argument("scenario", help="path to a scenario .toml")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--seed", type=int, default=None, help="override seed")
    p_run.add_argument("--slack", type=float, default=None,
                       help="override assertion slack factor")

    p_sweep = sub.add_parser("sweep", help="cartesian parameter sweep of a template")
    p_sweep.add_argument("template", help="path to a template scenario .toml")
    p_sweep.add_argument("--grid", action="append", default=[], required=True,
                         help="axis as key=v1,v2,... (repeatable); dotted keys "
                              "reach nested params, e.g. gamma.slope=0,0.05")
    p_sweep.add_argument("--out", default=None, help="output root directory")
    p_sweep.add_argument("--workers", type=int, default=4)

    p_verify = sub.add_parser("verify", help="run a shipped assertion suite")
    p_verify.add_argument("--suite", default="all",
                          choices=["projections", "mre", "scalar", "orbits", "all"])
    p_verify.add_argument("--out", default=None, help="output root directory")
    p_verify.add_argument("--seed", type=int, default=None)
    p_verify.add_argument("--slack", type=float, default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            manifest = run(Scenario.from_toml(args.scenario), out_dir=args.out,
                           seed=args.seed, slack=args.slack)
            status = "PASS" if manifest["passed"] else "FAIL"
            print(f"{status} {manifest['name']}")
            for name, ok in manifest["assertions"].items():
                print(f"  {'PASS' if ok else 'FAIL'} {name}")
            return 0 if manifest["passed"] else 1
        if args.command == "sweep":
            manifests = sweep(args.template, _parse_grid(args.grid),
                              out_root=args.out, max_workers=args.workers)
            ok = True
            for m in manifests:
                status = "PASS" if m.get("passed") else "FAIL"
                print(f"{status} {m['name']} {m.get('error', '')}".rstrip())
                ok &= bool(m.get("passed"))
            return 0 if ok else 1
        all_ok, _ = verify(args.suite, out_root=args.out, seed=args.seed,
                           slack=args.slack)
        return 0 if all_ok else 1
    except MrelabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
