"""Run every tinqubit subcommand into one output tree.

    python scripts/reproduce_all.py --out results
    python scripts/reproduce_all.py --out results --quick   # small sample counts, about a minute

Each subcommand writes into its own directory with a manifest.json that can be
replayed with ``tinqubit <subcommand> --config <dir>/manifest.json``.
"""

import argparse
import sys
import time
from pathlib import Path

from tinqubit.cli import RUNNERS, main

QUICK = {
    "fig4": ["--a-khz", "100,400", "--b-mt", "0.1,1.1,15,100"],
    "fig6": ["--samples", "40", "--shapes", "10x5,20x10"],
    "a-coeff": ["--samples", "40"],
    "sweetspot-demo": ["--samples", "20000"],
}


def run(out: Path, quick: bool, seed: int, workers: int) -> int:
    failures = 0
    for name in RUNNERS:
        argv = [name, "--out", str(out / name), "--seed", str(seed), "--workers", str(workers)]
        if quick:
            argv += QUICK.get(name, [])
        t = time.perf_counter()
        code = main(argv)
        print(f"{name:15s} exit={code} {time.perf_counter() - t:8.1f} s", flush=True)
        failures += code != 0
    return failures


def cli():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results"))
    ap.add_argument("--quick", action="store_true", help="reduced sample counts for a smoke run")
    ap.add_argument("--seed", type=int, default=20220101)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    sys.exit(1 if run(args.out, args.quick, args.seed, args.workers) else 0)


if __name__ == "__main__":
    cli()
