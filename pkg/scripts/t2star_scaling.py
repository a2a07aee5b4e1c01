"""Median T2* versus 29Si concentration, compared with the 1/sqrt(ppm) law.

    python scripts/t2star_scaling.py --samples 200 --ppm 46900,5000,500,50

Prints, per dot shape, the median T2* at each concentration and the ratio of
successive medians divided by sqrt(ppm ratio).  Values near 1 follow the
scaling; sparse baths (few nuclei inside the dot) drift away from it.
"""

import argparse
import math

import numpy as np

from tinqubit.dephasing import t2star_samples
from tinqubit.dot import DotShape
from tinqubit.isotopes import DEFAULT_REGISTRY

NM = 1e-9


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shapes", default="10x5,10x10,20x5,20x10", help="r0xz0 pairs in nm")
    ap.add_argument("--ppm", default="46900,500,50")
    ap.add_argument("--samples", type=int, default=200)
    ap.add_argument("--seed", type=int, default=20220101)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    si = DEFAULT_REGISTRY["29Si"]
    ppms = sorted((float(p) for p in args.ppm.split(",")), reverse=True)
    for item in args.shapes.split(","):
        r0, z0 = (float(v) for v in item.split("x"))
        shape = DotShape(r0 * NM, z0 * NM)
        medians = [
            float(np.median(t2star_samples(shape, si, p, args.samples, args.seed, workers=args.workers)))
            for p in ppms
        ]
        print(f"r0={r0:g} nm z0={z0:g} nm")
        for p, m in zip(ppms, medians):
            print(f"  {p:>8g} ppm  median T2* = {m:.4e} s")
        for (p1, m1), (p2, m2) in zip(zip(ppms, medians), zip(ppms[1:], medians[1:])):
            print(f"  {p1:g} -> {p2:g} ppm: ratio / sqrt = {m2 / m1 / math.sqrt(p1 / p2):.3f}")


if __name__ == "__main__":
    main()
