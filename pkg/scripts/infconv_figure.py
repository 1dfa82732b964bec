"""Emit plot-ready CSV for the half-circle / absolute-value inf-convolution.

Writes f, g, and f box g on a 4001-node grid to out/ and prints spot
checks against the piecewise closed form (circular for |x| <= sqrt(2)/2,
|x| - sqrt(2) outside).

Usage: python scripts/infconv_figure.py [outdir]
"""

import math
import os
import sys

import numpy as np

from convexdesk.atoms import FnAtom, sample
from convexdesk.fenchel import inf_convolution
from convexdesk.fileio import write_gridfn_csv
from convexdesk.grids import Grid


def main() -> None:
    outdir = sys.argv[1] if len(sys.argv) > 1 else "out"
    os.makedirs(outdir, exist_ok=True)
    grid = Grid.line(-2, 2, 4001)
    f = sample(FnAtom("negsqrt_circle"), grid)
    g = sample(FnAtom("abs"), grid)
    conv = inf_convolution(f, g).out

    write_gridfn_csv(f, os.path.join(outdir, "half_circle.csv"))
    write_gridfn_csv(g, os.path.join(outdir, "abs.csv"))
    write_gridfn_csv(conv, os.path.join(outdir, "infconv.csv"))

    xs = grid.coords(0)
    s2 = math.sqrt(2.0)
    ref = np.where(np.abs(xs) <= s2 / 2,
                   -np.sqrt(np.maximum(0.0, 1.0 - xs ** 2)),
                   np.abs(xs) - s2)
    err = float(np.max(np.abs(conv.values - ref)))
    for x in (0.0, 0.25, 0.5, s2 / 2, 1.0, 1.5):
        i = int(np.argmin(np.abs(xs - x)))
        print(f"x = {xs[i]:+.4f}   f box g = {conv.values[i]:+.6f}   closed form = {ref[i]:+.6f}")
    print(f"max deviation from the piecewise formula: {err:.3e}")
    print(f"CSV written to {outdir}/")


if __name__ == "__main__":
    main()
