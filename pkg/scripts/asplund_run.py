"""Run the norm-averaging iteration for the l1/l2 pair and report the
sandwich ratio r_n = max(p_n/q_n - 1) on the shrinking valid window.

Usage: python scripts/asplund_run.py [steps] [n_per_axis]
"""

import json
import sys
import time

from convexdesk.atoms import FnAtom
from convexdesk.grids import Grid
from convexdesk.renorm import asplund_step, init_pair, measured_ratio, valid_region_halfwidth


def main() -> None:
    steps = int(sys.argv[1]) if len(sys.argv) > 1 else 6
    n = int(sys.argv[2]) if len(sys.argv) > 2 else 321
    grid = Grid.box((-4, 4, n), (-4, 4, n))
    pair = init_pair(FnAtom("l1norm"), FnAtom("l2norm"), grid)
    print(json.dumps({"C": pair.C, "h": grid.spacing[0]}))
    t0 = time.perf_counter()
    for _ in range(steps):
        pair = asplund_step(pair)
        rec = {
            "n": pair.n,
            "r_n": measured_ratio(pair),
            "bound": 4.0 ** (-pair.n) * pair.C,
            "region_halfwidth": valid_region_halfwidth(grid, pair.n),
        }
        print(json.dumps(rec))
    print(json.dumps({"elapsed_s": time.perf_counter() - t0}))


if __name__ == "__main__":
    main()
