"""Grid refinement study for the shrinking circle in the Poincare disk.

    python3 scripts/hs2_convergence.py --grids 64 128 256 512 --r0 0.3
"""

import argparse
import math

from graphflow.verification import hs2_pde


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--grids", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--r0", type=float, default=0.3)
    ap.add_argument("--t-end", type=float, default=1.0)
    args = ap.parse_args()

    print(f"{'points':>7} {'steps':>7} {'max err':>11} {'order':>6} {'secs':>7}")
    prev = None
    for n in args.grids:
        final, _, err, secs = hs2_pde(n, args.r0, args.t_end)
        order = "" if prev is None else f"{math.log(prev[1] / err) / math.log(n / prev[0]):6.2f}"
        print(f"{n:7d} {final.stats['steps']:7d} {err:11.3e} {order:>6} {secs:7.2f}")
        prev = (n, err)


if __name__ == "__main__":
    main()
