"""Exact finite-N rate R_N against the asymptotic spectral bound for one constraint."""
import argparse
import math
import time

from gridcode import pairgraph, spectral
from gridcode.constraint import load_constraint
from gridcode.subopt import rate_exact


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--constraint", default="nib-sym")
    ap.add_argument("--n-min", type=int, default=3)
    ap.add_argument("--n-max", type=int, default=8)
    ap.add_argument("--budget", type=int, default=pairgraph.DEFAULT_BUDGET_LOG2)
    args = ap.parse_args()

    c = load_constraint(args.constraint)
    sr = spectral.spectral_report(c, walk_ns=None)
    print(f"{c.name or args.constraint}: q={c.q}, spectral bound {sr.rate_lower_bound:.4f}")
    print(f"{'N':>3} {'L':>14} {'eps':>9} {'k':>6} {'R_N':>7} {'floor':>7} {'sec':>6}")
    for n in range(args.n_min, args.n_max + 1):
        t = time.perf_counter()
        try:
            g = pairgraph.build(n, c, budget_log2=args.budget)
            r = rate_exact(g)
        except pairgraph.BudgetExceeded as e:
            print(f"{n:>3}  stopped: {e}")
            break
        eps = float(g.density().value)
        floor = math.log2(max(1, math.ceil(eps))) / (n * math.log2(c.q))
        print(f"{n:>3} {g.n_transitions:>14} {eps:>9.3f} {r.k:>6} {r.rate:>7.4f} "
              f"{floor:>7.4f} {time.perf_counter() - t:>6.2f}")


if __name__ == "__main__":
    main()
