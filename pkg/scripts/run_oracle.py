"""Best-mesh envelope by enumeration next to the adaptive run at the same sizes.

Usage: python scripts/run_oracle.py [--problem smooth] [--n-max 10]
"""
import argparse

import numpy as np

from uzawa_afem.analysis import approx_class_oracle
from uzawa_afem.checks import matched_counts_fit
from uzawa_afem.uzawa import AlgorithmConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--problem", default="smooth")
    ap.add_argument("--n-max", type=int, default=10)
    ap.add_argument("--depth", type=int, default=3)
    args = ap.parse_args()
    orc = approx_class_oracle(args.problem, args.n_max, depth=args.depth)
    log = run(AlgorithmConfig(problem=args.problem, max_elements=400)).log
    x, mu, s_adapt = matched_counts_fit(log, args.n_max)
    adaptive = dict(zip((x - 1).astype(int).tolist(), mu.tolist()))
    print(f"{'N':>3} {'meshes':>7} {'envelope':>12} {'adaptive mu':>12}")
    for n, (e, c) in enumerate(zip(orc.envelope, orc.counts)):
        a = f"{adaptive[n]:12.6f}" if n in adaptive else " " * 12
        print(f"{n:3d} {c:7d} {e:12.6f} {a}")
    env = orc.envelope[(x - 1).astype(int)]
    s_matched = -float(np.polyfit(np.log(x), np.log(env), 1)[0])
    print(f"envelope rate (all N) {orc.s_envelope:.4f}, at adaptive counts {s_matched:.4f}")
    print(f"adaptive rate {s_adapt:.4f}, ratio {s_matched / s_adapt:.3f}")
    print(f"class constant by count {orc.class_by_count:.4f}, by accuracy {orc.class_by_accuracy:.4f}")


if __name__ == "__main__":
    main()
