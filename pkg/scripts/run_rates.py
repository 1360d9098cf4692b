"""Fitted convergence rates of adaptive and uniform runs for several problems.

Usage: python scripts/run_rates.py [--max-elements N] [--tuned] [--out DIR]
"""
import argparse
import json
from pathlib import Path

from uzawa_afem.analysis import AnalysisError, fit_linear_convergence, fit_rate
from uzawa_afem.checks import RATE_PARAMS, uniform_rate
from uzawa_afem.uzawa import AlgorithmConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--problems", nargs="+", default=["smooth", "lshape_constant", "lshape", "lshape_corner"])
    ap.add_argument("--max-elements", type=int, default=100_000)
    ap.add_argument("--tuned", action="store_true", help="use the looser loop tolerances of the rate experiment")
    ap.add_argument("--out", default=None, help="directory for run logs and rates.json")
    args = ap.parse_args()
    params = RATE_PARAMS if args.tuned else {}
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    table = {}
    for prob in args.problems:
        row = {}
        for mode, extra in (("adaptive", {}), ("uniform", {"theta": 1.0})):
            log = run(AlgorithmConfig(problem=prob, max_elements=args.max_elements, **params, **extra)).log
            try:
                s = fit_rate(log).s if mode == "adaptive" else uniform_rate(log)
            except AnalysisError as exc:
                s = f"n/a: {exc}"
            try:
                q = fit_linear_convergence(log).q
            except AnalysisError:
                q = None
            row[mode] = {"s": s, "q": q, "records": len(log.records),
                         "elements": log.records[-1].n_elements, "mu_final": log.records[-1].mu}
            if out:
                log.write_csv(out / f"{prob}_{mode}.csv")
        table[prob] = row
        print(prob, json.dumps(row))
    if out:
        (out / "rates.json").write_text(json.dumps({"params": params, "rates": table}, indent=2) + "\n")


if __name__ == "__main__":
    main()
