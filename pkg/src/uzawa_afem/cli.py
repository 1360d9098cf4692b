"""Command line front end: ``uzawa-afem {run,verify,oracle,plotdata}``.

Exit codes: 0 success, 1 invalid input, 2 runtime failure (partial outputs
are still written), 3 verification failures.
"""
from __future__ import annotations

import argparse
import configparser
import hashlib
import json
import math
import platform
import sys
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .analysis import AnalysisError, approx_class_oracle, fit_linear_convergence, fit_rate, mesh_changing_points
from .uzawa import AlgorithmConfig, ConfigError, RunLog, run

EXIT_OK, EXIT_INPUT, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


class InputError(Exception):
    pass


def read_config(path) -> tuple[dict, bytes]:
    """Parse ``key = value`` lines; a leading ``[config]`` header is optional."""
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise InputError(f"cannot read config: {exc}") from None
    text = raw.decode()
    if not text.lstrip().startswith("["):
        text = "[config]\n" + text
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise InputError(f"malformed config: {exc}") from None
    extra = [s for s in parser.sections() if s != "config"]
    if extra:
        raise InputError(f"unknown config sections: {', '.join(extra)}")
    return dict(parser["config"]) if parser.has_section("config") else {}, raw


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _versions() -> dict:
    return {"uzawa_afem": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__}


def _json_number(x):
    return x if x is None or math.isfinite(x) else None


def summarize(log: RunLog) -> dict:
    recs = log.records
    try:
        s_hat = fit_rate(log).s
    except AnalysisError:
        s_hat = None
    try:
        q_hat = fit_linear_convergence(log).q
    except AnalysisError:
        q_hat = None
    return {
        "mu_final": _json_number(recs[-1].mu) if recs else None,
        "s_hat": s_hat,
        "q_hat": q_hat,
        "n_steps": len(recs),
        "elements_final": recs[-1].n_elements if recs else 0,
        "stop_reason": log.stop_reason,
        "config": asdict(log.config),
    }


def cmd_run(args) -> int:
    values, raw = read_config(args.config)
    for key, flag in (("seed", args.seed), ("max_elements", args.max_elements), ("mu_tol", args.mu_tol)):
        if flag is not None:
            values[key] = flag
    cfg = AlgorithmConfig.from_mapping(values)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"runlog": out / "runlog.csv", "summary": out / "summary.json", "manifest": out / "manifest.json"}
    log = RunLog(cfg)
    t0 = time.perf_counter()
    status, error = EXIT_OK, None
    try:
        log = run(cfg, callback=lambda st, rec: log.records.append(rec)).log
    except Exception as exc:  # keep partial outputs
        status, error = EXIT_RUNTIME, f"{type(exc).__name__}: {exc}"
        log.stop_reason = log.stop_reason or "error"
    wall = time.perf_counter() - t0
    log.write_csv(paths["runlog"])
    summary = summarize(log)
    if error:
        summary["error"] = error
    paths["summary"].write_text(json.dumps(summary, indent=2) + "\n")
    manifest = {
        "config": asdict(cfg),
        "input_sha256": hashlib.sha256(raw).hexdigest(),
        "outputs": {k: str(v) for k, v in paths.items()},
        "versions": _versions(),
        "wall_time_s": wall,
    }
    paths["manifest"].write_text(json.dumps(manifest, indent=2) + "\n")
    if error:
        print(error, file=sys.stderr)
    else:
        print(json.dumps({k: summary[k] for k in ("mu_final", "s_hat", "q_hat", "n_steps", "elements_final")}))
    return status


def cmd_verify(args) -> int:
    from .checks import SUITES, run_suites

    names = args.suite or None
    for n in names or []:
        if n not in SUITES:
            raise InputError(f"unknown suite {n!r}; choose from {', '.join(SUITES)}")
    results = run_suites(names, quick=args.quick, seed=args.seed or 0)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    if failed:
        print(f"{failed} verification suite(s) failed", file=sys.stderr)
        return EXIT_VERIFY
    return EXIT_OK


def cmd_oracle(args) -> int:
    if not 0 <= args.n_max <= 12:
        raise InputError("--n-max must lie in [0, 12]")
    try:
        res = approx_class_oracle(args.problem, args.n_max, args.s, args.depth)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["N,envelope,count"] + [f"{n},{e!r},{c}" for n, (e, c) in enumerate(zip(res.envelope, res.counts))]
    (out / "envelope.csv").write_text("\n".join(lines) + "\n")
    summary = {"problem": args.problem, "n_max": args.n_max, "complete": res.complete, "meshes": res.meshes,
               "s_envelope": res.s_envelope, "class_by_count": res.class_by_count,
               "class_by_accuracy": res.class_by_accuracy}
    (out / "oracle.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary))
    return EXIT_OK if res.complete else EXIT_RUNTIME


def cmd_plotdata(args) -> int:
    try:
        log = RunLog.read_csv(args.runlog)
    except (OSError, KeyError, ValueError) as exc:
        raise InputError(f"cannot read run log: {exc}") from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    x, mu = mesh_changing_points(log)
    recs = log.records
    n0 = recs[0].n_elements if recs else 0
    xs = [r.n_elements - n0 + 1 for r in recs]
    series = {"mu.dat": (x, mu), "eta.dat": (xs, log.column("eta")), "div.dat": (xs, log.column("div"))}
    for name, (a, b) in series.items():
        body = "".join(f"{int(u)} {float(v)!r}\n" for u, v in zip(a, b))
        (out / name).write_text("# elements_added_plus_one value\n" + body)
    print("\n".join(str(out / n) for n in series))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uzawa-afem", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run the adaptive Uzawa loop")
    r.add_argument("--config", required=True, help="key = value file with AlgorithmConfig fields")
    r.add_argument("--out", default="out", help="output directory")
    r.add_argument("--seed", type=_seed)
    r.add_argument("--max-elements", type=int)
    r.add_argument("--mu-tol", type=float)
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="run the property suites")
    v.add_argument("--suite", action="append", help="restrict to a suite (repeatable)")
    v.add_argument("--quick", action="store_true", help="smaller sample sizes")
    v.add_argument("--seed", type=_seed)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="best-mesh envelope by exhaustive enumeration")
    o.add_argument("--problem", default="smooth")
    o.add_argument("--n-max", type=int, default=10)
    o.add_argument("--s", type=float, default=0.5)
    o.add_argument("--depth", type=int, default=3)
    o.add_argument("--out", default="out")
    o.set_defaults(func=cmd_oracle)

    d = sub.add_parser("plotdata", help="two-column log-log data from a run log")
    d.add_argument("runlog")
    d.add_argument("--out", default="out")
    d.set_defaults(func=cmd_plotdata)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return args.func(args)
    except (InputError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
