"""Three-loop adaptive Uzawa driver.

State is indexed by ``(i, j, k)``: ``i`` counts pressure-partition
refinements, ``j`` Uzawa pressure updates on a fixed partition and ``k``
velocity-mesh refinements for a fixed pressure. A single running index ``n``
numbers every visited state.
"""
from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Optional

from .estimator import EstimatorReport, doerfler_mark, estimate
from .fem import PressureField, VelocityField, l2_norm, l2_project_div, prolongate
from .mesh import Partition, Triangulation, initial_mesh, is_conforming, is_refinement, refine_conforming
from .problems import get_problem
from .solvers import SolveReport, SolverError, solve_velocity
from .tree_approx import binev

STEPS = ("solve", "pressure_refine", "uzawa_update", "velocity_refine")


class ConfigError(ValueError):
    pass


@dataclass
class AlgorithmConfig:
    kappa1: float = 0.0
    kappa2: float = 0.1
    kappa3: float = 0.3
    vartheta: float = 0.3
    theta: float = 0.3
    c_mark: float = 1.0
    solver: str = "direct"
    quad_order: int = 4
    degree: int = 1
    mu_tol: float = 0.0
    max_elements: int = 10_000
    max_steps: int = 100_000
    problem: str = "smooth"
    seed: int = 0
    check_invariants: bool = True

    def validate(self) -> "AlgorithmConfig":
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(0 <= self.kappa1 < 1, "kappa1 must satisfy 0 <= kappa1 < 1")
        need(0 < self.kappa2 < 1, "kappa2 must lie in (0, 1)")
        need(0 < self.kappa3 < 1, "kappa3 must lie in (0, 1)")
        need(0 < self.vartheta <= 1, "vartheta must lie in (0, 1]")
        need(0 < self.theta <= 1, "theta must lie in (0, 1]")
        need(self.kappa2 < self.vartheta, "invariant kappa2 < vartheta violated")
        need(self.c_mark >= 1, "c_mark must be >= 1")
        need(self.solver in ("direct", "pcg"), "solver must be 'direct' or 'pcg'")
        need(self.solver != "pcg" or self.kappa1 > 0, "pcg solver needs kappa1 > 0")
        need(self.degree == 1, "only velocity degree 1 is implemented")
        need(self.quad_order >= 1, "quad_order must be >= 1")
        need(self.mu_tol >= 0, "mu_tol must be >= 0")
        need(self.max_elements >= 1 and self.max_steps >= 1, "stop limits must be positive")
        need(0 <= self.seed < 2**64, "seed must be an unsigned 64-bit integer")
        try:
            get_problem(self.problem)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        return self

    @classmethod
    def from_mapping(cls, data: dict) -> "AlgorithmConfig":
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        kw = {}
        for key, raw in data.items():
            typ = type(getattr(cls, key)) if hasattr(cls, key) else str
            try:
                kw[key] = _coerce(raw, typ)
            except ValueError:
                raise ConfigError(f"bad value for {key}: {raw!r}") from None
        return cls(**kw).validate()


def _coerce(raw, typ):
    if not isinstance(raw, str):
        return typ(raw)
    s = raw.strip()
    if typ is bool:
        low = s.lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(s)
    if typ is int:
        return int(float(s)) if "e" in s.lower() else int(s)
    return typ(s)


@dataclass
class RunRecord:
    n: int
    i: int
    j: int
    k: int
    step: str
    n_partition: int
    n_elements: int
    eta: float
    div: float
    proj_div: float
    mu: float
    solver_mode: str
    solver_iterations: int
    solver_update_norm: float
    while_cond: bool
    if_cond: bool


CSV_COLUMNS = [f.name for f in fields(RunRecord)]


@dataclass
class RunLog:
    config: AlgorithmConfig
    records: list = field(default_factory=list)
    stop_reason: str = ""
    wall_time: float = 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.records:
            row = []
            for v in asdict(r).values():
                row.append(repr(v) if isinstance(v, float) else str(v))
            w.writerow(row)
        return buf.getvalue()

    def write_csv(self, path) -> None:
        Path(path).write_text(self.to_csv())

    @classmethod
    def read_csv(cls, path, config: Optional[AlgorithmConfig] = None) -> "RunLog":
        log = cls(config or AlgorithmConfig())
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                vals = {}
                for f in fields(RunRecord):
                    raw = row[f.name]
                    if f.type in ("int", int):
                        vals[f.name] = int(raw)
                    elif f.type in ("float", float):
                        vals[f.name] = float(raw)
                    elif f.type in ("bool", bool):
                        vals[f.name] = raw == "True"
                    else:
                        vals[f.name] = raw
                log.records.append(RunRecord(**vals))
        return log

    def column(self, name):
        return [getattr(r, name) for r in self.records]


@dataclass
class RunState:
    """Everything that defines the current ``(i, j, k)``."""

    i: int
    j: int
    k: int
    n: int
    P: Partition
    T: Triangulation
    Q: PressureField
    U: Optional[VelocityField] = None
    report: Optional[EstimatorReport] = None
    solve: Optional[SolveReport] = None


@dataclass
class RunResult:
    log: RunLog
    state: RunState


def step_predicates(eta: float, proj_div: float, div: float, kappa2: float, kappa3: float) -> dict:
    """Loop conditions: pressure refinement first, then an Uzawa update."""
    return {
        "while_cond": eta + proj_div <= kappa2 * (eta + div),
        "if_cond": eta <= kappa3 * proj_div,
    }


def uzawa_update(Q: PressureField, proj_div: PressureField) -> PressureField:
    """One Richardson step with unit damping on the current partition."""
    if Q.partition != proj_div.partition:
        raise ValueError("pressure fields live on different partitions")
    out = Q - proj_div
    scale = max(float(abs(out.coeffs).max(initial=0.0)), 1e-300)
    if abs(out.mean()) > 1e-13 * scale:
        out = out.zero_mean()
    return out


def _stop_reason(cfg: AlgorithmConfig, rec_mu: float, n_elem: int, n: int) -> str:
    if rec_mu <= cfg.mu_tol:
        return "mu_tol"
    if n_elem >= cfg.max_elements:
        return "max_elements"
    if n + 1 >= cfg.max_steps:
        return "max_steps"
    return ""


def run(
    config: AlgorithmConfig,
    callback: Optional[Callable[[RunState, RunRecord], None]] = None,
) -> RunResult:
    """Run the adaptive loop until the configured stop rule fires."""
    cfg = config.validate()
    problem = get_problem(cfg.problem)
    f = problem.force
    _, T0 = initial_mesh(problem.domain)
    st = RunState(0, 0, 0, 0, T0.as_partition(), T0, PressureField.zero(T0.as_partition()))
    log = RunLog(cfg)
    t_start = time.perf_counter()
    need_solve = True
    after_pressure_refine = False

    while True:
        if need_solve:
            hook = None
            if cfg.solver == "pcg":
                T_, Q_ = st.T, st.Q
                hook = lambda V: estimate(T_, V, Q_, f, cfg.quad_order).eta  # noqa: E731
            warm = prolongate(st.U, st.T) if (st.U is not None and cfg.solver == "pcg") else None
            try:
                st.U, st.solve = solve_velocity(
                    st.T, st.Q, f, cfg.solver, cfg.kappa1, hook, warm, cfg.quad_order
                )
            except SolverError:
                log.stop_reason = "solver_failure"
                log.wall_time = time.perf_counter() - t_start
                raise
        st.report = estimate(st.T, st.U, st.Q, f, cfg.quad_order)
        proj = l2_project_div(st.P, st.U)
        eta, div = st.report.eta, st.report.div
        pdiv = l2_norm(proj)
        mu = eta + div
        pred = step_predicates(eta, pdiv, div, cfg.kappa2, cfg.kappa3)
        if cfg.check_invariants:
            _check_state(st)
        if after_pressure_refine and pred["while_cond"]:
            raise AssertionError("pressure refinement did not clear the while condition")

        reason = _stop_reason(cfg, mu, len(st.T), st.n)
        if reason:
            step = "solve"
        elif pred["while_cond"]:
            step = "pressure_refine"
        elif pred["if_cond"]:
            step = "uzawa_update"
        else:
            step = "velocity_refine"
        rec = RunRecord(
            st.n, st.i, st.j, st.k, step, len(st.P), len(st.T), eta, div, pdiv, mu,
            st.solve.mode, st.solve.iterations, st.solve.update_norm,
            pred["while_cond"], pred["if_cond"],
        )
        log.records.append(rec)
        if callback is not None:
            callback(st, rec)
        if reason:
            log.stop_reason = reason
            break

        after_pressure_refine = step == "pressure_refine"
        if step == "pressure_refine":
            P_new = binev(st.P, st.U, cfg.vartheta)
            st.Q = st.Q.on(P_new)
            st.P = P_new
            st.i, st.j, st.k = st.i + 1, 0, 0
            need_solve = False  # same mesh, same pressure function, same velocity
        elif step == "uzawa_update":
            st.Q = uzawa_update(st.Q, proj)
            st.j, st.k = st.j + 1, 0
            need_solve = True
        else:
            marked = doerfler_mark(st.report, cfg.theta, cfg.c_mark)
            st.T = refine_conforming(st.T, marked)
            st.k += 1
            need_solve = True
        st.n += 1

    log.wall_time = time.perf_counter() - t_start
    return RunResult(log, st)


def _check_state(st: RunState) -> None:
    if not is_refinement(st.T, st.P):
        raise AssertionError("velocity mesh does not refine the pressure partition")
    if not is_conforming(st.T):
        raise AssertionError("velocity mesh is not conforming")


def velocity_loop_bound_violations(log: RunLog, kappa2: float, kappa3: float) -> list[int]:
    """Records inside a velocity loop where ``mu`` exceeds ``(1 + 1/kappa3) eta / kappa2``.

    The bound applies to every state that is followed by a velocity refinement.
    """
    c = (1 + 1 / kappa3) / kappa2
    bad = []
    for r in log.records:
        if r.step == "velocity_refine" and not (r.eta <= r.mu * (1 + 1e-12) and r.mu <= c * r.eta * (1 + 1e-12)):
            bad.append(r.n)
    return bad


def index_sequence_ok(log: RunLog) -> bool:
    """Check that consecutive indices follow the allowed transitions."""
    recs = log.records
    for a, b in zip(recs, recs[1:]):
        if b.n != a.n + 1:
            return False
        if a.step == "pressure_refine":
            ok = (b.i, b.j, b.k) == (a.i + 1, 0, 0)
        elif a.step == "uzawa_update":
            ok = (b.i, b.j, b.k) == (a.i, a.j + 1, 0)
        elif a.step == "velocity_refine":
            ok = (b.i, b.j, b.k) == (a.i, a.j, a.k + 1)
        else:
            ok = False
        if not ok:
            return False
    return math.isfinite(recs[-1].mu) if recs else True
