"""Monte Carlo harness for the synthetic benchmarks.

A cell fixes (n, p, K, separation, alpha, eta, number of pure rows). Replicate
r of a cell uses seed ``base_seed + r`` and nothing else, so replicates can run
in any order or in parallel and still aggregate to identical numbers.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import svg
from .errors import CellFailure, InvalidConfig, MMSGError
from .estimators import spg, wsc
from .metrics import aligned_l1_error
from .model import NoiseScenario, synthesize

log = logging.getLogger(__name__)

DEFAULT_SEED = 0xC0FFEE
DESK_REPLICATES = 20
FULL_REPLICATES = 200
METHODS = ("spg", "wsc")
SCENARIOS = ("ghe", "she")
MAX_FAILURE_RATE = 0.10


def delta_formula(c_delta: float, k: int, n: int, p: int, d: int | None = None) -> float:
    """Separation c * sqrt(K ln d) * max(1, (p/n)^(1/4)), with d = max(n, p) by default."""
    if min(n, p, k) < 1:
        raise InvalidConfig("n, p and K must be positive")
    d = max(n, p) if d is None else d
    return c_delta * math.sqrt(k * math.log(d)) * max(1.0, (p / n) ** 0.25)


@dataclass(frozen=True)
class Cell:
    n: int
    p: int
    k: int = 4
    c_delta: float | None = 10.0
    delta: float | None = None
    alpha: float = 0.5
    eta: float = 1.0
    pure_fraction: float | None = 0.4
    n_pure: int | None = None
    setting: str = ""
    sweep: str = ""
    sweep_value: float = float("nan")

    def resolved_delta(self) -> float:
        if self.delta is not None:
            return float(self.delta)
        if self.c_delta is None:
            raise InvalidConfig("a cell needs either delta or c_delta")
        return delta_formula(self.c_delta, self.k, self.n, self.p)

    def resolved_n_pure(self) -> int:
        if self.n_pure is not None:
            return int(self.n_pure)
        if self.pure_fraction is None:
            raise InvalidConfig("a cell needs either n_pure or pure_fraction")
        return max(int(math.floor(self.pure_fraction * self.n)), self.k)

    def validate(self) -> None:
        if not 1 <= self.k <= min(self.n, self.p):
            raise InvalidConfig(f"cell needs 1 <= K <= min(n, p): {self}")
        if not self.k <= self.resolved_n_pure() <= self.n:
            raise InvalidConfig(f"cell needs K <= n_pure <= n: {self}")
        if self.alpha <= 0 or self.eta <= 0.5:
            raise InvalidConfig(f"cell needs alpha > 0 and eta > 0.5: {self}")


@dataclass
class ExperimentSpec:
    experiment_id: str
    cells: list
    replicates: int = DESK_REPLICATES
    base_seed: int = DEFAULT_SEED
    methods: tuple = METHODS
    scenarios: tuple = SCENARIOS

    def __post_init__(self):
        if self.replicates < 1:
            raise InvalidConfig("replicates must be >= 1")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise InvalidConfig(f"unknown methods {sorted(bad)}")
        bad = set(self.scenarios) - set(SCENARIOS)
        if bad:
            raise InvalidConfig(f"unknown scenarios {sorted(bad)}")
        for c in self.cells:
            c.validate()


@dataclass
class MethodStats:
    mean_error: float
    stderr: float
    replicates: int
    failures: int
    mean_time: float


@dataclass
class ResultRow:
    experiment: str
    scenario: str
    cell: Cell
    method: str
    stats: MethodStats
    mean_beta: float


@dataclass
class ExperimentResult:
    experiment_id: str
    rows: list = field(default_factory=list)

    def lookup(self, method: str, scenario: str | None = None, **cell_fields) -> list:
        out = []
        for r in self.rows:
            if r.method != method or (scenario is not None and r.scenario != scenario):
                continue
            if all(getattr(r.cell, k) == v for k, v in cell_fields.items()):
                out.append(r)
        return out


def _beta(pi: np.ndarray) -> float:
    n, k = pi.shape
    s = np.linalg.svd(pi, compute_uv=False)
    return float(s[-1] ** 2 / (n / k))


def run_replicate(cell: Cell, scenario: str, seed: int, methods=METHODS) -> dict:
    """One synthetic draw and every method on it.

    Returns {"beta": float, method: (error or None, seconds, message)}.
    """
    x, inst = synthesize(cell.n, cell.p, cell.k, cell.resolved_delta(), cell.resolved_n_pure(),
                         cell.alpha, NoiseScenario(scenario, cell.eta), seed)
    out = {"beta": _beta(inst.pi)}
    for m in methods:
        t0 = time.perf_counter()
        try:
            if m == "spg":
                pi_hat = spg(x, cell.k).pi_hat
            else:
                pi_hat = wsc(x, cell.k, rng=np.random.default_rng([seed, 1])).one_hot
            out[m] = (aligned_l1_error(pi_hat, inst.pi), time.perf_counter() - t0, "")
        except MMSGError as exc:
            out[m] = (None, time.perf_counter() - t0, f"{type(exc).__name__}: {exc}")
    return out


def _run_replicate_args(args):
    return run_replicate(*args)


def _mean_stderr(values: list) -> tuple:
    m = len(values)
    mean = math.fsum(values) / m
    if m == 1:
        return mean, 0.0
    var = math.fsum((v - mean) ** 2 for v in values) / (m - 1)
    return mean, math.sqrt(var / m)


def aggregate(per_rep: dict, methods, replicates: int) -> tuple:
    """Reduce {replicate index: run_replicate output} into per-method stats.

    Values are sorted before summation, so the result does not depend on
    completion order.
    """
    stats = {}
    for m in methods:
        errs = sorted(per_rep[r][m][0] for r in per_rep if per_rep[r][m][0] is not None)
        times = sorted(per_rep[r][m][1] for r in per_rep)
        failures = replicates - len(errs)
        if failures > MAX_FAILURE_RATE * replicates:
            msgs = sorted({per_rep[r][m][2] for r in per_rep if per_rep[r][m][0] is None})
            raise CellFailure(f"{m}: {failures}/{replicates} replicates failed ({'; '.join(msgs)})")
        if not errs:
            raise CellFailure(f"{m}: no successful replicates")
        mean, se = _mean_stderr(errs)
        stats[m] = MethodStats(mean, se, len(errs), failures, math.fsum(times) / len(times))
    betas = sorted(per_rep[r]["beta"] for r in per_rep)
    return stats, math.fsum(betas) / len(betas)


def run_cell(cell: Cell, scenario: str, replicates: int, base_seed: int = DEFAULT_SEED,
             methods=METHODS, jobs: int = 1) -> tuple:
    """Run replicates 1..R of a cell; returns ({method: MethodStats}, mean beta)."""
    cell.validate()
    tasks = {r: (cell, scenario, base_seed + r, tuple(methods)) for r in range(1, replicates + 1)}
    if jobs > 1 and replicates > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_replicate_args, tasks.values()))
        per_rep = dict(zip(tasks.keys(), results))
    else:
        per_rep = {r: run_replicate(*args) for r, args in tasks.items()}
    for r, out in per_rep.items():
        for m in methods:
            if out[m][0] is None:
                log.warning("replicate %d of %s/%s skipped: %s", r, cell, m, out[m][2])
    return aggregate(per_rep, methods, replicates)


def run_experiment(spec: ExperimentSpec, jobs: int = 1) -> ExperimentResult:
    result = ExperimentResult(spec.experiment_id)
    for scenario in spec.scenarios:
        for cell in spec.cells:
            t0 = time.perf_counter()
            stats, beta = run_cell(cell, scenario, spec.replicates, spec.base_seed, spec.methods, jobs)
            summary = ", ".join(f"{m}={s.mean_error:.4f}" for m, s in stats.items())
            log.info("%s %s %s %s=%g: %s (%.1fs)", spec.experiment_id, scenario, cell.setting,
                     cell.sweep, cell.sweep_value, summary, time.perf_counter() - t0)
            for m in spec.methods:
                result.rows.append(ResultRow(spec.experiment_id, scenario, cell, m, stats[m], beta))
    return result


# -- built-in grids -----------------------------------------------------------

def _setting(n: int, p: int) -> str:
    return f"n={n},p={p}"


def builtin_cells(experiment_id: str, scale: str = "desk") -> list:
    """Parameter grids of the four benchmark experiments.

    Desk scale keeps the endpoints of each sweep and thins the interior.
    """
    full = scale == "full"
    if scale not in ("desk", "full"):
        raise InvalidConfig(f"scale must be 'desk' or 'full', got {scale!r}")
    k = 4
    if experiment_id == "exp1":
        # separation frozen at the smallest n and largest d of the sweep
        delta = delta_formula(10.0, k, 500, 2000, d=max(5000, 2000))
        ns = list(range(500, 5001, 500)) if full else [500, 1000, 2000, 5000]
        return [Cell(n=n, p=2000, k=k, c_delta=None, delta=delta, setting="p=2000", sweep="n",
                     sweep_value=n) for n in ns]
    if experiment_id == "exp2":
        cs = list(range(10, 101, 10)) if full else [10, 50, 100]
        return [Cell(n=n, p=p, k=k, c_delta=float(c), setting=_setting(n, p), sweep="c_delta", sweep_value=c)
                for n, p in ((200, 2000), (2000, 20)) for c in cs]
    if experiment_id == "exp3":
        alphas = [0.2, 0.5, 1.0, 2.0, 5.0] if full else [0.2, 1.0, 5.0]
        return [Cell(n=n, p=p, k=k, alpha=a, setting=_setting(n, p), sweep="alpha", sweep_value=a)
                for n, p in ((200, 2000), (2000, 200)) for a in alphas]
    if experiment_id == "exp4":
        fracs = [round(0.05 * i, 2) for i in range(1, 11)] if full else [0.05, 0.25, 0.5]
        return [Cell(n=n, p=p, k=k, pure_fraction=c, setting=_setting(n, p), sweep="c_pure", sweep_value=c)
                for n, p in ((2000, 20), (200, 2000)) for c in fracs]
    raise InvalidConfig(f"unknown experiment id {experiment_id!r}")


def builtin_spec(experiment_id: str, scale: str = "desk", **overrides) -> ExperimentSpec:
    spec = ExperimentSpec(experiment_id, builtin_cells(experiment_id, scale),
                          replicates=FULL_REPLICATES if scale == "full" else DESK_REPLICATES)
    return replace(spec, **overrides) if overrides else spec


def restrict(cells: list, sweep_values=None, settings=None) -> list:
    """Keep cells whose sweep value / setting is listed (None keeps all)."""
    out = []
    for c in cells:
        if sweep_values is not None and not any(math.isclose(c.sweep_value, v) for v in sweep_values):
            continue
        if settings is not None and c.setting not in settings:
            continue
        out.append(c)
    return out


def spec_from_dict(cfg: dict, scale: str = "desk") -> ExperimentSpec:
    """Build a spec from a JSON config.

    Keys: experiment_id, scale, replicates, base_seed, methods, scenarios, and
    either ``grid`` (built-in ids: {"values": [...], "settings": ["n=200,p=2000"]})
    or ``cells`` (custom: list of Cell field dicts).
    """
    known = {"experiment_id", "scale", "replicates", "base_seed", "methods", "scenarios", "grid", "cells",
             "output_dir", "csv", "svg"}
    extra = set(cfg) - known
    if extra:
        raise InvalidConfig(f"unknown experiment config keys {sorted(extra)}")
    exp_id = cfg.get("experiment_id", "custom")
    scale = cfg.get("scale", scale)
    if exp_id == "custom":
        try:
            cells = [Cell(**c) for c in cfg.get("cells", [])]
        except TypeError as exc:
            raise InvalidConfig(f"bad cell definition: {exc}") from exc
    else:
        cells = builtin_cells(exp_id, scale)
        grid = cfg.get("grid") or {}
        cells = restrict(cells, grid.get("values"), grid.get("settings"))
    return ExperimentSpec(
        experiment_id=exp_id,
        cells=cells,
        replicates=int(cfg.get("replicates", FULL_REPLICATES if scale == "full" else DESK_REPLICATES)),
        base_seed=int(cfg.get("base_seed", DEFAULT_SEED)),
        methods=tuple(cfg.get("methods", METHODS)),
        scenarios=tuple(cfg.get("scenarios", SCENARIOS)),
    )


# -- output -------------------------------------------------------------------

CSV_FIELDS = ("experiment", "setting", "scenario", "n", "p", "K", "delta", "c_delta", "alpha", "eta",
              "n_pure", "sweep", "sweep_value", "method", "mean_error", "stderr", "replicates", "failures",
              "mean_beta")


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return f"{float(v):.10g}"


def results_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for r in result.rows:
        c = r.cell
        w.writerow([r.experiment, c.setting, r.scenario, c.n, c.p, c.k, _num(c.resolved_delta()),
                    _num(c.c_delta), _num(c.alpha), _num(c.eta), c.resolved_n_pure(), c.sweep,
                    _num(c.sweep_value), r.method, _num(r.stats.mean_error), _num(r.stats.stderr),
                    r.stats.replicates, r.stats.failures, _num(r.mean_beta)])
    return buf.getvalue()


def results_svg(result: ExperimentResult) -> str:
    settings = sorted({r.cell.setting for r in result.rows})
    groups: dict = {}
    for r in result.rows:
        label = f"{r.method.upper()} {r.scenario.upper()}"
        if len(settings) > 1:
            label = f"{r.cell.setting} {label}"
        groups.setdefault(label, []).append((float(r.cell.sweep_value), r.stats.mean_error))
    series = [(label, [x for x, _ in sorted(pts)], [y for _, y in sorted(pts)])
              for label, pts in groups.items()]
    sweep = result.rows[0].cell.sweep if result.rows else ""
    return svg.line_chart(series, title=f"{result.experiment_id}: mean aligned l1 error",
                          xlabel=sweep or "cell", ylabel="mean aligned l1 error")


def emit_results(result: ExperimentResult, csv_path, svg_path) -> None:
    if not result.rows:
        raise InvalidConfig("nothing to emit: the result is empty")
    Path(csv_path).write_text(results_csv(result))
    Path(svg_path).write_text(results_svg(result))
