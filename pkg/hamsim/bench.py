"""
Benchmark harness: seeded propagation experiments on the periodic lattice.

Every experiment evolves a seeded random state under the half-Laplacian of a
length-L ring, H = H_odd + H_even, and scores the result against the exact
propagator. Grid scans run points on a thread pool and return records in
submission order, so a rerun with the same configuration reproduces the CSV
byte for byte apart from the timing column.

Usage:
    config = ExperimentConfig(method="refl-series", length=128, t=100.0)
    records = run_error_scan(config)
    emit_outputs(records, "errors.csv", config)

Dependencies:
    - numpy, csv, concurrent.futures
    - util (config errors, manifest), every propagator module
"""

import csv
import io
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from functools import lru_cache
from pathlib import Path

from .chebyshev_evolution import evolve_chebyshev, plan_chebyshev, spectral_bounds
from .grover_search import search_steps
from .hamiltonian_models import (
    color_count,
    edge_coloring,
    laplacian_dense,
    laplacian_parts,
)
from .linalg_core import NORMS, exact_evolve, state_distance
from .projector_series import (
    evolve_projection_series,
    evolve_reflection_series,
    heuristic_order,
    series_part_applications,
    series_steps,
    truncation_order,
)
from .seeding import random_initial_state
from .trotter_evolution import (
    MAX_DENSE_DIM,
    choose_steps,
    commutator_error_norms,
    evolve_trotter,
    repetition_cost,
    trotter_part_applications,
)
from .util import ConfigError, parse_count, write_manifest

logger = logging.getLogger(__name__)

METHODS = (
    "trotter1",
    "trotter2",
    "proj-series",
    "refl-series",
    "chebyshev",
    "one-shot",
)
TROTTER_METHODS = {"trotter1": 2, "trotter2": 3}
SERIES_METHODS = {"proj-series": "projection", "refl-series": "reflection"}
CHEBYSHEV_METHODS = {"chebyshev": "stepped", "one-shot": "one_shot"}
GRAPH_METHODS = ("trotter1", "trotter2", "chebyshev", "one-shot")
CSV_HEADER = (
    "method",
    "L",
    "t",
    "dt",
    "p",
    "m",
    "seed",
    "norm",
    "error",
    "part_applications",
    "wall_ms",
)
# sequential stepping below this count, binary powering of the step above it
FAST_FORWARD_MIN = 64
# series orders swept per time step, and the time-scan settings
SCAN_ORDERS = range(1, 21)
SCAN_SERIES_DTS = (1.0, math.pi)
SCAN_STEP_EXPONENTS = range(0, 23)
TIME_SCAN_ORDERS = {"refl-series": 8, "proj-series": 10}
TIME_SCAN_TROTTER_DTS = (1e-4, 1e-3, 1e-2)


@dataclass(frozen=True)
class ExperimentConfig:
    method: str = "refl-series"
    length: int = 128
    t: float = 100.0
    dt: float = math.pi
    order: int | str = "auto"
    steps: int | str = "auto"
    epsilon: float = 1e-5
    seed: int = 1
    norm: str = "spectral"
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}, expected {METHODS}")
        if self.length < 4 or self.length % 2:
            raise ConfigError(f"length must be even and >= 4, got {self.length}")
        if self.norm not in NORMS:
            raise ConfigError(f"unknown norm {self.norm!r}, expected {NORMS}")
        if self.t < 0:
            raise ConfigError(f"time must be non-negative, got {self.t}")
        if self.dt <= 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if self.workers < 1:
            raise ConfigError(f"workers must be positive, got {self.workers}")

    @classmethod
    def from_mapping(cls, values):
        """Builds a config from raw strings (config file or CLI)."""
        try:
            return cls(
                method=str(values.get("method", cls.method)),
                length=int(values.get("length", cls.length)),
                t=float(values.get("time", cls.t)),
                dt=float(values.get("dt", cls.dt)),
                order=parse_count(values.get("order"), "order"),
                steps=parse_count(values.get("steps"), "steps"),
                epsilon=float(values.get("epsilon", cls.epsilon)),
                seed=int(values.get("seed", cls.seed)),
                norm=str(values.get("norm", cls.norm)),
                output=values.get("output"),
                workers=int(values.get("workers", cls.workers)),
            )
        except (TypeError, ValueError) as err:
            if isinstance(err, ConfigError):
                raise
            raise ConfigError(f"invalid configuration value: {err}") from err

    def settings(self):
        return asdict(self)

    def resolve(self, parts=None):
        """
        Replaces `auto` order and steps by the values the method will use.
        The estimates run on `parts`, by default the lattice halves.
        """
        order, steps = self.order, self.steps
        if parts is None:
            parts = laplacian_parts(self.length)
        if self.method in TROTTER_METHODS:
            k = TROTTER_METHODS[self.method]
            order = k
            if steps == "auto":
                if self.t == 0:
                    steps = 1
                else:
                    estimate = commutator_error_norms(parts, self.norm)
                    steps = choose_steps(self.t, self.epsilon, k, estimate.term(k))
        elif self.method in SERIES_METHODS:
            if steps == "auto":
                steps = series_steps(self.t, self.dt)[0]
            if order == "auto":
                order = (
                    truncation_order(
                        SERIES_METHODS[self.method], self.t, self.dt, self.epsilon
                    )
                    if self.t
                    else 0
                )
        else:
            plan = plan_chebyshev(
                spectral_bounds(parts),
                self.t,
                self.epsilon,
                mode=CHEBYSHEV_METHODS[self.method],
                order=None if order == "auto" else order,
                dt=self._chebyshev_dt(),
            )
            order, steps = plan.order, plan.steps
        if steps == 0 and self.t != 0:
            raise ConfigError(f"{self.method}: zero steps cannot cover t={self.t}")
        resolved = replace(self, order=order, steps=steps)
        logger.debug(
            "resolved %s: p=%s, m=%s (from p=%s, m=%s)",
            self.method,
            order,
            steps,
            self.order,
            self.steps,
        )
        return resolved

    def _chebyshev_dt(self):
        if self.method != "chebyshev":
            return None
        if self.steps != "auto" and self.steps:
            return self.t / self.steps
        return self.dt


@dataclass(frozen=True)
class ExperimentRecord:
    method: str
    L: int
    t: float
    dt: float
    p: int
    m: int
    seed: int
    norm: str
    error: float
    part_applications: int
    wall_ms: float

    def as_row(self):
        row = []
        for item in fields(self):
            value = getattr(self, item.name)
            if isinstance(value, float):
                row.append(format(value, ".17g"))
            else:
                row.append(str(value))
        return row

    @classmethod
    def from_row(cls, row):
        converted = {}
        for item, raw in zip(fields(cls), row):
            kind = {int: int, float: float}.get(item.type, str)
            converted[item.name] = kind(raw)
        return cls(**converted)


class CountingPart:
    """Proxy that counts apply / exp_apply calls on a part."""

    def __init__(self, part):
        self.part = part
        self.count = 0

    def __getattr__(self, name):
        return getattr(self.part, name)

    def apply(self, x):
        self.count += 1
        return self.part.apply(x)

    def exp_apply(self, x, dt):
        self.count += 1
        return self.part.exp_apply(x, dt)


@lru_cache(maxsize=16)
def _reference(length, t, seed):
    """Exact exp(-iHt) x0; cached per (L, t, seed) and treated as read-only."""
    x0 = random_initial_state(length, seed)
    return exact_evolve(laplacian_dense(length), t, x0)


def method_parts(config):
    """Parts a method propagates with: projector halves or their reflections."""
    parts = laplacian_parts(config.length)
    if config.method == "refl-series":
        return [part.as_reflection() for part in parts]
    return list(parts)


def _evolve(config, parts, x0, fast_forward, window=None):
    """Runs one resolved configuration; returns the final state."""
    if config.method in TROTTER_METHODS:
        return evolve_trotter(
            parts,
            config.t,
            config.steps,
            x0,
            order=TROTTER_METHODS[config.method],
            fast_forward=fast_forward,
        )
    dt = config.t / config.steps
    if window is None:
        window = spectral_bounds(laplacian_parts(config.length))
    if config.method == "proj-series":
        return evolve_projection_series(
            parts[0], parts[1], config.t, dt, config.order, x0
        )
    if config.method == "refl-series":
        return evolve_reflection_series(
            parts[0], parts[1], config.t, dt, config.order, x0
        )
    return evolve_chebyshev(
        parts,
        config.t,
        x0,
        eps=config.epsilon,
        mode=CHEBYSHEV_METHODS[config.method],
        window=window,
        order=config.order,
        dt=config._chebyshev_dt(),
    )


def part_applications(config):
    """Analytic part-application count of a resolved configuration."""
    if config.method in TROTTER_METHODS:
        return trotter_part_applications(
            config.steps, 2, TROTTER_METHODS[config.method]
        )
    if config.method in SERIES_METHODS:
        return series_part_applications(config.steps, config.order)
    # each Chebyshev order applies the whole sparse H once
    return config.steps * config.order


def run_experiment(config):
    """
    input: ExperimentConfig (auto fields allowed)
    output: ExperimentRecord
    """
    config = config.resolve()
    x0 = random_initial_state(config.length, config.seed)
    reference = _reference(config.length, config.t, config.seed)
    start = time.perf_counter()
    if config.t == 0:
        final = x0
    else:
        fast_forward = config.steps >= FAST_FORWARD_MIN
        final = _evolve(config, method_parts(config), x0, fast_forward)
    wall_ms = (time.perf_counter() - start) * 1000.0
    dt = config.t / config.steps if config.steps else 0.0
    return ExperimentRecord(
        method=config.method,
        L=config.length,
        t=float(config.t),
        dt=float(dt),
        p=int(config.order),
        m=int(config.steps),
        seed=config.seed,
        norm=config.norm,
        error=state_distance(final, reference),
        part_applications=part_applications(config),
        wall_ms=wall_ms,
    )


def measured_part_applications(config):
    """Counts part calls of a sequential run (keep m small)."""
    config = config.resolve()
    counters = [CountingPart(part) for part in method_parts(config)]
    x0 = random_initial_state(config.length, config.seed)
    _evolve(config, counters, x0, fast_forward=False)
    if config.method in CHEBYSHEV_METHODS:
        # one H application touches every part once
        return counters[0].count
    return sum(counter.count for counter in counters)


# Sparse graph input ----------------------------------------------------------------


@dataclass(frozen=True)
class GraphRun:
    config: ExperimentConfig
    dim: int
    colours: int
    error: float


def run_graph_experiment(config, graph):
    """
    Evolves a seeded state under a SparseHamiltonianGraph split by edge
    colouring and scores it against exact evolution. `auto` counts are
    resolved on the coloured parts.
    input: ExperimentConfig (auto fields allowed), SparseHamiltonianGraph
    output: GraphRun with the resolved configuration
    """
    if config.method not in GRAPH_METHODS:
        raise ConfigError(
            f"graph input supports {GRAPH_METHODS}, got {config.method!r}"
        )
    parts = edge_coloring(graph)
    if not parts:
        raise ConfigError("graph has neither edges nor diagonal entries")
    resolved = config.resolve(parts)
    x0 = random_initial_state(graph.dim, config.seed)
    reference = exact_evolve(graph.to_dense(), config.t, x0)
    if config.t == 0:
        final = x0
    else:
        fast_forward = (
            resolved.steps >= FAST_FORWARD_MIN and graph.dim <= MAX_DENSE_DIM
        )
        final = _evolve(
            resolved, parts, x0, fast_forward, window=spectral_bounds(parts)
        )
    return GraphRun(
        config=resolved,
        dim=graph.dim,
        colours=color_count(parts),
        error=state_distance(final, reference),
    )


# Grids ---------------------------------------------------------------------------


def run_grid(configs, workers=1):
    """Evaluates configs on a thread pool; records keep the input order."""
    configs = list(configs)
    if workers <= 1:
        return [run_experiment(config) for config in configs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run_experiment, configs))


def error_scan_grid(
    base,
    orders=SCAN_ORDERS,
    dts=SCAN_SERIES_DTS,
    step_exponents=SCAN_STEP_EXPONENTS,
):
    """Series: p swept at each dt. Trotter: m = 2^k. Chebyshev: p swept."""
    if base.method in TROTTER_METHODS:
        return [replace(base, steps=2**k) for k in step_exponents]
    if base.method in SERIES_METHODS:
        return [
            replace(base, dt=dt, order=p, steps="auto") for dt in dts for p in orders
        ]
    return [replace(base, order=p) for p in orders]


def run_error_scan(base, workers=None, **grid):
    configs = error_scan_grid(base, **grid)
    logger.debug("error scan: %d points for %s", len(configs), base.method)
    return run_grid(configs, workers or base.workers)


def time_scan_grid(base, times, trotter_dts=TIME_SCAN_TROTTER_DTS):
    """Series at fixed p and dt = 1; Trotter at fixed dt, m = t/dt."""
    if base.method in TROTTER_METHODS:
        return [
            replace(base, t=t, dt=dt, steps=max(1, round(t / dt)))
            for dt in trotter_dts
            for t in times
        ]
    if base.method in SERIES_METHODS:
        order = TIME_SCAN_ORDERS[base.method]
        return [replace(base, t=t, dt=1.0, order=order, steps="auto") for t in times]
    return [replace(base, t=t) for t in times]


def run_time_scan(base, times, workers=None, **grid):
    configs = time_scan_grid(base, times, **grid)
    return run_grid(configs, workers or base.workers)


def threshold_from_records(records, eps, key="p"):
    """Smallest value of `key` (p or m) whose error is below eps, or None."""
    hits = [getattr(r, key) for r in records if r.error < eps]
    return min(hits) if hits else None


# Complexity report --------------------------------------------------------------


@dataclass(frozen=True)
class ReportRow:
    method: str
    p: int | None
    m: int
    repetitions: int
    part_applications: int
    asymptotic_cost: float | None = None
    heuristic_p: int | None = None


def asymptotic_series_cost(t, eps):
    """t log(t/eps) / log log(t/eps)."""
    ratio = t / eps
    return t * math.log(ratio) / math.log(math.log(ratio))


def complexity_report(t, eps, n_items=1024, length=128, norm="spectral"):
    """Predicted p, m, R and part applications per method; arithmetic only."""
    if t <= 0 or eps <= 0:
        raise ConfigError(f"report needs t > 0 and eps > 0, got t={t}, eps={eps}")
    rows = []
    for method, scheme in SERIES_METHODS.items():
        steps, _ = series_steps(t, math.pi)
        order = truncation_order(scheme, t, math.pi, eps)
        rows.append(
            ReportRow(
                method,
                order,
                steps,
                1,
                series_part_applications(steps, order),
                asymptotic_series_cost(t, eps),
                heuristic_order(t, eps),
            )
        )
    parts = laplacian_parts(length)
    estimate = commutator_error_norms(parts, norm)
    for method, k in TROTTER_METHODS.items():
        steps = choose_steps(t, eps, k, estimate.term(k))
        rows.append(
            ReportRow(method, None, steps, 1, trotter_part_applications(steps, 2, k))
        )
    plan = plan_chebyshev(spectral_bounds(parts), t, eps)
    rows.append(
        ReportRow("chebyshev", plan.order, plan.steps, 1, plan.steps * plan.order)
    )
    q = search_steps(n_items)
    reps, _ = repetition_cost(1.0 / n_items, eps)
    # one Grover step applies two reflections
    rows.append(ReportRow("grover", None, q, reps, 2 * q * reps))
    return rows


def format_report(rows):
    lines = [
        f"{'method':<12}{'p':>6}{'m':>12}{'R':>5}"
        f"{'applications':>16}{'asymp':>12}"
    ]
    for row in rows:
        p = "-" if row.p is None else str(row.p)
        cost = "-" if row.asymptotic_cost is None else f"{row.asymptotic_cost:.4g}"
        lines.append(
            f"{row.method:<12}{p:>6}{row.m:>12}{row.repetitions:>5}"
            f"{row.part_applications:>16}{cost:>12}"
        )
    return "\n".join(lines)


# Output ----------------------------------------------------------------------------


def records_to_csv(records):
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for record in records:
        writer.writerow(record.as_row())
    return out.getvalue()


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError(f"CSV header must be {','.join(CSV_HEADER)}")
    return [ExperimentRecord.from_row(row) for row in rows[1:]]


def plot_script(csv_name):
    """gnuplot script for error vs p, error vs log2 m and error vs t."""
    return "\n".join(
        [
            "set datafile separator ','",
            "set key autotitle columnhead",
            "set logscale y",
            "set terminal pngcairo size 900,600",
            f"set output '{Path(csv_name).stem}_order.png'",
            "set xlabel 'p'",
            "set ylabel 'error'",
            f"plot '{csv_name}' using 5:(strcol(1) ne 'trotter1' && "
            "strcol(1) ne 'trotter2' ? $9 : 1/0) with linespoints title 'series'",
            f"set output '{Path(csv_name).stem}_steps.png'",
            "set xlabel 'log2 m'",
            f"plot '{csv_name}' using (log($6)/log(2)):(strcol(1) eq 'trotter1' || "
            "strcol(1) eq 'trotter2' ? $9 : 1/0) with linespoints title 'trotter'",
            f"set output '{Path(csv_name).stem}_time.png'",
            "set logscale x",
            "set xlabel 't'",
            f"plot '{csv_name}' using 3:9 with points title 'error'",
            "",
        ]
    )


def emit_outputs(records, path, config=None):
    """
    Writes the CSV, a gnuplot script and the run manifest.
    output: list of written paths
    """
    path = Path(path)
    text = records_to_csv(records)
    script = path.with_suffix(".gp")
    try:
        path.write_text(text, encoding="utf-8")
        script.write_text(plot_script(path.name), encoding="utf-8")
        settings = config.settings() if config is not None else {}
        manifest = write_manifest(path, settings, text)
    except OSError as err:
        raise OSError(f"cannot write outputs next to {path}: {err}") from err
    logger.debug("wrote %d records to %s", len(records), path)
    return [path, script, manifest]
