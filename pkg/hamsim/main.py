"""
hamsim command-line harness

This module runs the propagation experiments and the check suites:
- Evolve a seeded random state on the periodic lattice (or on a sparse
  Hamiltonian read from a graph file) and score it against exact evolution.
- Sweep truncation orders, step counts or evolution times and write CSV.
- Check the search equivalences, the projector identities and the
  fixed-point round-off scaling.
- Tabulate Bessel values and the predicted cost of every method.

Settings come from built-in defaults, then an optional flat `key = value`
config file, then the command-line flags.

Usage:
    - Enable debug mode:
        python -m hamsim.main evolve --debug
    - One run of the reflection series:
        python -m hamsim.main evolve --method refl-series --time 100
    - Error scan written to CSV (plus a gnuplot script and a manifest):
        python -m hamsim.main scan-error --method trotter1 --output trotter.csv
    - Search checks, identity suite, register scan:
        python -m hamsim.main grover --items 4 16 256
        python -m hamsim.main identities --instances 100
        python -m hamsim.main digital --bits-min 16 --bits-max 32
    - Bessel table and cost report:
        python -m hamsim.main bessel --time 10 --order 20
        python -m hamsim.main report --time 100 --epsilon 1e-5

Graph files (evolve --graph) hold one `j l re im` line per edge and one
`diag j v` line per non-zero diagonal entry; `#` starts a comment.

Exit codes: 0 success, 2 invalid configuration, 3 check breached,
4 I/O error.

Dependencies:
    - argparse, logging
    - bench, util and the propagator modules (custom modules)
"""

import argparse
import logging
import sys

import numpy as np

from .bench import (
    METHODS,
    ExperimentConfig,
    complexity_report,
    emit_outputs,
    format_report,
    records_to_csv,
    run_error_scan,
    run_experiment,
    run_graph_experiment,
    run_time_scan,
    threshold_from_records,
)
from .bessel import bessel_table
from .chebyshev_evolution import evolve_chebyshev
from .digital_register import (
    ROUNDING_MODES,
    fixed_point_chebyshev,
    register_bits,
    roundoff_scan,
    roundoff_slope,
)
from .grover_search import (
    equivalence_check_fractional,
    equivalence_check_integral,
    equivalence_check_unequal,
    search_run,
    search_time,
)
from .hamiltonian_models import SparseHamiltonianGraph, laplacian_parts
from .linalg_core import NORMS
from .projector_algebra import ResidualBreachError, raise_on_breach, run_identity_suite
from .seeding import random_initial_state
from .util import CONFIG_KEYS, ConfigError, load_config, merge_settings, sane_path

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BREACH = 3
EXIT_IO = 4
GROVER_TOL = 1e-10
GROVER_ITEMS = (2, 4, 16, 64, 256)
GROVER_WEIGHTS = (-1.0, -0.5, 0.3, 1.0)
GROVER_GRID = 20
DEFAULT_TIMES = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0)


# Builds the experiment configuration: defaults < config file < flags
def experiment_config(args):
    """
    input: parsed arguments of an experiment subcommand
    output: ExperimentConfig
    """
    file_values = load_config(args.config) if args.config else {}
    cli_values = {key: getattr(args, key, None) for key in CONFIG_KEYS}
    return ExperimentConfig.from_mapping(merge_settings({}, file_values, cli_values))


# Writes records to --output, or prints the CSV when no path is given
def publish(records, config):
    if config.output:
        for path in emit_outputs(records, config.output, config):
            print(f"wrote {path}")
    else:
        print(records_to_csv(records), end="")


# Evolves under a graph file; auto counts are resolved on its coloured parts
def _graph_evolve(args, config):
    graph = SparseHamiltonianGraph.from_edge_lines(
        sane_path(args.graph).read_text(encoding="utf-8")
    )
    run = run_graph_experiment(config, graph)
    resolved = run.config
    print(
        f"dim={run.dim} colours={run.colours} method={resolved.method} "
        f"p={resolved.order} m={resolved.steps}"
    )
    print(f"error={run.error:.6e}")


# Runs a single experiment and prints its record
def cmd_evolve(args):
    config = experiment_config(args)
    if args.graph:
        _graph_evolve(args, config)
        return EXIT_OK
    record = run_experiment(config)
    print(
        f"{record.method}: L={record.L} t={record.t:g} p={record.p} m={record.m} "
        f"error={record.error:.6e} applications={record.part_applications}"
    )
    if config.output:
        for path in emit_outputs([record], config.output, config):
            print(f"wrote {path}")
    return EXIT_OK


def cmd_scan_error(args):
    config = experiment_config(args)
    records = run_error_scan(config)
    key = "m" if config.method in ("trotter1", "trotter2") else "p"
    threshold = threshold_from_records(records, config.epsilon, key)
    logger.debug("error scan threshold %s=%s", key, threshold)
    publish(records, config)
    print(f"# smallest {key} with error < {config.epsilon:g}: {threshold}")
    return EXIT_OK


def cmd_scan_time(args):
    config = experiment_config(args)
    records = run_time_scan(config, args.times)
    publish(records, config)
    return EXIT_OK


# Search equivalences and success probabilities; breach -> exit 3
def cmd_grover(args):
    worst = 0.0
    status = EXIT_OK
    print(f"{'N':>8}{'Q':>8}{'success':>22}{'residual':>12}")
    for n_items in args.items:
        steps, probability = search_run(n_items)
        times = np.linspace(0.0, 2.0 * search_time(n_items), GROVER_GRID)
        residuals = [equivalence_check_integral(n_items)]
        residuals += [equivalence_check_fractional(n_items, t) for t in times]
        residuals += [
            equivalence_check_unequal(n_items, a1, t)
            for a1 in GROVER_WEIGHTS
            for t in times
        ]
        residual = max(residuals)
        worst = max(worst, residual)
        print(f"{n_items:>8}{steps:>8}{probability:>22.15f}{residual:>12.2e}")
        if probability < 1.0 - 1.0 / n_items - 1e-12:
            print(f"search with N={n_items} misses 1 - 1/N", file=sys.stderr)
            status = EXIT_BREACH
    if worst > GROVER_TOL:
        print(f"equivalence residual {worst:.2e} > {GROVER_TOL:.0e}", file=sys.stderr)
        status = EXIT_BREACH
    return status


def cmd_identities(args):
    results = run_identity_suite(args.instances, args.seed, args.dim)
    names = sorted({result.name for result in results})
    for name in names:
        rows = [result for result in results if result.name == name]
        worst = max(row.residual for row in rows)
        failed = sum(1 for row in rows if not row.passed)
        print(f"{name:<24}{len(rows):>6}{worst:>12.2e}{failed:>6}")
    raise_on_breach(results)
    return EXIT_OK


# Fixed-point round-off against the floating-point Chebyshev result
def cmd_digital(args):
    if args.bits_min > args.bits_max:
        raise ConfigError(f"--bits-min {args.bits_min} exceeds --bits-max")
    parts = list(laplacian_parts(args.length))
    x0 = random_initial_state(args.length, args.seed)
    plan, run = fixed_point_chebyshev(
        parts, args.time, args.epsilon, x0, mode=args.evolver
    )
    reference = evolve_chebyshev(
        parts, args.time, x0, eps=args.epsilon, mode=args.evolver
    )
    rows = roundoff_scan(
        run, range(args.bits_min, args.bits_max + 1), reference, args.rounding
    )
    for row in rows:
        print(f"{row.bits:>4} {row.rounding:<9}{row.error:.6e}")
    if len(rows) > 1:
        print(f"# slope log2(error)/bit: {roundoff_slope(rows):.3f}")
    bits = register_bits(plan.steps, plan.order, args.epsilon)
    print(f"# suggested width for eps={args.epsilon:g}: b={bits}")
    return EXIT_OK


def cmd_bessel(args):
    table = bessel_table(args.time, args.order)
    for k, value in enumerate(table.values):
        print(f"{k:>4} {format(value, '.17g')}")
    print(f"# J0 + 2 sum J2k = {table.even_sum():.17g}")
    return EXIT_OK


def cmd_report(args):
    rows = complexity_report(
        args.time, args.epsilon, n_items=args.items, length=args.length, norm=args.norm
    )
    print(format_report(rows))
    return EXIT_OK


def _experiment_flags(parser):
    parser.add_argument("--method", choices=METHODS, help="Propagation method")
    parser.add_argument("--length", type=int, help="Lattice length L (even)")
    parser.add_argument("--time", type=float, help="Evolution time t")
    parser.add_argument("--dt", type=float, help="Time step for series methods")
    parser.add_argument("--order", help="Truncation order p or 'auto'")
    parser.add_argument("--steps", help="Step count m or 'auto'")
    parser.add_argument("--epsilon", type=float, help="Target error")
    parser.add_argument("--seed", type=int, help="Seed of the initial state")
    parser.add_argument("--norm", choices=NORMS, help="Operator norm")
    parser.add_argument("--config", help="Flat key = value config file")
    parser.add_argument("--output", help="CSV path (manifest and .gp alongside)")
    parser.add_argument("--workers", type=int, help="Thread pool size for scans")


def build_parser():
    """Argument parser with one subcommand per task."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "-d", "--debug", help="Debug mode", required=False, action="store_true"
    )
    parser = argparse.ArgumentParser(
        prog="hamsim", description="Hamiltonian evolution benchmarks"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    evolve = sub.add_parser("evolve", parents=[common], help="Run one experiment")
    _experiment_flags(evolve)
    evolve.add_argument("--graph", help="Sparse Hamiltonian edge file")
    evolve.set_defaults(handler=cmd_evolve)

    scan_error = sub.add_parser(
        "scan-error", parents=[common], help="Error vs order or step count"
    )
    _experiment_flags(scan_error)
    scan_error.set_defaults(handler=cmd_scan_error)

    scan_time = sub.add_parser(
        "scan-time", parents=[common], help="Error vs evolution time"
    )
    _experiment_flags(scan_time)
    scan_time.add_argument(
        "--times", type=float, nargs="+", default=list(DEFAULT_TIMES)
    )
    scan_time.set_defaults(handler=cmd_scan_time)

    grover = sub.add_parser("grover", parents=[common], help="Search checks")
    grover.add_argument("--items", type=int, nargs="+", default=list(GROVER_ITEMS))
    grover.set_defaults(handler=cmd_grover)

    identities = sub.add_parser(
        "identities", parents=[common], help="Projector identity suite"
    )
    identities.add_argument("--instances", type=int, default=100)
    identities.add_argument("--seed", type=int, default=1)
    identities.add_argument("--dim", type=int, default=8)
    identities.set_defaults(handler=cmd_identities)

    digital = sub.add_parser(
        "digital", parents=[common], help="Fixed-point round-off scan"
    )
    digital.add_argument("--bits-min", type=int, default=16)
    digital.add_argument("--bits-max", type=int, default=32)
    digital.add_argument("--rounding", choices=ROUNDING_MODES, default="truncate")
    digital.add_argument(
        "--evolver", choices=("stepped", "one_shot"), default="stepped"
    )
    digital.add_argument("--length", type=int, default=16)
    digital.add_argument("--time", type=float, default=20.0)
    digital.add_argument("--epsilon", type=float, default=1e-6)
    digital.add_argument("--seed", type=int, default=1)
    digital.set_defaults(handler=cmd_digital)

    bessel = sub.add_parser("bessel", parents=[common], help="Bessel J_0..J_p")
    bessel.add_argument("--time", type=float, required=True)
    bessel.add_argument("--order", type=int, required=True)
    bessel.set_defaults(handler=cmd_bessel)

    report = sub.add_parser("report", parents=[common], help="Predicted costs")
    report.add_argument("--time", type=float, default=100.0)
    report.add_argument("--epsilon", type=float, default=1e-5)
    report.add_argument("--items", type=int, default=1024)
    report.add_argument("--length", type=int, default=128)
    report.add_argument("--norm", choices=NORMS, default="spectral")
    report.set_defaults(handler=cmd_report)
    return parser


# Entry point for the command-line interface
def main(argv=None):
    """
    Entry point for the command-line interface
    output: int exit code
    """
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.debug else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    if args.debug:
        print("enabled debug mode")

    try:
        return args.handler(args)
    except ResidualBreachError as err:
        print(f"check failed: {err}", file=sys.stderr)
        return EXIT_BREACH
    except ValueError as err:
        print(f"invalid configuration: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
