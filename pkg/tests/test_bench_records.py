import math
from dataclasses import replace

import pytest
from hamsim.bench import (
    CSV_HEADER,
    METHODS,
    ExperimentConfig,
    ExperimentRecord,
    complexity_report,
    emit_outputs,
    error_scan_grid,
    format_report,
    measured_part_applications,
    parse_csv,
    records_to_csv,
    run_error_scan,
    run_experiment,
    run_graph_experiment,
    run_grid,
    threshold_from_records,
    time_scan_grid,
)
from hamsim.hamiltonian_models import SparseHamiltonianGraph, edge_coloring
from hamsim.trotter_evolution import choose_steps, commutator_error_norms
from hamsim.util import ConfigError, csv_digest, read_manifest


def small(method, **overrides):
    settings = dict(method=method, length=8, t=2.0, dt=1.0, epsilon=1e-3, seed=3)
    if method.startswith("trotter"):
        settings["steps"] = 4
    settings.update(overrides)
    return ExperimentConfig(**settings)


@pytest.mark.parametrize("method", METHODS)
def test_measured_applications_match_analytic(method):
    record = run_experiment(small(method))
    assert record.part_applications == measured_part_applications(small(method))
    assert record.part_applications > 0


@pytest.mark.parametrize("method,expected", [("trotter1", 8), ("trotter2", 12)])
def test_trotter_application_counts(method, expected):
    assert run_experiment(small(method)).part_applications == expected


@pytest.mark.parametrize("method", METHODS)
def test_small_runs_are_accurate(method):
    if method.startswith("trotter"):
        record = run_experiment(small(method, steps=2**12))
        assert record.error < 1e-2
    else:
        record = run_experiment(small(method, epsilon=1e-6))
        assert record.error < 1e-6


def test_zero_time_is_exact():
    record = run_experiment(small("refl-series", t=0.0))
    assert record.error == 0.0
    assert record.m == 0


def test_default_configuration_resolves_to_published_orders():
    resolved = ExperimentConfig().resolve()
    assert (resolved.order, resolved.steps) == (12, 32)
    projection = ExperimentConfig(method="proj-series").resolve()
    assert projection.order == 18


def test_explicit_order_is_kept():
    resolved = ExperimentConfig(order=7, steps=40).resolve()
    assert (resolved.order, resolved.steps) == (7, 40)


@pytest.mark.parametrize(
    "overrides",
    [
        {"method": "euler"},
        {"length": 7},
        {"length": 2},
        {"norm": "max"},
        {"t": -1.0},
        {"dt": 0.0},
        {"epsilon": 0.0},
        {"workers": 0},
    ],
)
def test_invalid_configuration(overrides):
    with pytest.raises(ConfigError):
        ExperimentConfig(**overrides)


def test_from_mapping_parses_strings():
    config = ExperimentConfig.from_mapping(
        {"method": "trotter2", "length": "16", "time": "2.5", "steps": "8"}
    )
    assert config.method == "trotter2"
    assert config.length == 16
    assert config.t == 2.5
    assert config.steps == 8
    assert config.order == "auto"


def test_from_mapping_rejects_malformed_values():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"length": "sixteen"})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_mapping({"order": "-2"})


def test_csv_round_trip():
    records = [run_experiment(small(method)) for method in ("trotter1", "chebyshev")]
    text = records_to_csv(records)
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert parse_csv(text) == records


def test_empty_scan_writes_header_only():
    assert records_to_csv([]) == ",".join(CSV_HEADER) + "\n"
    assert parse_csv(records_to_csv([])) == []


def test_parse_csv_rejects_foreign_header():
    with pytest.raises(ValueError):
        parse_csv("a,b,c\n1,2,3\n")


def test_floats_keep_full_precision():
    record = ExperimentRecord(
        "trotter1", 8, 0.1, 0.1, 2, 1, 1, "spectral", 1.0 / 3.0, 2, 0.5
    )
    row = record.as_row()
    assert row[2] == "0.10000000000000001"
    assert float(row[8]) == 1.0 / 3.0


def test_scan_digest_is_reproducible():
    base = small("proj-series")
    first = run_error_scan(base, orders=range(1, 6), dts=(1.0,))
    second = run_error_scan(base, orders=range(1, 6), dts=(1.0,))
    assert csv_digest(records_to_csv(first)) == csv_digest(records_to_csv(second))


def test_parallel_grid_matches_serial():
    configs = error_scan_grid(small("trotter2"), step_exponents=range(0, 6))
    serial = run_grid(configs, workers=1)
    parallel = run_grid(configs, workers=4)
    assert [r.m for r in parallel] == [2**k for k in range(6)]
    assert [replace(r, wall_ms=0.0) for r in serial] == [
        replace(r, wall_ms=0.0) for r in parallel
    ]


def test_grid_sizes():
    assert len(error_scan_grid(small("trotter1"))) == 23
    assert len(error_scan_grid(small("refl-series"))) == 40
    assert len(error_scan_grid(small("chebyshev"))) == 20
    times = [1.0, 10.0]
    assert len(time_scan_grid(small("trotter1"), times)) == 6
    series = time_scan_grid(small("proj-series"), times)
    assert [c.order for c in series] == [10, 10]
    assert all(c.dt == 1.0 for c in series)


def test_threshold_from_records():
    records = [
        ExperimentRecord("refl-series", 8, 1.0, 1.0, p, 1, 1, "spectral", err, 2, 0.0)
        for p, err in [(3, 1e-2), (4, 1e-4), (5, 1e-6), (6, 1e-8)]
    ]
    assert threshold_from_records(records, 1e-5) == 5
    assert threshold_from_records(records, 1e-3, key="p") == 4
    assert threshold_from_records(records, 1e-12) is None


def test_complexity_report():
    rows = {row.method: row for row in complexity_report(100.0, 1e-5)}
    assert set(rows) == {
        "proj-series",
        "refl-series",
        "trotter1",
        "trotter2",
        "chebyshev",
        "grover",
    }
    assert (rows["refl-series"].p, rows["refl-series"].m) == (12, 32)
    assert rows["refl-series"].part_applications == 768
    assert rows["proj-series"].p == 18
    assert rows["refl-series"].heuristic_p == 12
    assert rows["chebyshev"].part_applications == 32 * 12
    grover = rows["grover"]
    assert grover.m == 25
    assert grover.part_applications == 2 * grover.m * grover.repetitions
    assert rows["trotter2"].m < rows["trotter1"].m
    cost = rows["refl-series"].asymptotic_cost
    assert math.isclose(cost, 100 * math.log(1e7) / math.log(math.log(1e7)))
    assert format_report(list(rows.values())).splitlines()[0].startswith("method")


def test_complexity_report_rejects_bad_input():
    with pytest.raises(ConfigError):
        complexity_report(0.0, 1e-5)


def test_emit_outputs(tmp_path):
    config = small("trotter1")
    records = [run_experiment(config)]
    paths = emit_outputs(records, tmp_path / "scan.csv", config)
    assert [p.name for p in paths] == ["scan.csv", "scan.gp", "scan_manifest.ini"]
    text = paths[0].read_text()
    manifest = read_manifest(paths[2])
    assert manifest["output"]["sha256"] == csv_digest(text)
    assert manifest["hamsim"]["method"] == "trotter1"
    assert "scan.csv" in paths[1].read_text()


def test_emit_outputs_reports_unwritable_directory(tmp_path):
    with pytest.raises(OSError):
        emit_outputs([], tmp_path / "missing" / "scan.csv")


def test_graph_experiment_resolves_steps_on_its_parts():
    graph = SparseHamiltonianGraph.from_edge_lines(
        "0 1 1 0\n1 2 0.5 0.25\n2 3 1 0\n3 0 0 0.75\ndiag 2 0.5\n"
    )
    parts = edge_coloring(graph)
    config = small("trotter2", steps="auto", t=1.0, epsilon=1e-6)
    run = run_graph_experiment(config, graph)
    expected = choose_steps(1.0, 1e-6, 3, commutator_error_norms(parts).term(3))
    assert (run.config.order, run.config.steps) == (3, expected)
    assert run.dim == 4 and run.colours == 2
    assert run.error < 1e-6


def test_graph_experiment_rejects_series_methods():
    graph = SparseHamiltonianGraph.from_edge_lines("0 1 1 0\n")
    with pytest.raises(ConfigError):
        run_graph_experiment(small("proj-series"), graph)
