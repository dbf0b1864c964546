import math

import numpy as np
import pytest
from hamsim.bench import (
    ExperimentConfig,
    records_to_csv,
    run_error_scan,
    run_time_scan,
    threshold_from_records,
)
from hamsim.util import csv_digest

pytestmark = pytest.mark.slow

EPSILON = 1e-5


def lattice(method, **overrides):
    settings = dict(method=method, length=128, t=100.0, dt=math.pi, epsilon=EPSILON)
    settings.update(overrides)
    return ExperimentConfig(**settings)


def log_slope(xs, ys):
    return float(np.polyfit(np.log(xs), np.log(ys), 1)[0])


@pytest.mark.parametrize(
    "method,low,high", [("refl-series", 11, 13), ("proj-series", 16, 18)]
)
def test_series_order_threshold(method, low, high):
    records = run_error_scan(lattice(method), orders=range(6, 21), dts=(math.pi,))
    threshold = threshold_from_records(records, EPSILON)
    assert threshold is not None
    assert low <= threshold <= high


def test_trotter_step_threshold():
    records = run_error_scan(lattice("trotter1"), step_exponents=range(17, 24))
    threshold = threshold_from_records(records, EPSILON, key="m")
    assert threshold is not None
    assert 2**20 <= threshold <= 2**23


def test_series_error_grows_linearly_in_time():
    times = [10.0, 20.0, 50.0, 100.0, 200.0]
    for method in ("refl-series", "proj-series"):
        records = run_time_scan(lattice(method), times)
        slope = log_slope([r.t for r in records], [r.error for r in records])
        assert 0.8 <= slope <= 1.2


def test_trotter_error_falls_as_one_over_steps():
    records = run_error_scan(lattice("trotter1"), step_exponents=range(16, 21))
    slope = log_slope([r.m for r in records], [r.error for r in records])
    assert -1.2 <= slope <= -0.8


def test_trotter_saturation_scales_with_step():
    times = [10.0, 20.0, 50.0]
    records = run_time_scan(lattice("trotter1"), times, trotter_dts=(1e-3, 1e-2))
    fine = [r.error for r in records if r.dt == pytest.approx(1e-3)]
    coarse = [r.error for r in records if r.dt == pytest.approx(1e-2)]
    assert len(fine) == len(coarse) == len(times)
    for small, large in zip(fine, coarse):
        assert 5.0 <= large / small <= 20.0


def test_series_needs_far_fewer_applications_than_trotter():
    base = lattice("refl-series")
    series = run_error_scan(base, orders=range(10, 15), dts=(math.pi,))
    best_series = min(r.part_applications for r in series if r.error < EPSILON)
    trotter = run_error_scan(lattice("trotter1"), step_exponents=range(19, 24))
    best_trotter = min(r.part_applications for r in trotter if r.error < EPSILON)
    assert 7e1 <= best_series <= 7e3
    assert 4e5 <= best_trotter <= 4e7


def test_scan_is_byte_identical_apart_from_timing():
    base = lattice("refl-series", length=32, t=20.0)
    first = records_to_csv(run_error_scan(base, orders=range(1, 13), workers=4))
    second = records_to_csv(run_error_scan(base, orders=range(1, 13), workers=1))
    assert csv_digest(first) == csv_digest(second)
