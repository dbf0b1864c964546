import subprocess
import sys

import pytest
from hamsim.bench import CSV_HEADER
from hamsim.util import csv_digest, read_manifest


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "hamsim.main", *args],
        capture_output=True,
        text=True,
    )


def test_evolve_prints_record():
    flags = ["--method", "trotter1", "--length", "8", "--time", "1", "--steps", "16"]
    result = run_cli("evolve", *flags)
    print("STDOUT:", result.stdout)
    print("STDERR:", result.stderr)
    assert result.returncode == 0
    assert result.stdout.startswith("trotter1: L=8 t=1 p=2 m=16")
    assert "applications=32" in result.stdout


def test_debug_mode():
    result = run_cli(
        "evolve", "--debug", "--method", "chebyshev", "--length", "8", "--time", "2"
    )
    assert result.returncode == 0
    assert "enabled debug mode" in result.stdout
    assert "DEBUG" in result.stderr


def test_unknown_method_is_rejected():
    result = run_cli("evolve", "--method", "euler")
    assert result.returncode == 2


def test_odd_length_is_a_configuration_error():
    result = run_cli("evolve", "--method", "trotter1", "--length", "7")
    assert result.returncode == 2
    assert "length must be even" in result.stderr


def test_missing_config_file_is_an_io_error(tmp_path):
    result = run_cli("evolve", "--config", str(tmp_path / "missing.ini"))
    assert result.returncode == 4
    assert "I/O error" in result.stderr


def test_config_file_is_overridden_by_flags(tmp_path):
    config = tmp_path / "run.ini"
    config.write_text("method = trotter2\nlength = 16\ntime = 1\nsteps = 8\n")
    from_file = run_cli("evolve", "--config", str(config))
    assert from_file.returncode == 0
    assert from_file.stdout.startswith("trotter2: L=16 t=1 p=3 m=8")
    overridden = run_cli("evolve", "--config", str(config), "--length", "8")
    assert overridden.stdout.startswith("trotter2: L=8 ")


def test_unknown_config_key(tmp_path):
    config = tmp_path / "run.ini"
    config.write_text("colour = blue\n")
    result = run_cli("evolve", "--config", str(config))
    assert result.returncode == 2


def test_scan_error_writes_outputs(tmp_path):
    output = tmp_path / "cheb.csv"
    result = run_cli(
        "scan-error",
        "--method",
        "chebyshev",
        "--length",
        "8",
        "--time",
        "2",
        "--epsilon",
        "1e-8",
        "--output",
        str(output),
    )
    assert result.returncode == 0
    assert "# smallest p with error < 1e-08:" in result.stdout
    text = output.read_text()
    assert text.splitlines()[0] == ",".join(CSV_HEADER)
    assert len(text.splitlines()) == 21
    assert (tmp_path / "cheb.gp").exists()
    manifest = read_manifest(tmp_path / "cheb_manifest.ini")
    assert manifest["output"]["sha256"] == csv_digest(text)


def test_scan_time_prints_csv():
    result = run_cli(
        "scan-time", "--method", "refl-series", "--length", "8", "--times", "1", "2"
    )
    assert result.returncode == 0
    lines = result.stdout.splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 3


def test_graph_evolution(tmp_path):
    graph = tmp_path / "path.txt"
    graph.write_text("# path of four\n0 1 1 0\n1 2 0.5 0.5\n2 3 1 0\ndiag 0 0.25\n")
    result = run_cli(
        "evolve",
        "--method",
        "chebyshev",
        "--time",
        "3",
        "--epsilon",
        "1e-10",
        "--graph",
        str(graph),
    )
    assert result.returncode == 0
    assert "dim=4" in result.stdout and "method=chebyshev" in result.stdout
    error = float(result.stdout.split("error=")[1])
    assert error < 1e-8


HEXAGON = (
    "0 1 1 0\n1 2 0.5 0.25\n2 3 1 0\n3 4 0 0.75\n4 5 1 0\n5 0 0.5 0\n"
    "0 3 0.25 0\ndiag 1 0.5\ndiag 4 -0.25\n"
)


def graph_run(tmp_path, method, epsilon):
    graph = tmp_path / "hexagon.txt"
    graph.write_text(HEXAGON)
    flags = ["--method", method, "--time", "1", "--epsilon", epsilon]
    return run_cli("evolve", "--debug", *flags, "--graph", str(graph))


@pytest.mark.parametrize("method,epsilon", [("trotter1", "1e-3"), ("trotter2", "1e-6")])
def test_graph_trotter_steps_follow_epsilon(tmp_path, method, epsilon):
    result = graph_run(tmp_path, method, epsilon)
    assert result.returncode == 0
    assert f"resolved {method}: p=" in result.stderr
    steps = int(result.stdout.split(" m=")[1].split()[0])
    assert steps > 1
    error = float(result.stdout.split("error=")[1])
    assert error < float(epsilon)


def test_graph_one_shot(tmp_path):
    result = graph_run(tmp_path, "one-shot", "1e-9")
    assert result.returncode == 0
    assert "method=one-shot" in result.stdout
    assert float(result.stdout.split("error=")[1]) < 1e-9


def test_graph_explicit_steps_are_kept(tmp_path):
    graph = tmp_path / "hexagon.txt"
    graph.write_text(HEXAGON)
    result = run_cli(
        "evolve", "--method", "trotter2", "--steps", "5", "--graph", str(graph)
    )
    assert result.returncode == 0
    assert "p=3 m=5" in result.stdout


def test_graph_rejects_series_methods(tmp_path):
    graph = tmp_path / "edge.txt"
    graph.write_text("0 1 1 0\n")
    result = run_cli("evolve", "--method", "refl-series", "--graph", str(graph))
    assert result.returncode == 2


def test_bessel_table():
    result = run_cli("bessel", "--time", "1", "--order", "2")
    assert result.returncode == 0
    lines = result.stdout.splitlines()
    assert len(lines) == 4
    index, value = lines[0].split()
    assert index == "0"
    assert abs(float(value) - 0.7651976865579666) < 1e-15
    assert lines[-1].startswith("# J0 + 2 sum J2k")


def test_grover_checks_pass():
    result = run_cli("grover", "--items", "4", "16")
    assert result.returncode == 0
    assert len(result.stdout.splitlines()) == 3


def test_identity_suite_passes():
    result = run_cli("identities", "--instances", "5")
    assert result.returncode == 0
    assert "word_reduction" in result.stdout


def test_digital_scan():
    flags = ["--bits-min", "20", "--bits-max", "22", "--length", "8", "--time", "2"]
    result = run_cli("digital", *flags)
    assert result.returncode == 0
    assert "# slope log2(error)/bit" in result.stdout
    assert "# suggested width" in result.stdout


def test_digital_rejects_inverted_range():
    result = run_cli("digital", "--bits-min", "30", "--bits-max", "20")
    assert result.returncode == 2


def test_report_lists_every_method():
    result = run_cli("report")
    assert result.returncode == 0
    for method in ("proj-series", "refl-series", "trotter1", "chebyshev", "grover"):
        assert method in result.stdout
