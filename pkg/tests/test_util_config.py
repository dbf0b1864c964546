import pytest
from hamsim.util import (
    ConfigError,
    blank_timing,
    csv_digest,
    load_config,
    manifest_path,
    merge_settings,
    parse_count,
    read_manifest,
    write_manifest,
)

CSV_TEXT = (
    "method,L,t,dt,p,m,seed,norm,error,part_applications,wall_ms\n"
    "trotter1,8,1,0.5,1,2,1,spectral,0.01,4,12.5\n"
)


def test_load_config_without_header(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("method = refl-series\nlength = 16\norder = auto\n")
    values = load_config(path)
    assert values == {"method": "refl-series", "length": "16", "order": "auto"}


def test_load_config_with_header(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[hamsim]\ntime = 2.5\nseed = 7\n")
    assert load_config(path) == {"time": "2.5", "seed": "7"}


def test_load_config_rejects_unknown_keys(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("lenght = 16\n")
    with pytest.raises(ConfigError, match="lenght"):
        load_config(path)


def test_load_config_rejects_other_sections(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[other]\nlength = 16\n")
    with pytest.raises(ConfigError):
        load_config(path)


def test_load_config_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "missing.ini")


def test_cli_overrides_file_overrides_defaults():
    merged = merge_settings(
        {"length": "128", "time": "1", "seed": "1"},
        {"length": "16", "time": "5"},
        {"length": "32", "time": None},
    )
    assert merged == {"length": "32", "time": "5", "seed": "1"}


def test_parse_count():
    assert parse_count(None, "order") == "auto"
    assert parse_count("auto", "order") == "auto"
    assert parse_count("12", "order") == 12
    with pytest.raises(ConfigError, match="steps"):
        parse_count("-1", "steps")


def test_digest_ignores_wall_clock():
    other = CSV_TEXT.replace("12.5", "99.0")
    assert csv_digest(CSV_TEXT) == csv_digest(other)
    assert csv_digest(CSV_TEXT) != csv_digest(CSV_TEXT.replace("0.01", "0.02"))
    assert blank_timing(CSV_TEXT).splitlines()[1].endswith(",4,")


def test_manifest_round_trip(tmp_path):
    csv_path = tmp_path / "scan.csv"
    csv_path.write_text(CSV_TEXT)
    path = write_manifest(csv_path, {"method": "trotter1", "length": 8}, CSV_TEXT)
    assert path == manifest_path(csv_path)
    assert path.name == "scan_manifest.ini"
    manifest = read_manifest(path)
    assert manifest["hamsim"] == {"method": "trotter1", "length": "8"}
    assert manifest["output"]["csv"] == "scan.csv"
    assert manifest["output"]["sha256"] == csv_digest(CSV_TEXT)
