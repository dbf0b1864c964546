"""
Configuration and run-manifest helpers.

Config files are flat `key = value` text; a `[hamsim]` header is optional.
Manifests record every resolved run parameter together with a SHA-256
digest of the emitted CSV taken with the wall-clock column blanked, so two
runs of the same configuration can be compared by digest alone.

Dependencies:
    - configparser, csv, io
    - cryptography (SHA-256)
"""

import configparser
import csv
import io
import logging
from pathlib import Path

from cryptography.hazmat.primitives import hashes

logger = logging.getLogger(__name__)

SECTION = "hamsim"
CONFIG_KEYS = (
    "method",
    "length",
    "time",
    "dt",
    "order",
    "steps",
    "epsilon",
    "seed",
    "norm",
    "output",
    "workers",
)
TIMING_COLUMN = "wall_ms"


class ConfigError(ValueError):
    """Raised for malformed or unresolvable configuration values."""


# Check if the provided value is a non-negative integer
def sane_index(value):
    """
    input: int or str
    output: bool
    """
    return str(value).isdigit()


# Check that the path exists; raises FileNotFoundError otherwise
def sane_path(path):
    return Path(path).resolve(strict=True)


def parse_count(value, name):
    """Parses an integer flag that may also be the literal `auto`."""
    if value is None or value == "auto":
        return "auto"
    if not sane_index(value):
        raise ConfigError(
            f"{name} must be a non-negative integer or 'auto', got {value!r}"
        )
    return int(value)


def load_config(path):
    """
    Reads a flat key = value file.
    input: path
    output: dict of raw string values keyed by CONFIG_KEYS
    """
    text = sane_path(path).read_text(encoding="utf-8")
    if not text.lstrip().startswith("["):
        text = f"[{SECTION}]\n{text}"
    parser = configparser.ConfigParser()
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as err:
        raise ConfigError(f"{path}: {err}") from err
    if parser.sections() != [SECTION]:
        raise ConfigError(f"{path}: only a [{SECTION}] section is allowed")
    values = dict(parser[SECTION])
    unknown = sorted(set(values) - set(CONFIG_KEYS))
    if unknown:
        raise ConfigError(f"{path}: unknown keys {', '.join(unknown)}")
    logger.debug("loaded %d config values from %s", len(values), path)
    return values


def merge_settings(defaults, file_values, cli_values):
    """Defaults < config file < CLI flags; CLI values of None are unset."""
    merged = dict(defaults)
    merged.update(file_values)
    merged.update({k: v for k, v in cli_values.items() if v is not None})
    return merged


def blank_timing(csv_text):
    """CSV text with the wall-clock column emptied, rows otherwise intact."""
    rows = list(csv.reader(io.StringIO(csv_text)))
    if not rows:
        return ""
    column = rows[0].index(TIMING_COLUMN) if TIMING_COLUMN in rows[0] else None
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(rows[0])
    for row in rows[1:]:
        if column is not None and column < len(row):
            row[column] = ""
        writer.writerow(row)
    return out.getvalue()


def csv_digest(csv_text):
    """SHA-256 hex digest of the CSV with timings blanked."""
    digest = hashes.Hash(hashes.SHA256())
    digest.update(blank_timing(csv_text).encode("utf-8"))
    return digest.finalize().hex()


def manifest_path(csv_path):
    csv_path = Path(csv_path)
    return csv_path.with_name(f"{csv_path.stem}_manifest.ini")


def write_manifest(csv_path, settings, csv_text):
    """Writes <stem>_manifest.ini next to the CSV; returns its path."""
    parser = configparser.ConfigParser()
    parser[SECTION] = {key: str(value) for key, value in settings.items()}
    parser["output"] = {
        "csv": Path(csv_path).name,
        "sha256": csv_digest(csv_text),
    }
    path = manifest_path(csv_path)
    with open(path, "w", encoding="utf-8") as handle:
        parser.write(handle)
    return path


def read_manifest(path):
    parser = configparser.ConfigParser()
    if not parser.read(sane_path(path), encoding="utf-8"):
        raise ConfigError(f"cannot read manifest {path}")
    return {section: dict(parser[section]) for section in parser.sections()}
