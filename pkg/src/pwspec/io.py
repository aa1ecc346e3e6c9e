"""CSV ingestion, flat config files and result serialization."""

import csv
import json
import os
import shutil
import tempfile
from pathlib import Path

import numpy as np

OUT_ENV = "PWSPEC_OUT"
DEFAULT_OUT = "pwspec-out"


class UsageError(ValueError):
    """Invalid input or configuration (exit code 2)."""


def read_channels(path):
    """Read a CSV with one column per channel and one row per time point.

    A first row that does not parse as numbers is taken as a header.
    Returns ``(names, values)`` with ``values`` of shape (T, channels).
    """
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"cannot read input file {path}")
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise UsageError(f"{path} is empty")
    names = None
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        names, rows = [c.strip() for c in rows[0]], rows[1:]
    if not rows:
        raise UsageError(f"{path} has a header but no data")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise UsageError(f"{path} has rows of unequal length")
    try:
        values = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise UsageError(f"{path}: non-numeric value ({exc})") from None
    if not np.all(np.isfinite(values)):
        raise UsageError(f"{path} contains non-finite values")
    if names is None:
        names = [f"ch{i}" for i in range(width)]
    return names, values


def select_channel(names, values, column):
    """Pick a channel by index or header name."""
    if column is None:
        column = 0
    if isinstance(column, str) and not column.lstrip("-").isdigit():
        if column not in names:
            raise UsageError(f"no column named {column!r}")
        return values[:, names.index(column)]
    idx = int(column)
    if not 0 <= idx < values.shape[1]:
        raise UsageError(f"column index {idx} out of range (file has {values.shape[1]})")
    return values[:, idx]


def read_config(path):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"cannot read config file {path}")
    out = {}
    for n, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise UsageError(f"{path}:{n}: empty key")
        out[key] = value
    return out


def parse_float_list(text):
    try:
        return [float(v) for v in str(text).replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of numbers, got {text!r}") from None


def output_dir(arg):
    return Path(arg or os.environ.get(OUT_ENV) or DEFAULT_OUT)


def to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x) if np.isfinite(x) else None
    if isinstance(x, Path):
        return str(x)
    return x


def dump_json(obj):
    return json.dumps(to_jsonable(obj), indent=2, sort_keys=True) + "\n"


def csv_text(header, rows):
    lines = [",".join(header)]
    for r in rows:
        lines.append(",".join(_fmt(v) for v in r))
    return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_outputs(out_dir, files):
    """Write ``{name: text}`` into ``out_dir`` all at once.

    Files are staged in a temporary directory first so an error while
    rendering never leaves a partial set behind.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".pwspec-", dir=out_dir))
    try:
        for name, text in files.items():
            (stage / name).write_text(text)
        for name in files:
            os.replace(stage / name, out_dir / name)
    finally:
        shutil.rmtree(stage, ignore_errors=True)
    return [out_dir / name for name in files]
