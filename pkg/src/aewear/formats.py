"""Signal file formats and deterministic, atomic output writers.

Input formats
-------------
``csv``
    UTF-8 text, one amplitude per line. The first line may be a header: it is
    skipped when it does not parse as a number. Blank lines are ignored. Any
    other non-numeric line is an error reported as ``path:line``.
``raw16le``
    Headerless little-endian signed 16-bit integers, one per sample. The byte
    length must be even. The sample rate is not stored and comes from the
    ``--rate`` flag.

Output CSVs use ``repr(float)`` so the same values always give the same bytes.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np


class InputFormatError(ValueError):
    pass


def read_csv_values(path) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputFormatError(f"{path}: cannot read: {exc}") from exc
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            v = float(line)
        except ValueError:
            if lineno == 1:
                continue  # header
            raise InputFormatError(f"{path}:{lineno}: not a number: {line[:40]!r}") from None
        if not math.isfinite(v):
            raise InputFormatError(f"{path}:{lineno}: non-finite value")
        values.append(v)
    if not values:
        raise InputFormatError(f"{path}: empty input")
    return np.array(values)


def read_raw16le(path) -> np.ndarray:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise InputFormatError(f"{path}: cannot read: {exc}") from exc
    if not data:
        raise InputFormatError(f"{path}: empty input")
    if len(data) % 2:
        raise InputFormatError(f"{path}: truncated sample at byte offset {len(data) - 1}")
    return np.frombuffer(data, dtype="<i2").astype(float)


def read_values(path, fmt: str = "csv") -> np.ndarray:
    if fmt == "csv":
        return read_csv_values(path)
    if fmt == "raw16le":
        return read_raw16le(path)
    raise InputFormatError(f"unknown format {fmt!r}")


def write_raw16le(path, values) -> None:
    arr = np.asarray(values)
    if np.any(arr != np.round(arr)) or np.any(np.abs(arr) > 32767):
        raise ValueError("raw16le values must be integers in the int16 range")
    atomic_write_bytes(path, arr.astype("<i2").tobytes())


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def fmt_float(v) -> str:
    if v is None:
        return ""
    v = float(v)
    return repr(v) if math.isfinite(v) else ""


def values_csv(values) -> str:
    return "".join(f"{fmt_float(v)}\n" for v in values)


def rows_csv(header, rows) -> str:
    out = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (bool, np.bool_)):
                cells.append("true" if v else "false")
            elif isinstance(v, (int, np.integer)):
                cells.append(str(int(v)))
            elif isinstance(v, (float, np.floating)) or v is None:
                cells.append(fmt_float(v))
            else:
                cells.append(str(v))
        out.append(",".join(cells))
    return "\n".join(out) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> None:
    atomic_write_text(path, dumps_json(obj))


def load_schema(name: str) -> dict:
    """Bundled JSON schema, e.g. ``load_schema("wear_report")``."""
    from importlib.resources import files

    return json.loads(files("aewear").joinpath("schemas", f"{name}.schema.json").read_text())
