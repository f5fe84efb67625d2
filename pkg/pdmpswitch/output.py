"""CSV/JSON output.

Files are UTF-8 with LF line endings and are written atomically (temp file in
the target directory, then rename). Floats use the shortest repr that
round-trips bit-exactly.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from pdmpswitch.trajectory import Trajectory


def format_value(v: Any) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def columns_to_rows(columns: dict[str, np.ndarray]) -> tuple[list[str], Iterable[tuple]]:
    header = list(columns)
    return header, zip(*(np.asarray(c).tolist() for c in columns.values()))


def write_columns_csv(path, columns: dict[str, np.ndarray]) -> Path:
    header, rows = columns_to_rows(columns)
    return atomic_write_text(path, csv_text(header, rows))


def trajectory_csv_text(traj: Trajectory) -> str:
    rows = list(zip(traj.t_start.tolist(), traj.x_start.tolist(),
                    traj.mode.tolist(), traj.duration.tolist()))
    footer = ["status", traj.status.value, traj.end_time]
    if traj.direction:
        footer.append(traj.direction)
    rows.append(footer)
    return csv_text(["t_start", "x_start", "mode", "duration"], rows)


def write_trajectory_csv(path, traj: Trajectory) -> Path:
    return atomic_write_text(path, trajectory_csv_text(traj))


def json_safe(obj: Any) -> Any:
    """Replace non-finite floats by None and numpy scalars/arrays by plain values."""
    if isinstance(obj, dict):
        return {k: json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_safe(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return json_safe(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def json_text(obj: Any) -> str:
    return json.dumps(json_safe(obj), indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(path, obj: Any) -> Path:
    return atomic_write_text(path, json_text(obj))
