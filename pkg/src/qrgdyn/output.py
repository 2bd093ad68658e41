"""Deterministic CSV/JSON writers, run manifests and flat config files."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
import os
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence

from .errors import ValidationError

OUTPUT_DIR_ENV = "QRGDYN_OUTPUT_DIR"


def format_value(v: Any) -> str:
    """Locale-independent text for one CSV cell; floats get 17 significant digits."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float) or hasattr(v, "dtype"):
        x = float(v)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if x == 0.0:
            x = 0.0  # drop the sign of -0.0
        return format(x, ".17g")
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_value(v) for v in row])
    return buf.getvalue()


def _jsonable(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "dtype"):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    return obj


def json_text(obj: Any) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def sidecar(path: Path, suffix: str) -> Path:
    """``runs/flow.csv`` -> ``runs/flow<suffix>``."""
    return path.with_name(path.stem + suffix)


def resolve_output(out: Optional[str], command: str, ext: str) -> Optional[Path]:
    """Explicit --out wins; otherwise the env var names a directory; otherwise stdout."""
    if out:
        return Path(out)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base:
        return Path(base) / f"{command}{ext}"
    return None


def emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        write_text(path, text)


def parse_config_file(path: str) -> Dict[str, str]:
    """Flat ``key = value`` text (``#`` comments), or the ``config`` block of a run manifest."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read config file {path}: {exc}") from exc
    if p.suffix == ".json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"config file {path} is not valid JSON: {exc}") from exc
        data = data.get("config", data)
        return {k: v for k, v in data.items() if v is not None}
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValidationError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.lstrip("-").replace("-", "_")] = value
    return out
