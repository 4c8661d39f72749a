"""Atomic CSV writers with JSON manifest sidecars."""
from __future__ import annotations

import json
import os
import platform
import sys
import tempfile
from pathlib import Path

from .. import __version__

ENV_OUTPUT_DIR = "MOTAG_OUTPUT_DIR"


def output_dir(cli_value: str | None) -> Path:
    d = Path(cli_value or os.environ.get(ENV_OUTPUT_DIR) or ".")
    d.mkdir(parents=True, exist_ok=True)
    return d


def fmt(x) -> str:
    if isinstance(x, str) or (isinstance(x, int) and not isinstance(x, bool)):
        return str(x)
    return format(float(x), ".10g")


def _atomic_write(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(fmt(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def manifest_path(csv_path: Path) -> Path:
    return csv_path.with_suffix(".json")


def write_outputs(outputs: dict, manifest: dict):
    """Write every ``{path: (header, rows)}`` CSV plus one manifest per CSV.

    All text is rendered before anything touches the disk, and each file is
    renamed into place, so a failure leaves no partial CSV behind.
    """
    rendered = {Path(p): csv_text(h, rows) for p, (h, rows) in outputs.items()}
    record = dict(manifest)
    record.setdefault("tool_version", __version__)
    record.setdefault("python", platform.python_version())
    record["argv"] = sys.argv[1:]
    record["outputs"] = [str(p) for p in rendered]
    for path, text in rendered.items():
        _atomic_write(path, text)
    for path in rendered:
        _atomic_write(manifest_path(path),
                      json.dumps({**record, "csv": path.name}, indent=2, sort_keys=True) + "\n")
    return list(rendered)
