"""Frozen regression constants with provenance (commit, date, grid)."""
from __future__ import annotations

import datetime as _dt
import json
import subprocess
from importlib import resources
from pathlib import Path

SCHEMA_VERSION = 1


def default_path() -> Path:
    return Path(str(resources.files("bubblelab") / "golden.json"))


def load(path=None) -> dict:
    p = Path(path) if path else default_path()
    if not p.exists():
        raise FileNotFoundError(f"no baseline: golden file {p} not found")
    data = json.loads(p.read_text())
    if data.get("schema") != SCHEMA_VERSION:
        raise ValueError(f"golden file {p} has schema {data.get('schema')}, expected {SCHEMA_VERSION}")
    return data


def current_commit() -> str:
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True, text=True,
                             cwd=Path(__file__).parent, timeout=10)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def update_golden(path, updates: dict, grid: str) -> dict:
    """Merge ``updates`` (section -> fields) into the file, stamping each touched section."""
    p = Path(path)
    data = json.loads(p.read_text()) if p.exists() else {"schema": SCHEMA_VERSION}
    stamp = {"commit": current_commit(), "date": _dt.date.today().isoformat(), "grid": grid}
    for section, values in updates.items():
        entry = dict(data.get(section, {}))
        entry.update(values)
        entry["provenance"] = stamp
        data[section] = entry
    p.write_text(json.dumps(data, indent=1, sort_keys=True) + "\n")
    return data
