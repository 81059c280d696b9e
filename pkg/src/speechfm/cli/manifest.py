from __future__ import annotations

import datetime as dt
import hashlib
import json
import os
import platform
import sys
from pathlib import Path

import numpy as np

from .. import __version__

MANIFEST_NAME = "manifest.json"


def git_blob_hash(data: bytes) -> str:
    """Content hash as ``git hash-object`` computes it."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def hash_inputs(paths) -> dict[str, str]:
    out = {}
    for p in paths:
        p = Path(p)
        if p.is_dir():
            for child in sorted(p.iterdir()):
                if child.is_file():
                    out[str(child)] = git_blob_hash(child.read_bytes())
        elif p.is_file():
            out[str(p)] = git_blob_hash(p.read_bytes())
    return out


def host_info() -> dict:
    return {
        "hostname": platform.node(),
        "platform": platform.platform(),
        "machine": platform.machine(),
        "processor": platform.processor() or platform.machine(),
        "cpu_count": os.cpu_count(),
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "package": __version__,
    }


def _now() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat(timespec="milliseconds")


class RunManifest:
    """Run record written once per command next to its outputs."""

    def __init__(self, command: str, argv: list[str], seed: int | None = None):
        self.data = {
            "command": command,
            "argv": list(argv),
            "seed": seed,
            "config_hash": None,
            "inputs": {},
            "outputs": [],
            "started": _now(),
            "finished": None,
            "host": host_info(),
            "exit_code": None,
            "notes": {},
        }

    def add_inputs(self, *paths) -> None:
        self.data["inputs"].update(hash_inputs(p for p in paths if p is not None))

    def add_output(self, path) -> None:
        self.data["outputs"].append(str(path))

    def note(self, key: str, value) -> None:
        self.data["notes"][key] = value

    def write(self, path, exit_code: int) -> Path:
        self.data["finished"] = _now()
        self.data["exit_code"] = exit_code
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.data, indent=2, sort_keys=True, default=str) + "\n")
        return path
