"""CSV emission, the run manifest, and a background snapshot writer."""
from __future__ import annotations

import csv
import hashlib
import json
import platform
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np


def fmt(value):
    """Deterministic text for one CSV cell."""
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v != v:
            return "nan"
        if v in (float("inf"), float("-inf")):
            return "inf" if v > 0 else "-inf"
        return f"{v:.12g}"
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    return str(value)


def write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def config_hash(config):
    blob = json.dumps(config, sort_keys=True, default=str, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class Manifest:
    """Record of one run: config, its hash, tolerances, timings and every emitted file."""

    def __init__(self, outdir, command, config, tolerances=None):
        self.outdir = Path(outdir)
        self.command = command
        self.config = config
        self.tolerances = tolerances or {}
        self.files = []
        self.timings = {}
        self.results = {}

    def add(self, path):
        path = Path(path)
        self.files.append(path)
        return path

    def csv(self, name, header, rows):
        return self.add(write_csv(self.outdir / name, header, rows))

    def write(self):
        entries = [
            {"path": str(p.relative_to(self.outdir)), "sha256": sha256(p), "bytes": p.stat().st_size}
            for p in sorted(set(self.files))
        ]
        doc = {
            "command": self.command,
            "config": self.config,
            "config_hash": config_hash(self.config),
            "tolerances": self.tolerances,
            "results": self.results,
            "timings_s": {k: round(v, 4) for k, v in self.timings.items()},
            "files": entries,
            "python": platform.python_version(),
            "numpy": np.__version__,
        }
        self.outdir.mkdir(parents=True, exist_ok=True)
        path = self.outdir / "manifest.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8")
        return path


class SnapshotWriter:
    """Writes slab snapshots from a single background thread so stepping never waits on disk."""

    def __init__(self, manifest, x, y, prefix="snapshot"):
        self.manifest = manifest
        self.x = np.asarray(x)
        self.y = np.asarray(y)
        self.prefix = prefix
        self.index = []
        self._pool = ThreadPoolExecutor(max_workers=1)
        self._futures = []

    def __call__(self, t, u, offset):
        k = len(self.index)
        name = f"{self.prefix}_{k:04d}.csv"
        self.index.append((k, t, offset, name))
        self._futures.append(self._pool.submit(self._write, name, np.array(u), offset))

    def _write(self, name, u, offset):
        xs, ys = self.x + offset, self.y
        rows = ((xs[i], ys[j], u[i, j]) for i in range(u.shape[0]) for j in range(u.shape[1]))
        return write_csv(self.manifest.outdir / name, ["x1", "y", "u"], rows)

    def close(self):
        for fut in self._futures:
            self.manifest.add(fut.result())
        self._pool.shutdown()
        self.manifest.csv(f"{self.prefix}s.csv", ["index", "t", "window_offset", "file"], self.index)
