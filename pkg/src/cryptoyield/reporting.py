"""Report assembly and deterministic emission.

A report is a summary dict plus named CSV series. Emission is strictly
reproducible: floats render via repr (shortest round-trip), JSON keys are
sorted, newlines are fixed, and provenance carries the config hash, tool
version, seed and input-file digests instead of timestamps. Identical
config and inputs therefore produce byte-identical files.

All series are computed before anything is written; if writing itself
fails, the partial outputs are removed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from dataclasses import dataclass, field

from . import __version__
from .errors import InputError


def render_value(value):
    """Canonical cell rendering: repr for floats, str otherwise."""
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def config_hash(config: dict) -> str:
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()


def file_digest(path) -> str:
    h = hashlib.sha256()
    try:
        with open(path, "rb") as fh:
            for chunk in iter(lambda: fh.read(65536), b""):
                h.update(chunk)
    except OSError as exc:
        raise InputError(f"{path}: {exc}") from exc
    return h.hexdigest()


@dataclass
class Series:
    name: str
    columns: tuple
    rows: list


@dataclass
class Report:
    command: str
    summary: dict
    series: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def add_series(self, name, columns, rows):
        self.series.append(Series(name=name, columns=tuple(columns), rows=rows))

    def finalize_provenance(self, config: dict, input_paths=(), seed=None):
        # The config itself is embedded so a report can be reproduced from
        # the report directory alone; the hash is for quick comparison.
        self.provenance = {
            "version": __version__,
            "config": config,
            "config_hash": config_hash(config),
            "seed": seed,
            "inputs": {str(p): file_digest(p) for p in sorted(str(x) for x in input_paths)},
        }

    def write(self, out_dir) -> list:
        """Write report.json plus one CSV per series; returns written paths."""
        os.makedirs(out_dir, exist_ok=True)
        written = []
        try:
            for series in self.series:
                path = os.path.join(out_dir, f"{series.name}.csv")
                written.append(path)  # track before opening so cleanup covers it
                with open(path, "w", newline="") as fh:
                    writer = csv.writer(fh, lineterminator="\n")
                    writer.writerow(series.columns)
                    for row in series.rows:
                        writer.writerow([render_value(row[c]) for c in series.columns])
            report_path = os.path.join(out_dir, "report.json")
            written.append(report_path)
            payload = {
                "command": self.command,
                "summary": self.summary,
                "series_files": [f"{s.name}.csv" for s in self.series],
                "provenance": self.provenance,
            }
            with open(report_path, "w") as fh:
                json.dump(payload, fh, sort_keys=True, indent=2, default=str)
                fh.write("\n")
        except BaseException:
            for path in written:
                try:
                    os.unlink(path)
                except OSError:
                    pass
            raise
        return written
