"""
Result emission: delimited tables, a JSON summary and rendered figures.

Every run produces a set of named tables (fixed column schemas declared
by the producing module), a ``summary.json`` echoing the config, seeds,
pass/fail flags and a content hash, and one PNG figure per table group.
The content hash covers the config and all table payloads but not the
timestamp, so reruns with identical config are detectable as identical.

Nothing is written outside the chosen output directory, and all content
is materialized in memory before the first file is created, so a failed
run leaves no partial artifacts.
"""

import hashlib
import json
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np


@dataclass
class Table:
    """A named table with a fixed column schema."""

    name: str
    columns: tuple
    rows: list


@dataclass
class ExperimentResult:
    """Everything one experiment produces, prior to emission."""

    experiment: str
    tables: list = field(default_factory=list)
    assertions: dict = field(default_factory=dict)   # name -> bool
    details: dict = field(default_factory=dict)
    figures: list = field(default_factory=list)      # (name, draw_fn)

    @property
    def passed(self):
        return all(self.assertions.values())

    def add_table(self, name, columns, rows):
        self.tables.append(Table(name, tuple(columns), list(rows)))

    def record(self, name, ok, detail=None):
        self.assertions[name] = bool(ok)
        if detail is not None:
            self.details[name] = detail


def _format_cell(x):
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def render_csv(table, header_meta):
    lines = ["# " + header_meta]
    lines.append(",".join(table.columns))
    for row in table.rows:
        lines.append(",".join(_format_cell(c) for c in row))
    return "\n".join(lines) + "\n"


def content_hash(config_dict, tables):
    """SHA-256 over the canonical config and all table payloads."""
    blob = json.dumps(config_dict, sort_keys=True)
    h = hashlib.sha256(blob.encode())
    for t in sorted(tables, key=lambda t: t.name):
        h.update(t.name.encode())
        h.update(",".join(t.columns).encode())
        for row in t.rows:
            h.update(("|".join(_format_cell(c) for c in row)).encode())
    return h.hexdigest()


def emit_results(result, config, out_dir, fmt=None, make_figures=True):
    """
    Write all artifacts of one experiment run into ``out_dir``.

    CSV format writes one file per table plus summary.json; JSON format
    puts all tables into the summary file.  Figures are rendered to PNG
    alongside.  Returns the list of written paths.
    """
    cfg_dict = config.to_dict()
    fmt = fmt or cfg_dict["output"]["format"]
    chash = content_hash(cfg_dict, result.tables)
    meta = "config_hash=%s master_seed=%d experiment=%s" % (
        chash, cfg_dict["noise"]["master_seed"], result.experiment)

    # materialize everything before touching the filesystem
    files = {}
    if fmt == "csv":
        for t in result.tables:
            files["%s.csv" % t.name] = render_csv(t, meta)
    summary = {
        "experiment": result.experiment,
        "config": cfg_dict,
        "config_hash": chash,
        "passed": result.passed,
        "assertions": result.assertions,
        "details": result.details,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    if fmt == "json":
        summary["tables"] = [
            {"name": t.name, "columns": list(t.columns), "rows": t.rows}
            for t in result.tables
        ]
    files["summary.json"] = json.dumps(summary, indent=2, default=float) + "\n"

    try:
        os.makedirs(out_dir, exist_ok=True)
        probe = os.path.join(out_dir, ".write_probe")
        with open(probe, "w") as f:
            f.write("")
        os.remove(probe)
    except OSError as exc:
        raise OSError("output directory %r is not writable: %s"
                      % (out_dir, exc))

    written = []
    for name, payload in sorted(files.items()):
        path = os.path.join(out_dir, name)
        with open(path, "w") as f:
            f.write(payload)
        written.append(path)

    if make_figures:
        from . import plots
        for name, draw in result.figures:
            path = os.path.join(out_dir, name + ".png")
            plots.render(path, draw, description=meta)
            written.append(path)
    return written
