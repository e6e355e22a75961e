"""Deterministic artifact output: CSV curves, JSON summaries, manifests.

Every run directory gets a manifest.json listing produced files with sha256
content hashes. Floats are written with repr (shortest round-trip), newlines
are LF, decimal separator is '.', so repeated runs are byte identical.
"""

from __future__ import annotations

import hashlib
import json
import os

import numpy as np

__all__ = ["fmt", "write_csv", "write_json", "write_manifest", "bode_rows"]


def fmt(x):
    """Shortest round-trip decimal representation."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    v = float(x)
    if v == int(v) and abs(v) < 1e16:
        return repr(v)
    return repr(v)


def write_csv(path, header, rows):
    """Write rows (iterables of numbers/strings) with LF endings."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else fmt(c) for c in row))
    data = "\n".join(lines) + "\n"
    with open(path, "w", newline="") as f:
        f.write(data)
    return path


def write_json(path, obj):
    with open(path, "w", newline="") as f:
        json.dump(obj, f, indent=1, sort_keys=True)
        f.write("\n")
    return path


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(outdir, figure, files, summary=None, annotations=None,
                   parameters=None, plots=None):
    """manifest.json for a run; ``plots`` maps filename -> plot hint dict."""
    plots = plots or {}
    entries = []
    for name in sorted(files):
        entries.append({
            "name": name,
            "sha256": _sha256(os.path.join(outdir, name)),
            "plot": plots.get(name),
        })
    manifest = {
        "figure": figure,
        "note": "analog, not bit-reproduction",
        "files": entries,
        "summary": summary or {},
        "annotations": annotations or {},
        "parameters": parameters or {},
    }
    path = os.path.join(outdir, "manifest.json")
    write_json(path, manifest)
    return path


def bode_rows(omegas, response):
    """(omega, mag, unwrapped phase in degrees) rows from a complex response."""
    mag = np.abs(response)
    phase = np.degrees(np.unwrap(np.angle(response)))
    return [(w, m, p) for w, m, p in zip(omegas, mag, phase)]
