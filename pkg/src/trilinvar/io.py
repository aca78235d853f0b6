"""Orbit-table and expanded-polynomial files, and the run manifest."""

import hashlib
import json
import os
import platform
from pathlib import Path

import numpy as np

from . import __version__
from .monomials import InvalidInput, format_monomial
from .polynomial import Polynomial
from .symmetry import alternating_orbit_sum, format_orbit_row, parse_orbit_row, symmetric_orbit_sum

ORBIT_SUFFIX = ".orbits"
EXPANDED_SUFFIX = ".expanded"


def _header(fields):
    return "# " + " ".join(f"{k}={v}" for k, v in fields.items())


def _parse_header(lines):
    fields = {}
    for line in lines:
        if not line.startswith("#"):
            break
        for tok in line[1:].split():
            if "=" in tok:
                k, v = tok.split("=", 1)
                fields[k] = v
    return fields


def write_orbit_table(path, record, nonzero_only=False):
    rows = record.nonzero_terms() if nonzero_only else record.orbit_table
    lines = [_header({"name": record.name, "degree": record.degree, "kind": record.kind})]
    lines += [format_orbit_row(t.coeff, t.min_rep, t.size) for t in rows]
    _write_lines(path, lines)


def write_expanded(path, record_or_poly, name=None):
    poly = getattr(record_or_poly, "expanded", record_or_poly)
    name = name or getattr(record_or_poly, "name", "poly")
    lines = [_header({"name": name, "degree": poly.degree if poly.degree is not None else 0, "terms": len(poly)})]
    lines += poly.to_lines()
    _write_lines(path, lines)


def write_monomials(path, exps):
    _write_lines(path, [format_monomial(e) for e in exps])


def _write_lines(path, lines):
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")


def orbit_sum_at(rep, kind):
    """Orbit sum of ``rep`` normalised so ``rep`` itself has coefficient +1."""
    if kind == "symmetric":
        return symmetric_orbit_sum(rep)
    if kind != "alternating":
        raise InvalidInput(f"unknown orbit-sum kind {kind!r}")
    s = alternating_orbit_sum(rep)
    if s.is_zero():
        raise InvalidInput(f"alternating orbit sum of {format_monomial(rep)} vanishes")
    return s.scale(s.coefficient(rep))


def read_orbit_table(path):
    """Expand an orbit-table file into ``(fields, rows, polynomial)``.

    Each row contributes ``coeff * O(rep)`` with the orbit sum normalised at
    the listed representative, which need not be the minimal one.
    """
    lines = Path(path).read_text().splitlines()
    fields = _parse_header(lines)
    kind = fields.get("kind", "symmetric")
    rows = [parse_orbit_row(line) for line in lines if line.strip() and not line.startswith("#")]
    exps, coeffs = [], []
    for coeff, rep, _size in rows:
        if coeff == 0:
            continue
        s = orbit_sum_at(rep, kind)
        exps.append(s.exps)
        coeffs.append(s.coeffs * coeff)
    if not exps:
        return fields, rows, Polynomial()
    return fields, rows, Polynomial(np.vstack(exps), np.concatenate(coeffs))


def read_expanded(path):
    lines = Path(path).read_text().splitlines()
    return _parse_header(lines), Polynomial.from_lines(lines)


def load_polynomial(path):
    """Read either file format, telling them apart by column layout."""
    text = Path(path).read_text()
    body = [line for line in text.splitlines() if line.strip() and not line.startswith("#")]
    if body and "\t" in body[0]:
        fields, _rows, poly = read_orbit_table(path)
    else:
        fields, poly = read_expanded(path)
    return fields, poly


def sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_manifest(out_dir, command, params, results, artifacts, timing=None):
    """Write ``manifest.json`` listing every artifact with its sha256 checksum.

    Everything except ``timing`` and ``environment`` is a deterministic
    function of the command and its parameters.
    """
    out_dir = Path(out_dir)
    files = {}
    for path in sorted(artifacts):
        p = Path(path)
        files[p.name] = {"sha256": sha256(p), "bytes": p.stat().st_size}
    manifest = {
        "tool": "trilinvar",
        "version": __version__,
        "command": command,
        "parameters": _jsonable(params),
        "results": _jsonable(results),
        "artifacts": files,
        "timing": _jsonable(timing or {}),
        "environment": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "threads": os.environ.get("TRILINVAR_THREADS"),
        },
    }
    path = out_dir / "manifest.json"
    with open(path, "w", newline="\n") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
