"""Problem-file parsing and canonical serialization.

A problem file carries one named analysis input: a pencil, a descriptor
system, dissipative-Hamiltonian or port-Hamiltonian factors, or a
geometric structure pair.  Two formats are supported: a single JSON file,
and a matrix-market bundle (a directory of NAME.mtx files plus a
manifest.json giving the kind).  Parsing never applies tolerances; the
matrices come back exactly as written, with integer entries preserved for
byte-identical round trips.
"""

import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np
import scipy.io as sio

from .config import ToleranceConfig
from .errors import ParseError

__all__ = ["ProblemFile", "REQUIRED_MATRICES", "parse_problem", "emit_problem",
           "write_problem", "canonical_json"]

REQUIRED_MATRICES = {
    "pencil": ("E", "A"),
    "descriptor": ("E", "A", "B"),
    "dh": ("E", "J", "R", "Q"),
    "ph": ("E", "J", "R", "Q", "B", "P", "S", "N"),
    "geometry": ("L1", "L2", "D1", "D2"),
}

OPTIONAL_MATRICES = {
    "pencil": ("x0",),
    "descriptor": ("x0",),
    "dh": ("x0",),
    "ph": (),
    "geometry": (),
}


@dataclass(frozen=True)
class ProblemFile:
    """Validated problem: kind, named matrices, optional overrides."""

    kind: str
    matrices: dict
    tolerances: ToleranceConfig | None = None
    metadata: dict = field(default_factory=dict)

    def matrix(self, name: str) -> np.ndarray:
        return np.asarray(self.matrices[name], dtype=float)


def _shape_of(rows, name):
    if not isinstance(rows, list) or not rows:
        raise ParseError(f"matrix {name!r} must be a non-empty list of rows")
    if all(isinstance(v, (int, float)) for v in rows):
        return (len(rows), 1), [[v] for v in rows]
    width = None
    for i, row in enumerate(rows):
        if not isinstance(row, list) or not row:
            raise ParseError(f"matrix {name!r} row {i} is not a non-empty list")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(
                f"matrix {name!r} row {i} has {len(row)} entries, expected {width}")
        for j, v in enumerate(row):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParseError(f"matrix {name!r} entry ({i},{j}) is not a number")
    return (len(rows), width), rows


def _validate(kind, matrices):
    if kind not in REQUIRED_MATRICES:
        raise ParseError(f"unknown kind {kind!r}; expected one of "
                         f"{sorted(REQUIRED_MATRICES)}")
    shapes = {}
    normalized = {}
    for name in REQUIRED_MATRICES[kind]:
        if name not in matrices:
            raise ParseError(f"{name} missing for kind {kind!r}")
    for name, rows in matrices.items():
        allowed = REQUIRED_MATRICES[kind] + OPTIONAL_MATRICES[kind]
        if name not in allowed:
            raise ParseError(f"unexpected matrix {name!r} for kind {kind!r}")
        shapes[name], normalized[name] = _shape_of(rows, name)
    n = shapes["E"][0] if "E" in shapes else shapes["L1"][0]
    square = {"pencil": ("E", "A"), "descriptor": ("E", "A"),
              "dh": ("E", "J", "R", "Q"), "ph": ("E", "J", "R", "Q"),
              "geometry": ("L1", "L2", "D1", "D2")}[kind]
    for name in square:
        if shapes[name] != (n, n):
            raise ParseError(f"matrix {name!r} must be {n}x{n}, got "
                             f"{shapes[name][0]}x{shapes[name][1]}")
    if kind in ("descriptor", "ph"):
        k = shapes["B"][1]
        if shapes["B"][0] != n:
            raise ParseError(f"matrix 'B' must have {n} rows")
        if kind == "ph":
            if shapes["P"] != (n, k):
                raise ParseError(f"matrix 'P' must be {n}x{k}")
            for name in ("S", "N"):
                if shapes[name] != (k, k):
                    raise ParseError(f"matrix {name!r} must be {k}x{k}")
    if "x0" in shapes and shapes["x0"] not in ((n, 1), (1, n)):
        raise ParseError(f"matrix 'x0' must be a length-{n} vector")
    return normalized


def _parse_json(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            payload = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON at line {exc.lineno}, "
                         f"column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(payload, dict) or "kind" not in payload:
        raise ParseError(f"{path}: top level must be an object with a 'kind' field")
    kind = payload["kind"]
    matrices = {k: v for k, v in payload.items()
                if k not in ("kind", "tolerances", "metadata")}
    tolerances = None
    if "tolerances" in payload:
        tolconf = payload["tolerances"]
        if not isinstance(tolconf, dict):
            raise ParseError(f"{path}: 'tolerances' must be an object")
        tolerances = ToleranceConfig(atol=float(tolconf.get("atol", 1e-10)),
                                     rtol=float(tolconf.get("rtol", 1e-8)))
    metadata = payload.get("metadata", {})
    if not isinstance(metadata, dict):
        raise ParseError(f"{path}: 'metadata' must be an object")
    return ProblemFile(kind, _validate(kind, matrices), tolerances, dict(metadata))


def _entry_to_json(value):
    if float(value).is_integer() and abs(value) < 2 ** 53:
        return int(value)
    return float(value)


def _parse_bundle(path):
    manifest_path = os.path.join(path, "manifest.json")
    if not os.path.exists(manifest_path):
        raise ParseError(f"{path}: bundle manifest.json missing")
    try:
        with open(manifest_path, "r", encoding="utf-8") as handle:
            manifest = json.load(handle)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{manifest_path}: invalid JSON: {exc.msg}") from exc
    if "kind" not in manifest:
        raise ParseError(f"{manifest_path}: 'kind' missing")
    kind = manifest["kind"]
    matrices = {}
    for entry in sorted(os.listdir(path)):
        if entry.endswith(".mtx"):
            name = entry[:-4]
            try:
                raw = sio.mmread(os.path.join(path, entry))
            except Exception as exc:
                raise ParseError(f"{path}/{entry}: {exc}") from exc
            dense = np.asarray(raw.todense() if hasattr(raw, "todense") else raw)
            matrices[name] = [[_entry_to_json(v) for v in row] for row in dense]
    tolerances = None
    if "tolerances" in manifest:
        tolerances = ToleranceConfig(
            atol=float(manifest["tolerances"].get("atol", 1e-10)),
            rtol=float(manifest["tolerances"].get("rtol", 1e-8)))
    return ProblemFile(kind, _validate(kind, matrices), tolerances,
                       dict(manifest.get("metadata", {})))


def parse_problem(path: str, fmt: str = "json") -> ProblemFile:
    """Read and validate a problem file.

    ``fmt`` is ``json`` or ``matrix-market-bundle``; the latter expects a
    directory.  Raises :class:`ParseError` with field context on malformed
    input.
    """
    if fmt == "json":
        return _parse_json(path)
    if fmt == "matrix-market-bundle":
        if not os.path.isdir(path):
            raise ParseError(f"{path}: bundle format expects a directory")
        return _parse_bundle(path)
    raise ParseError(f"unknown format {fmt!r}")


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj)!r}")


def canonical_json(payload) -> str:
    """Deterministic JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n"


def emit_problem(problem: ProblemFile) -> str:
    """Canonical JSON text for a problem (inverse of the JSON parser)."""
    payload = {"kind": problem.kind}
    for name, rows in problem.matrices.items():
        payload[name] = [[_entry_to_json(v) for v in row] for row in rows]
    if problem.tolerances is not None:
        payload["tolerances"] = {"atol": problem.tolerances.atol,
                                 "rtol": problem.tolerances.rtol}
    if problem.metadata:
        payload["metadata"] = problem.metadata
    return canonical_json(payload)


def write_problem(problem: ProblemFile, path: str):
    """Atomically write the canonical JSON form."""
    atomic_write_text(path, emit_problem(problem))


def atomic_write_text(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
