"""Persistence: timeseries CSV, binary state snapshots, run manifests.

The CSV column set is a frozen external contract (plot tooling keys on
it); the snapshot format is a 16-byte magic followed by raw little-endian
float64 arrays, with integrity data in a JSON sidecar next to the file.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .diagnostics import DiagnosticsRecord
from .dynamics import State
from .errors import CorruptSnapshotError, InvalidInputError
from .grid import DIRICHLET, NEUMANN, Grid, ScalarField, VectorField

SNAPSHOT_MAGIC = b"THERMOFLOW-SNAP1"

CSV_HEADER = ("t,energy,entropy,entropy_production,fisher,higher_functional,"
              "theta_min,theta_max,u_h1,v_h1,theta_l2,lp_2,lp_4,lp_8,lp_16,lp_32")


def _record_row(r: DiagnosticsRecord) -> str:
    scalars = [r.t, r.energy, r.entropy, r.entropy_production, r.fisher,
               r.higher_functional, r.theta_min, r.theta_max,
               r.u_h1, r.v_h1, r.theta_l2, *r.lp_norms]
    return ",".join(repr(v) for v in scalars)


def write_timeseries(records, path) -> None:
    """CSV with the frozen header; floats use shortest round-trip encoding."""
    if not records:
        raise InvalidInputError("refusing to write an empty timeseries")
    path = Path(path)
    lines = [CSV_HEADER]
    lines.extend(_record_row(r) for r in records)
    path.write_text("\n".join(lines) + "\n")


def read_timeseries(path) -> list[DiagnosticsRecord]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise InvalidInputError(f"cannot read timeseries {path}: {e}") from e
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or lines[0] != CSV_HEADER:
        raise InvalidInputError(f"{path} is not a thermoflow timeseries (bad header)")
    records = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != 16:
            raise InvalidInputError(f"{path}: expected 16 columns, got {len(parts)}")
        vals = [float(p) for p in parts]
        records.append(DiagnosticsRecord(
            t=vals[0], energy=vals[1], entropy=vals[2], entropy_production=vals[3],
            fisher=vals[4], higher_functional=vals[5], theta_min=vals[6],
            theta_max=vals[7], u_h1=vals[8], v_h1=vals[9], theta_l2=vals[10],
            lp_norms=tuple(vals[11:16]),
        ))
    return records


# ---------------------------------------------------------------------------
# Snapshots


def _array_names(dim: int) -> list[str]:
    return ["theta"] + [f"u{i}" for i in range(dim)] + [f"v{i}" for i in range(dim)]


def _le_bytes(values: np.ndarray) -> bytes:
    return np.ascontiguousarray(values, dtype="<f8").tobytes()


def write_snapshot(state: State, path) -> None:
    """Binary state dump plus a JSON sidecar with shapes and checksums."""
    path = Path(path)
    grid = state.grid
    arrays = [state.theta.values] + [c.values for c in state.u.components] \
        + [c.values for c in state.v.components]
    names = _array_names(grid.dim)

    blobs = [_le_bytes(a) for a in arrays]
    with open(path, "wb") as f:
        f.write(SNAPSHOT_MAGIC)
        for blob in blobs:
            f.write(blob)

    sidecar = {
        "format": SNAPSHOT_MAGIC.decode("ascii"),
        "n_points": list(grid.n_points),
        "lengths": list(grid.lengths),
        "time": state.t,
        "arrays": names,
        "sha256": {name: hashlib.sha256(blob).hexdigest() for name, blob in zip(names, blobs)},
    }
    Path(str(path) + ".json").write_text(json.dumps(sidecar, indent=2) + "\n")


def read_snapshot(path) -> State:
    path = Path(path)
    sidecar_path = Path(str(path) + ".json")
    if not sidecar_path.exists():
        raise CorruptSnapshotError(f"sidecar {sidecar_path} is missing")
    try:
        meta = json.loads(sidecar_path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise CorruptSnapshotError(f"cannot parse sidecar {sidecar_path}: {e}") from e

    try:
        n_points = tuple(int(v) for v in meta["n_points"])
        lengths = tuple(float(v) for v in meta["lengths"])
        time = float(meta["time"])
        checksums = meta["sha256"]
    except (KeyError, TypeError, ValueError) as e:
        raise CorruptSnapshotError(f"sidecar {sidecar_path} has malformed fields: {e}") from e
    try:
        grid = Grid(n_points, lengths)
    except InvalidInputError as e:
        raise CorruptSnapshotError(f"sidecar grid is invalid: {e}") from e

    names = _array_names(grid.dim)
    points = int(np.prod(grid.shape))
    expected = len(SNAPSHOT_MAGIC) + 8 * points * len(names)
    try:
        blob = path.read_bytes()
    except OSError as e:
        raise CorruptSnapshotError(f"cannot read snapshot {path}: {e}") from e
    if blob[: len(SNAPSHOT_MAGIC)] != SNAPSHOT_MAGIC:
        raise CorruptSnapshotError(f"{path} does not start with the snapshot magic")
    if len(blob) != expected:
        raise CorruptSnapshotError(
            f"{path} holds {len(blob)} bytes, expected {expected} for grid {grid.n_points}")

    arrays = {}
    offset = len(SNAPSHOT_MAGIC)
    span = 8 * points
    for name in names:
        chunk = blob[offset: offset + span]
        offset += span
        if hashlib.sha256(chunk).hexdigest() != checksums.get(name):
            raise CorruptSnapshotError(f"checksum mismatch for array {name!r} in {path}")
        arrays[name] = np.frombuffer(chunk, dtype="<f8").astype(np.float64).reshape(grid.shape)

    theta = ScalarField(grid, arrays["theta"], NEUMANN)
    u = VectorField(tuple(ScalarField(grid, arrays[f"u{i}"], DIRICHLET)
                          for i in range(grid.dim)))
    v = VectorField(tuple(ScalarField(grid, arrays[f"v{i}"], DIRICHLET)
                          for i in range(grid.dim)))
    return State(time, u, v, theta)


# ---------------------------------------------------------------------------
# Manifests


def file_entry(path, base_dir) -> dict:
    """Checksum entry for one output file, path relative to the run directory."""
    path = Path(path)
    data = path.read_bytes()
    return {
        "path": str(path.relative_to(base_dir)),
        "bytes": len(data),
        "sha256": hashlib.sha256(data).hexdigest(),
    }


@dataclass
class RunManifest:
    """What ran, when, and what it produced, with content checksums."""

    config: dict
    code_version: str
    started: str
    finished: str
    outputs: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        data = json.loads(text)
        return cls(**data)

    def write(self, path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def read(cls, path) -> "RunManifest":
        return cls.from_json(Path(path).read_text())
