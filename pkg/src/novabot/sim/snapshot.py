"""Tumor snapshot container and its plain-text file format.

::

    NOVABOT-SNAPSHOT v1
    domain_half_width=<float> seed=<int>
    Tumor,<x>,<y>,<radius>          (one row per cell)
    OXYGEN <nx> <ny> <spacing>
    <nx values>                     (ny rows, row-major, y ascending)

Floats are written with 17 significant digits so that a load/save cycle
reproduces the file byte for byte.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from novabot.errors import SnapshotError

MAGIC = "NOVABOT-SNAPSHOT"
FORMAT_VERSION = 1
CELL_KINDS = ("Tumor",)


def fmt(x: float) -> str:
    return format(float(x), ".17g")


@dataclass(frozen=True, eq=False)
class TumorSnapshot:
    format_version: int
    domain_half_width: float
    rng_seed_of_growth: int
    positions: np.ndarray
    radii: np.ndarray
    oxygen_grid: np.ndarray
    oxygen_spacing: float

    def __post_init__(self):
        for arr in (self.positions, self.radii, self.oxygen_grid):
            arr.setflags(write=False)

    @property
    def count(self) -> int:
        return len(self.radii)

    @property
    def cells(self):
        return [("Tumor", float(x), float(y), float(r))
                for (x, y), r in zip(self.positions, self.radii)]

    def __eq__(self, other):
        if not isinstance(other, TumorSnapshot):
            return NotImplemented
        return (self.format_version == other.format_version
                and self.domain_half_width == other.domain_half_width
                and self.rng_seed_of_growth == other.rng_seed_of_growth
                and self.oxygen_spacing == other.oxygen_spacing
                and np.array_equal(self.positions, other.positions)
                and np.array_equal(self.radii, other.radii)
                and np.array_equal(self.oxygen_grid, other.oxygen_grid))

    def to_text(self) -> str:
        lines = [f"{MAGIC} v{self.format_version}",
                 f"domain_half_width={fmt(self.domain_half_width)} seed={int(self.rng_seed_of_growth)}"]
        for (x, y), r in zip(self.positions, self.radii):
            lines.append(f"Tumor,{fmt(x)},{fmt(y)},{fmt(r)}")
        ny, nx = self.oxygen_grid.shape
        lines.append(f"OXYGEN {nx} {ny} {fmt(self.oxygen_spacing)}")
        for row in self.oxygen_grid:
            lines.append(" ".join(fmt(v) for v in row))
        return "\n".join(lines) + "\n"


def save_snapshot(snapshot: TumorSnapshot, path) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(snapshot.to_text())


def _float(token, lineno, what):
    try:
        v = float(token)
    except ValueError:
        raise SnapshotError(f"cannot parse {what} {token!r}", lineno) from None
    if not math.isfinite(v):
        raise SnapshotError(f"non-finite {what} {token!r}", lineno)
    return v


def parse_snapshot(text: str) -> TumorSnapshot:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise SnapshotError("empty file", 1)
    head = lines[0].split()
    if len(head) != 2 or head[0] != MAGIC or not head[1].startswith("v"):
        raise SnapshotError(f"expected '{MAGIC} v<N>' header", 1)
    try:
        version = int(head[1][1:])
    except ValueError:
        raise SnapshotError(f"bad version token {head[1]!r}", 1) from None
    if version != FORMAT_VERSION:
        raise SnapshotError(f"unsupported format_version {version} (expected {FORMAT_VERSION})", 1)
    if len(lines) < 2:
        raise SnapshotError("missing domain line", 2)
    meta = {}
    for tok in lines[1].split():
        key, sep, val = tok.partition("=")
        if not sep:
            raise SnapshotError(f"expected key=value, got {tok!r}", 2)
        meta[key] = val
    if set(meta) != {"domain_half_width", "seed"}:
        raise SnapshotError("domain line needs domain_half_width= and seed=", 2)
    half_width = _float(meta["domain_half_width"], 2, "domain_half_width")
    try:
        seed = int(meta["seed"])
    except ValueError:
        raise SnapshotError(f"bad seed {meta['seed']!r}", 2) from None

    xy, radii = [], []
    k = 2
    while k < len(lines) and not lines[k].startswith("OXYGEN"):
        lineno = k + 1
        parts = lines[k].split(",")
        if len(parts) != 4:
            raise SnapshotError(f"expected 4 CSV fields, got {len(parts)}", lineno)
        if parts[0] not in CELL_KINDS:
            raise SnapshotError(f"unsupported cell kind {parts[0]!r}", lineno)
        x = _float(parts[1], lineno, "x")
        y = _float(parts[2], lineno, "y")
        r = _float(parts[3], lineno, "radius")
        if r <= 0:
            raise SnapshotError("radius must be > 0", lineno)
        if abs(x) > half_width or abs(y) > half_width:
            raise SnapshotError("cell outside domain", lineno)
        xy.append((x, y))
        radii.append(r)
        k += 1
    if not xy:
        raise SnapshotError("snapshot contains no cells", k + 1)
    if k >= len(lines):
        raise SnapshotError("missing OXYGEN section", k + 1)
    ohead = lines[k].split()
    if len(ohead) != 4:
        raise SnapshotError("expected 'OXYGEN <nx> <ny> <spacing>'", k + 1)
    try:
        nx, ny = int(ohead[1]), int(ohead[2])
    except ValueError:
        raise SnapshotError("bad OXYGEN dimensions", k + 1) from None
    spacing = _float(ohead[3], k + 1, "spacing")
    rows = lines[k + 1:]
    if len(rows) != ny:
        raise SnapshotError(f"expected {ny} oxygen rows, found {len(rows)}", k + 2)
    grid = np.empty((ny, nx))
    for r_i, row in enumerate(rows):
        lineno = k + 2 + r_i
        vals = row.split()
        if len(vals) != nx:
            raise SnapshotError(f"expected {nx} oxygen values, got {len(vals)}", lineno)
        grid[r_i] = [_float(v, lineno, "oxygen value") for v in vals]
    return TumorSnapshot(
        format_version=version,
        domain_half_width=half_width,
        rng_seed_of_growth=seed,
        positions=np.array(xy, dtype=float).reshape(-1, 2),
        radii=np.array(radii, dtype=float),
        oxygen_grid=grid,
        oxygen_spacing=spacing,
    )


def load_snapshot(path) -> TumorSnapshot:
    if not os.path.exists(path):
        raise FileNotFoundError(f"snapshot not found: {path}")
    with open(path, encoding="ascii") as fh:
        return parse_snapshot(fh.read())
