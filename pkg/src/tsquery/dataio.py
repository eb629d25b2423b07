"""Data ingestion, synthetic workload generation, index persistence, and
result emission.

CSV formats:
  * wide (canonical): one series per row, ``id, v1, v2, ..., vn``.
  * long: ``id, t, value`` rows with dense integer t starting at 0.
Header rows are auto-detected by attempting to parse the second cell of the
first row.

Index snapshots are little-endian binary files: magic ``TSRT``, a format
version, the space mode and tree parameters, the full-sequence store, the
node records in preorder, and a SHA-256 checksum over the payload.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import math
import os
import struct
from typing import Iterable

import numpy as np

from .errors import (
    DataFormatError,
    InvalidInputError,
    SnapshotChecksumError,
    SnapshotTruncatedError,
    SnapshotVersionError,
)
from .feature import FeatureRect, SpaceMode
from .rtree import RTree, _Entry, _Node
from .series import Relation, TimeSeries
from .spectral import dft

MAGIC = b"TSRT"
FORMAT_VERSION = 1


# -- CSV ingestion ------------------------------------------------------------


def _parse_float(cell: str, row: int, col: int) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise DataFormatError(
            f"row {row}, column {col}: {cell!r} is not a number"
        ) from None
    if not math.isfinite(v):
        raise DataFormatError(f"row {row}, column {col}: non-finite value {cell!r}")
    return v


def _is_float(cell: str) -> bool:
    try:
        return math.isfinite(float(cell))
    except ValueError:
        return False


def _read_rows(path) -> list[tuple[int, list[str]]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [
            (lineno, [c.strip() for c in row])
            for lineno, row in enumerate(csv.reader(fh), 1)
            if row and any(c.strip() for c in row)
        ]


def _detect_format(rows: list[tuple[int, list[str]]]) -> str:
    if all(len(cells) == 3 for _, cells in rows):
        first_col = [cells[0] for _, cells in rows]
        if len(set(first_col)) < len(first_col):
            return "long"
    return "wide"


def ingest_csv(path, fmt: str = "auto") -> Relation:
    """Read a relation from CSV. `fmt` is ``wide``, ``long``, or ``auto``
    (3-column files with repeated ids are taken as long)."""
    if fmt not in ("auto", "wide", "long"):
        raise InvalidInputError(f"unknown format {fmt!r}")
    rows = _read_rows(path)
    if not rows:
        return Relation([])
    if fmt == "auto":
        fmt = _detect_format(rows)
    return _ingest_long(rows) if fmt == "long" else _ingest_wide(rows)


def _strip_header(rows, int_second: bool):
    _, first = rows[0]
    if len(first) < 2:
        return rows
    cell = first[1]
    if int_second:
        is_data = cell.lstrip("+-").isdigit()
    else:
        is_data = _is_float(cell)
    return rows if is_data else rows[1:]


def _ingest_wide(rows) -> Relation:
    rows = _strip_header(rows, int_second=False)
    if not rows:
        return Relation([])
    width = len(rows[0][1])
    ragged = [lineno for lineno, cells in rows if len(cells) != width]
    if ragged:
        raise DataFormatError(
            f"rows with unequal length (expected {width} cells): rows {ragged}"
        )
    if width < 2:
        raise DataFormatError("wide rows need an id plus at least one value")
    series = []
    seen: set[str] = set()
    for lineno, cells in rows:
        sid = cells[0]
        if not sid:
            raise DataFormatError(f"row {lineno}: empty series id")
        if sid in seen:
            raise DataFormatError(f"row {lineno}: duplicate series id {sid!r}")
        seen.add(sid)
        values = [_parse_float(c, lineno, j + 2) for j, c in enumerate(cells[1:])]
        series.append(TimeSeries(id=sid, values=np.array(values)))
    return Relation(series)


def _ingest_long(rows) -> Relation:
    rows = _strip_header(rows, int_second=True)
    if not rows:
        return Relation([])
    samples: dict[str, list[tuple[int, float]]] = {}
    order: list[str] = []
    for lineno, cells in rows:
        if len(cells) != 3:
            raise DataFormatError(f"row {lineno}: long format needs 3 cells")
        sid, t_cell, v_cell = cells
        if not sid:
            raise DataFormatError(f"row {lineno}: empty series id")
        try:
            t = int(t_cell)
        except ValueError:
            raise DataFormatError(
                f"row {lineno}, column 2: {t_cell!r} is not an integer"
            ) from None
        v = _parse_float(v_cell, lineno, 3)
        if sid not in samples:
            samples[sid] = []
            order.append(sid)
        samples[sid].append((t, v))
    series = []
    for sid in order:
        pts = sorted(samples[sid])
        ts_index = [t for t, _ in pts]
        if ts_index != list(range(len(pts))):
            raise DataFormatError(
                f"series {sid!r}: time index not dense from 0 (got {ts_index[:5]}...)"
            )
        series.append(TimeSeries(id=sid, values=np.array([v for _, v in pts])))
    return Relation(series)


def write_relation_csv(rel: Relation, dest) -> None:
    """Dump a relation in the canonical wide format (full float precision)."""
    own = isinstance(dest, (str, os.PathLike))
    fh = open(dest, "w", newline="", encoding="utf-8") if own else dest
    try:
        writer = csv.writer(fh)
        for ts in rel:
            writer.writerow([ts.id] + [repr(float(v)) for v in ts.values])
    finally:
        if own:
            fh.close()


# -- synthetic workloads --------------------------------------------------------


def generate_synthetic(
    count: int, length: int, seed: int, uniform_start: bool = False
) -> Relation:
    """Random-walk relation: x_0 from a normal(59.5, 13.25) clipped to
    [20, 99] (or uniform on [20, 99] with uniform_start), then
    x_i = x_{i-1} + z_i with z_i uniform on [-4, 4].

    All randomness flows from the single seed through numpy's PCG64
    generator, so corpora are reproducible across platforms.
    """
    if count < 1:
        raise InvalidInputError("count must be >= 1")
    if length < 2:
        raise InvalidInputError("length must be >= 2")
    rng = np.random.default_rng(int(seed))
    if uniform_start:
        starts = rng.uniform(20.0, 99.0, size=count)
    else:
        starts = np.clip(rng.normal(59.5, 13.25, size=count), 20.0, 99.0)
    steps = rng.uniform(-4.0, 4.0, size=(count, length - 1))
    values = np.concatenate(
        [starts[:, None], starts[:, None] + np.cumsum(steps, axis=1)], axis=1
    )
    width = len(str(count - 1))
    return Relation(
        [
            TimeSeries(id=f"s{i:0{width}d}", values=values[i])
            for i in range(count)
        ]
    )


# -- index snapshots ------------------------------------------------------------


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise InvalidInputError(f"id too long to serialize: {s[:32]!r}...")
    return struct.pack("<H", len(raw)) + raw


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise SnapshotTruncatedError(
                f"snapshot ended at byte {len(self.data)}, needed {self.pos + n}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self) -> str:
        (n,) = self.unpack("<H")
        return self.take(n).decode("utf-8")

    def floats(self, n: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * n), dtype="<f8").astype(np.float64)


def _write_node(out: io.BytesIO, node: _Node, ndims: int):
    out.write(struct.pack("<BIH", 1 if node.leaf else 0, node.uid, len(node.entries)))
    for e in node.entries:
        if node.leaf:
            out.write(_pack_str(e.rid))
            out.write(np.asarray(e.dims, dtype="<f8").tobytes())
        else:
            out.write(np.asarray(e.rect.lo, dtype="<f8").tobytes())
            out.write(np.asarray(e.rect.hi, dtype="<f8").tobytes())
            _write_node(out, e.child, ndims)


def _read_node(r: _Reader, ndims: int, angle_mask: np.ndarray) -> tuple[_Node, int]:
    leaf_flag, uid, n_entries = r.unpack("<BIH")
    node = _Node(uid, leaf=bool(leaf_flag))
    max_uid = uid
    for _ in range(n_entries):
        if node.leaf:
            rid = r.string()
            dims = r.floats(ndims)
            rect = FeatureRect.from_point(dims, angle_mask)
            node.entries.append(_Entry(rect, dims=dims, rid=rid))
        else:
            lo = r.floats(ndims)
            hi = r.floats(ndims)
            child, child_max = _read_node(r, ndims, angle_mask)
            max_uid = max(max_uid, child_max)
            node.entries.append(
                _Entry(FeatureRect(angle_mask, lo, hi), child=child)
            )
    return node, max_uid


def save_index(tree: RTree, path) -> None:
    """Write a versioned, checksummed snapshot (atomic: temp file + rename)."""
    payload = io.BytesIO()
    mode = tree.mode
    payload.write(
        struct.pack(
            "<BIIIBIQ",
            0 if mode.kind == "raw" else 1,
            mode.k,
            tree.capacity,
            tree.min_fill,
            1 if tree.prenormalized else 0,
            tree.height,
            tree.count,
        )
    )
    n = tree.series_length or 0
    payload.write(struct.pack("<IQ", len(tree.series), n))
    for rid in sorted(tree.series):
        payload.write(_pack_str(rid))
        payload.write(np.asarray(tree.series[rid], dtype="<f8").tobytes())
    payload.write(struct.pack("<I", len(tree.skipped)))
    for rid in tree.skipped:
        payload.write(_pack_str(rid))
    ndims = mode.ndims
    payload.write(struct.pack("<B", ndims))
    payload.write(bytes(int(b) for b in mode.angle_mask))
    _write_node(payload, tree.root, ndims)
    blob = payload.getvalue()
    data = MAGIC + struct.pack("<H", FORMAT_VERSION) + blob
    data += hashlib.sha256(blob).digest()
    tmp = os.fspath(path) + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def load_index(path) -> RTree:
    """Load a snapshot, verifying magic, version, and checksum before any
    parsing; a failed load never returns a partial tree."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < len(MAGIC) + 2 + 32:
        raise SnapshotTruncatedError(f"file too short ({len(data)} bytes)")
    if data[: len(MAGIC)] != MAGIC:
        raise SnapshotVersionError("not a tsquery index snapshot (bad magic)")
    (version,) = struct.unpack("<H", data[len(MAGIC) : len(MAGIC) + 2])
    if version != FORMAT_VERSION:
        raise SnapshotVersionError(
            f"snapshot version {version} unsupported (expected {FORMAT_VERSION})"
        )
    blob = data[len(MAGIC) + 2 : -32]
    if hashlib.sha256(blob).digest() != data[-32:]:
        raise SnapshotChecksumError("payload checksum mismatch")
    r = _Reader(blob)
    try:
        mode_tag, k, capacity, min_fill, prenorm, height, count = r.unpack("<BIIIBIQ")
        mode = SpaceMode("raw" if mode_tag == 0 else "normal", k)
        tree = RTree(mode, capacity, prenormalized=bool(prenorm))
        if tree.min_fill != min_fill:
            tree.min_fill = min_fill
        tree.height = height
        tree.count = count
        n_series, n = r.unpack("<IQ")
        for _ in range(n_series):
            rid = r.string()
            tree.series[rid] = r.floats(int(n))
        (n_skip,) = r.unpack("<I")
        tree.skipped = [r.string() for _ in range(n_skip)]
        (ndims,) = r.unpack("<B")
        if ndims != mode.ndims:
            raise SnapshotVersionError(
                f"snapshot dimensionality {ndims} != mode dimensionality {mode.ndims}"
            )
        mask = np.array([b != 0 for b in r.take(ndims)])
        if not np.array_equal(mask, mode.angle_mask):
            raise SnapshotVersionError("snapshot angle layout does not match mode")
        root, max_uid = _read_node(r, ndims, mode.angle_mask)
        if r.pos != len(blob):
            raise SnapshotTruncatedError(
                f"{len(blob) - r.pos} unexpected trailing bytes"
            )
    except struct.error as exc:
        raise SnapshotTruncatedError(f"snapshot ended mid-record: {exc}") from exc
    tree.root = root
    skipped = set(tree.skipped)
    for rid, values in tree.series.items():
        if rid in skipped:
            continue
        comp = tree.comparison_signal(values)
        tree._comparison[rid] = comp
        tree._spectra[rid] = dft(comp)
    tree._uid = itertools.count(max_uid + 1)
    return tree


# -- result emission -------------------------------------------------------------


def format_query_rows(matches: Iterable[tuple[str, float]]) -> list[list[str]]:
    return [
        [str(rank), rid, f"{dist:.6f}"]
        for rank, (rid, dist) in enumerate(matches, 1)
    ]


def format_join_rows(pairs: Iterable[tuple[str, str, float]]) -> list[list[str]]:
    return [[a, b, f"{dist:.6f}"] for a, b, dist in pairs]


def emit_results(results, dest, fmt: str = "csv", kind: str = "query") -> None:
    """Write query or join results as a delimited table.

    Query tables carry the header ``rank,id,distance``; join tables
    ``idA,idB,distance``. Distances are printed with six digits after the
    decimal point; ordering is whatever the caller produced (deterministic
    for all query paths).
    """
    if fmt not in ("csv", "tsv"):
        raise InvalidInputError(f"unknown output format {fmt!r}")
    if kind not in ("query", "join"):
        raise InvalidInputError(f"unknown result kind {kind!r}")
    delim = "," if fmt == "csv" else "\t"
    own = isinstance(dest, (str, os.PathLike))
    fh = open(dest, "w", newline="", encoding="utf-8") if own else dest
    try:
        writer = csv.writer(fh, delimiter=delim)
        if kind == "query":
            writer.writerow(["rank", "id", "distance"])
            writer.writerows(format_query_rows(results))
        else:
            writer.writerow(["idA", "idB", "distance"])
            writer.writerows(format_join_rows(results))
    finally:
        if own:
            fh.close()
