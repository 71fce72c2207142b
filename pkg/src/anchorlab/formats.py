"""CSV/PGM readers and writers.

Data files (trajectories, anchors, range logs) are written with
shortest-round-trip float text so ``read(write(x)) == x``. Report tables
(stats, rgap, scores) use six decimals.
"""

from __future__ import annotations

import csv
import io
import math
import re
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .geometry import AnchorSet, Trajectory

_DIST_COL = re.compile(r"^d(\d+)$")


def fmt(value: float) -> str:
    """Six-decimal report formatting; infinities stay readable."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return f"{value:.6f}"


def _num(value: float) -> str:
    return repr(float(value))


def _open_write(target):
    if hasattr(target, "write"):
        return target, False
    return open(target, "w", newline=""), True


def _rows(path) -> list[list[str]]:
    with open(path, newline="") as fh:
        return [row for row in csv.reader(fh) if row and not row[0].lstrip().startswith("#")]


# -- trajectories -------------------------------------------------------------

def write_trajectory(target, t: Trajectory):
    fh, owned = _open_write(target)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y"])
        w.writerows([_num(x), _num(y)] for x, y in t.points)
    finally:
        if owned:
            fh.close()


def read_trajectory(path) -> Trajectory:
    rows = _rows(path)
    if not rows or [c.strip() for c in rows[0]] != ["x", "y"]:
        raise ValueError(f"{path}: trajectory CSV must start with header 'x,y'")
    return Trajectory(np.array([[float(x), float(y)] for x, y in rows[1:]]))


# -- anchors ------------------------------------------------------------------

def write_anchors(target, anchors: AnchorSet):
    fh, owned = _open_write(target)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "x", "y"])
        for aid, (x, y) in zip(anchors.ids, anchors.positions):
            w.writerow([aid, _num(x), _num(y)])
    finally:
        if owned:
            fh.close()


def read_anchors(path, transform=None) -> AnchorSet:
    """Read ``id,x,y`` (local meters) or ``id,lon,lat`` (needs ``transform``)."""
    rows = _rows(path)
    if not rows:
        raise ValueError(f"{path}: empty anchor file")
    header = [c.strip().lower() for c in rows[0]]
    body = rows[1:]
    ids = [int(r[0]) for r in body]
    a = np.array([[float(r[1]), float(r[2])] for r in body])
    if header == ["id", "x", "y"]:
        return AnchorSet(a, tuple(ids))
    if header == ["id", "lon", "lat"]:
        if transform is None:
            raise ValueError(f"{path}: lon/lat anchors need a geo transform")
        from .field import geo_to_local

        local = [tuple(geo_to_local(transform, lon, lat)) for lon, lat in a]
        return AnchorSet(np.array(local), tuple(ids))
    raise ValueError(f"{path}: anchor header must be 'id,x,y' or 'id,lon,lat'")


# -- range logs ---------------------------------------------------------------

def write_range_log(target, distances: np.ndarray, epochs: Optional[Sequence[int]] = None,
                    times: Optional[Sequence[float]] = None,
                    truth: Optional[np.ndarray] = None):
    """Write ``epoch[,time],d1..dm[,x_true,y_true]`` rows."""
    d = np.atleast_2d(np.asarray(distances, float))
    n, m = d.shape
    epochs = range(n) if epochs is None else epochs
    header = ["epoch"] + (["time"] if times is not None else [])
    header += [f"d{k + 1}" for k in range(m)]
    header += ["x_true", "y_true"] if truth is not None else []
    fh, owned = _open_write(target)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for k, e in enumerate(epochs):
            row = [int(e)] + ([_num(times[k])] if times is not None else [])
            row += [_num(v) for v in d[k]]
            row += [_num(v) for v in truth[k]] if truth is not None else []
            w.writerow(row)
    finally:
        if owned:
            fh.close()


def read_range_log(path, gap_threshold: Optional[float] = None):
    """Parse a range log into a :class:`~anchorlab.field.FieldLog`.

    Rows with the wrong field count, unparsable numbers, negative ranges or
    a timestamp earlier than the previous row are skipped and counted.
    """
    from .field import GAP_THRESHOLD, FieldLog

    rows = _rows(path)
    if not rows:
        raise ValueError(f"{path}: empty range log")
    header = [c.strip() for c in rows[0]]
    if header[0] != "epoch":
        raise ValueError(f"{path}: range log must start with an 'epoch' column")
    dcols = [k for k, c in enumerate(header) if _DIST_COL.match(c)]
    if not dcols:
        raise ValueError(f"{path}: no d1..dm columns")
    tcol = header.index("time") if "time" in header else None
    has_truth = "x_true" in header and "y_true" in header
    xcol = header.index("x_true") if has_truth else None
    ycol = header.index("y_true") if has_truth else None

    epochs, times, dist, truth = [], [], [], []
    skipped = 0
    for row in rows[1:]:
        try:
            if len(row) != len(header):
                raise ValueError
            e = int(row[0])
            t = float(row[tcol]) if tcol is not None else None
            d = [float(row[k]) for k in dcols]
            xy = (float(row[xcol]), float(row[ycol])) if has_truth else None
            if any(v < 0 or not math.isfinite(v) for v in d):
                raise ValueError
            if t is not None and (not math.isfinite(t) or (times and t < times[-1])):
                raise ValueError
        except ValueError:
            skipped += 1
            continue
        epochs.append(e)
        dist.append(d)
        if t is not None:
            times.append(t)
        if xy is not None:
            truth.append(xy)
    return FieldLog(
        epochs=np.array(epochs, dtype=np.int64),
        distances=np.array(dist, dtype=float).reshape(len(dist), len(dcols)),
        times=np.array(times) if tcol is not None else None,
        truth=np.array(truth).reshape(-1, 2) if has_truth else None,
        gap_threshold=GAP_THRESHOLD if gap_threshold is None else gap_threshold,
        skipped=skipped,
    )


# -- grids ----------------------------------------------------------------------

def write_grid_csv(target, values: np.ndarray, comments: Iterable[str] = ()):
    """Row-major matrix with a leading ``# nx ny`` comment; ``inf`` stays ``inf``."""
    values = np.asarray(values)
    nx, ny = values.shape
    fh, owned = _open_write(target)
    try:
        fh.write(f"# {nx} {ny}\n")
        for c in comments:
            fh.write(f"# {c}\n")
        for row in values:
            if values.dtype.kind in "iu":
                fh.write(",".join(str(int(v)) for v in row) + "\n")
            else:
                fh.write(",".join(fmt(float(v)) for v in row) + "\n")
    finally:
        if owned:
            fh.close()


def read_grid_csv(path) -> np.ndarray:
    with open(path) as fh:
        first = fh.readline().lstrip("#").split()
        nx, ny = int(first[0]), int(first[1])
        rows = [line for line in fh if line.strip() and not line.startswith("#")]
    values = np.array([[float(v) for v in line.split(",")] for line in rows])
    if values.shape != (nx, ny):
        raise ValueError(f"{path}: header says {nx}x{ny}, found {values.shape}")
    return values


def pgm_bytes(values: np.ndarray) -> bytes:
    """8-bit binary PGM heightmap of ``values[ix, iy]``.

    Finite values map linearly onto 0..254 between the declared min and max;
    ``inf`` maps to 255. The image is drawn with y increasing upward.
    """
    values = np.asarray(values, float)
    finite = np.isfinite(values)
    lo = float(values[finite].min()) if finite.any() else 0.0
    hi = float(values[finite].max()) if finite.any() else 0.0
    span = hi - lo if hi > lo else 1.0
    scaled = np.where(finite, np.rint((np.where(finite, values, lo) - lo) / span * 254), 255)
    image = scaled.astype(np.uint8).T[::-1]
    rows_, cols = image.shape
    header = f"P5\n# min={fmt(lo)} max={fmt(hi)} inf=255\n{cols} {rows_}\n255\n"
    return header.encode("ascii") + image.tobytes()


def write_pgm(path, values: np.ndarray):
    Path(path).write_bytes(pgm_bytes(values))


def read_pgm(path):
    """Return ``(image, min, max)`` from a PGM written by :func:`write_pgm`."""
    data = Path(path).read_bytes()
    buf = io.BytesIO(data)
    if buf.readline().strip() != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    meta = dict(kv.split("=") for kv in buf.readline().decode().lstrip("#").split())
    cols, rows_ = (int(v) for v in buf.readline().split())
    buf.readline()
    image = np.frombuffer(buf.read(), dtype=np.uint8).reshape(rows_, cols)
    return image, float(meta["min"]), float(meta["max"])


# -- experiment outputs -------------------------------------------------------

STATS_HEADER = ["method", "ap", "level", "ave", "std", "time", "model", "count", "failures"]


def write_stats_csv(target, rows: Iterable[tuple]):
    """``rows`` yield ``(ap, model, level, ErrorStats)``."""
    fh, owned = _open_write(target)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(STATS_HEADER)
        for ap, model, level, s in rows:
            w.writerow([s.method, ap, fmt(level), fmt(s.ave), fmt(s.std), fmt(s.time),
                        model, s.count, s.failures])
    finally:
        if owned:
            fh.close()


def write_restored_csv(target, truth: np.ndarray, restored: dict):
    methods = list(restored)
    fh, owned = _open_write(target)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "x_true", "y_true"]
                   + [f"{m}_{c}" for m in methods for c in ("x", "y")])
        for k, (x, y) in enumerate(truth):
            row = [k, fmt(x), fmt(y)]
            for m in methods:
                row += [fmt(restored[m][k, 0]), fmt(restored[m][k, 1])]
            w.writerow(row)
    finally:
        if owned:
            fh.close()


def write_rgap_csv(target, result):
    methods = list(result.spec.methods)
    fh, owned = _open_write(target)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["placement", "score"] + [f"{m}_{c}" for m in methods for c in ("ave", "std")]
                   + ["anchors"])
        for p in result.placements:
            row = [p.index, fmt(p.score)]
            for m in methods:
                row += [fmt(p.stats[m].ave), fmt(p.stats[m].std)]
            row.append(" ".join(f"{x:.6f}:{y:.6f}" for x, y in p.anchors.positions))
            w.writerow(row)
    finally:
        if owned:
            fh.close()
