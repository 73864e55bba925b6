"""Brute-force raster reference and label-image utilities.

The rasterizer assigns every pixel center to the generator with the
smallest distance value, ties to the smallest id. It is deliberately
independent of the analytic pipeline so the two can be compared:
rasterize_cells() paints the same picture from the clipped analytic
boundaries instead, and compare_labels() reports where they disagree and
how far the disagreements sit from the analytic edges.

Label images use mathematical row order: row iy holds the pixels at
y = origin_y + (iy + 0.5) * pixel_size, so row 0 is the bottom of the
window. PGM files store rows in that same order for exact round-trips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .clip import ClippedDiagram
from .errors import DimensionMismatchError, InputError
from .geometry import Generator, SceneArrays, Window

_PIXEL_CHUNK = 262144


@dataclass
class LabelImage:
    """Integer label per pixel; -1 marks background (no label)."""

    width: int
    height: int
    origin: np.ndarray
    pixel_size: float
    labels: np.ndarray  # (height, width) int32, row 0 at the window bottom
    ids: tuple[int, ...]

    def pixel_centers_x(self) -> np.ndarray:
        return self.origin[0] + (np.arange(self.width) + 0.5) * self.pixel_size

    def pixel_centers_y(self) -> np.ndarray:
        return self.origin[1] + (np.arange(self.height) + 0.5) * self.pixel_size


def _image_frame(window: Window, width: int, height: int) -> tuple[np.ndarray, float]:
    if width < 1 or height < 1:
        raise InputError("raster dimensions must be at least 1x1")
    px = window.width / width
    py = window.height / height
    if abs(px - py) > 1e-9 * max(px, py):
        raise InputError(
            f"non-square pixels: {px:.6g} x {py:.6g}; "
            "choose width/height matching the window aspect"
        )
    return np.array([window.xmin, window.ymin]), px


def rasterize(generators, window: Window, width: int, height: int) -> LabelImage:
    """Distance-argmin label image at pixel centers; ties to smallest id."""
    origin, px = _image_frame(window, width, height)
    gens = sorted(generators, key=lambda g: g.id)
    arr = SceneArrays(gens)
    ids = arr.ids.astype(np.int32)
    xs = origin[0] + (np.arange(width) + 0.5) * px
    ys = origin[1] + (np.arange(height) + 0.5) * px
    labels = np.empty((height, width), dtype=np.int32)
    rows_per_chunk = max(1, _PIXEL_CHUNK // width)
    for y0 in range(0, height, rows_per_chunk):
        y1 = min(height, y0 + rows_per_chunk)
        gx, gy = np.meshgrid(xs, ys[y0:y1], indexing="xy")
        pts = np.stack([gx.ravel(), gy.ravel()], axis=1)
        d = arr.dist(pts)
        # argmin returns the first minimum; generators are sorted by id,
        # so exact ties go to the smallest id
        labels[y0:y1] = ids[np.argmin(d, axis=1)].reshape(y1 - y0, width)
    return LabelImage(width, height, origin, px, labels, tuple(int(i) for i in ids))


# ------------------------------------------------- analytic rasterization


def _flatten_piece(cd: ClippedDiagram, piece, ftol: float) -> list[np.ndarray]:
    """Polyline along one piece (stored direction), last point omitted."""
    if piece.kind != "arc":
        return [piece.p0]
    if piece.closed:
        knots = [0.0, 0.25, 0.5, 0.75, 1.0]
    else:
        knots = [0.0, 0.5, 1.0]
    pts = [cd.piece_point(piece, f) for f in knots]
    out: list[np.ndarray] = []

    def refine(f0, f1, p0, p1, depth):
        out.append(p0)
        if depth >= 14:
            return
        fm = 0.5 * (f0 + f1)
        pm = cd.piece_point(piece, fm)
        chord = p1 - p0
        n = math.hypot(chord[0], chord[1])
        if n == 0.0:
            dev = math.hypot(*(pm - p0))
        else:
            dev = abs(chord[0] * (pm[1] - p0[1]) - chord[1] * (pm[0] - p0[0])) / n
        if dev <= ftol:
            return
        out.pop()
        refine(f0, fm, p0, pm, depth + 1)
        refine(fm, f1, pm, p1, depth + 1)

    for k in range(len(knots) - 1):
        refine(knots[k], knots[k + 1], pts[k], pts[k + 1], 0)
    return out


def _cell_polygons(cd: ClippedDiagram, gid: int, ftol: float) -> list[np.ndarray]:
    polys = []
    for loop in cd.cells.get(gid, []):
        pts: list[np.ndarray] = []
        for pid, forward in loop:
            piece = cd.pieces[pid]
            run = _flatten_piece(cd, piece, ftol)
            if not forward:
                # stored direction ends one step short of node_b; rebuild the
                # reversed run from the full per-piece polyline
                closing = [cd.piece_point(piece, 1.0)] if piece.kind == "arc" else [piece.p1]
                run = list(reversed(run + closing))[:-1]
            pts.extend(run)
        if len(pts) >= 3:
            polys.append(np.array(pts))
    return polys


def rasterize_cells(cd: ClippedDiagram, width: int, height: int,
                    ftol: float | None = None) -> LabelImage:
    """Label image painted from the analytic cell boundaries.

    Loops are flattened to ftol (default pixel_size / 20) and filled by
    even-odd scanline over pixel centers; holes vanish automatically.
    Contested border pixels go to the smallest id, pixels missed by the
    flattening jitter are filled from their nearest labeled neighbor.
    """
    origin, px = _image_frame(cd.window, width, height)
    if ftol is None:
        ftol = px / 20.0
    ids = tuple(sorted(g.id for g in cd.graph.generators))
    labels = np.full((height, width), -1, dtype=np.int32)
    xs = origin[0] + (np.arange(width) + 0.5) * px

    for gid in ids:
        polys = _cell_polygons(cd, gid, ftol)
        if not polys:
            continue
        edges_a = np.concatenate([p for p in polys])
        edges_b = np.concatenate([np.roll(p, -1, axis=0) for p in polys])
        ymin = min(float(p[:, 1].min()) for p in polys)
        ymax = max(float(p[:, 1].max()) for p in polys)
        iy0 = max(0, int(math.floor((ymin - origin[1]) / px - 0.5)))
        iy1 = min(height - 1, int(math.ceil((ymax - origin[1]) / px - 0.5)))
        ya, yb = edges_a[:, 1], edges_b[:, 1]
        for iy in range(iy0, iy1 + 1):
            y = origin[1] + (iy + 0.5) * px
            hit = (ya > y) != (yb > y)
            if not hit.any():
                continue
            a, b = edges_a[hit], edges_b[hit]
            xc = a[:, 0] + (y - a[:, 1]) * (b[:, 0] - a[:, 0]) / (b[:, 1] - a[:, 1])
            xc.sort()
            inside = (np.searchsorted(xc, xs) % 2) == 1
            row = labels[iy]
            sel = inside & (row == -1)
            row[sel] = gid

    missing = labels < 0
    if missing.any() and not missing.all():
        _, (ii, jj) = ndimage.distance_transform_edt(missing, return_indices=True)
        labels = labels[ii, jj]
    return LabelImage(width, height, origin, px, labels, ids)


# ----------------------------------------------------------- comparisons


@dataclass(frozen=True)
class MismatchStats:
    pixels: int
    mismatched: int
    fraction: float
    near_edge_mismatched: int
    near_edge_fraction: float
    distance_hist: tuple[int, ...]


def label_edges(img: LabelImage) -> np.ndarray:
    """Boolean mask of pixels that touch a different label (4-neighborhood)."""
    lab = img.labels
    edge = np.zeros_like(lab, dtype=bool)
    edge[:, :-1] |= lab[:, :-1] != lab[:, 1:]
    edge[:, 1:] |= lab[:, :-1] != lab[:, 1:]
    edge[:-1, :] |= lab[:-1, :] != lab[1:, :]
    edge[1:, :] |= lab[:-1, :] != lab[1:, :]
    return edge


def compare_labels(a: LabelImage, b: LabelImage) -> MismatchStats:
    """Mismatch statistics of b against a; edge distances measured in a."""
    if (a.width, a.height) != (b.width, b.height):
        raise DimensionMismatchError(
            f"label images differ in size: {a.width}x{a.height} vs {b.width}x{b.height}"
        )
    diff = a.labels != b.labels
    count = int(diff.sum())
    total = a.width * a.height
    if count == 0:
        return MismatchStats(total, 0, 0.0, 0, 1.0, ())
    dist = ndimage.distance_transform_edt(~label_edges(a))
    dmis = dist[diff]
    near = int((dmis <= 1.5).sum())
    hist = np.bincount(np.floor(dmis).astype(int))
    return MismatchStats(
        total,
        count,
        count / total,
        near,
        near / count,
        tuple(int(v) for v in hist),
    )


@dataclass(frozen=True)
class RasterStats:
    counts: dict[int, int]
    junctions: np.ndarray  # (k, 2) window coordinates of 2x2 corners with >= 3 labels


def raster_cell_stats(img: LabelImage) -> RasterStats:
    lab = img.labels
    vals, cnt = np.unique(lab, return_counts=True)
    counts = {int(v): int(c) for v, c in zip(vals, cnt) if v >= 0}
    stack = np.stack([lab[:-1, :-1], lab[:-1, 1:], lab[1:, :-1], lab[1:, 1:]])
    stack = np.sort(stack, axis=0)
    distinct = 1 + (stack[1:] != stack[:-1]).sum(axis=0)
    jy, jx = np.nonzero(distinct >= 3)
    pts = np.stack(
        [
            img.origin[0] + (jx + 1.0) * img.pixel_size,
            img.origin[1] + (jy + 1.0) * img.pixel_size,
        ],
        axis=1,
    )
    return RasterStats(counts, pts)


# ------------------------------------------------------------------- PGM


def write_pgm(img: LabelImage, path: str) -> None:
    """ASCII PGM (P2): values are indices into the sorted id list, background n."""
    n = len(img.ids)
    top = max([int(img.labels.max()), *img.ids, 0])
    remap = np.full(top + 2, n, dtype=np.int32)
    for k, gid in enumerate(img.ids):
        if gid >= 0:
            remap[gid] = k
    vals = np.where(img.labels < 0, n, remap[np.maximum(img.labels, 0)])
    with open(path, "w") as fh:
        fh.write("P2\n")
        fh.write(
            "# gbpd origin %.17g %.17g pixel %.17g ids %s\n"
            % (
                img.origin[0],
                img.origin[1],
                img.pixel_size,
                ",".join(str(i) for i in img.ids),
            )
        )
        fh.write(f"{img.width} {img.height}\n{n}\n")
        for row in vals:
            fh.write(" ".join(str(int(v)) for v in row))
            fh.write("\n")


def read_pgm(path: str) -> LabelImage:
    with open(path) as fh:
        magic = fh.readline().strip()
        if magic != "P2":
            raise InputError(f"{path}: not an ASCII PGM (P2) file")
        origin = np.zeros(2)
        pixel = 1.0
        ids: tuple[int, ...] = ()
        line = fh.readline()
        while line.startswith("#"):
            parts = line[1:].split()
            if parts[:1] == ["gbpd"]:
                origin = np.array([float(parts[2]), float(parts[3])])
                pixel = float(parts[5])
                ids = tuple(int(s) for s in parts[7].split(","))
            line = fh.readline()
        width, height = (int(s) for s in line.split())
        maxval = int(fh.readline())
        data = np.array(fh.read().split(), dtype=np.int32).reshape(height, width)
    if not ids:
        ids = tuple(range(maxval))
    back = np.array(list(ids) + [-1], dtype=np.int32)
    labels = back[np.minimum(data, len(ids))]
    return LabelImage(width, height, origin, pixel, labels, ids)
