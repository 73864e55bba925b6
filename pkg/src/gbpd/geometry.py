"""Generators, distance functions, and ellipse geometry.

A generator is a weighted ellipse: a center ``p``, a positive definite 2x2
matrix ``M`` and a scalar weight ``w``. The induced distance to a point ``x``
is the shifted quadratic form ``(x - p)^T M (x - p) - w``, which may be
negative. Every point of the plane is assigned to the generator of smallest
distance; the resulting cells form the generalized balanced power diagram.

Points are plain numpy arrays of shape (2,). The symmetric matrix is stored
as its three independent entries, so symmetry holds by construction.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Literal, Sequence

import numpy as np

from .errors import InputError, NonRenderableContour

Point = np.ndarray

# relative eigenvalue gap below which an ellipse counts as a circle (angle tied to 0)
_CIRCLE_TIE_REL = 1e-12


def as_point(x) -> Point:
    q = np.asarray(x, dtype=float)
    if q.shape != (2,):
        raise InputError(f"expected a 2d point, got shape {q.shape}")
    return q


@dataclass(frozen=True)
class SymMat2:
    """Symmetric 2x2 matrix stored as (m11, m12, m22)."""

    m11: float
    m12: float
    m22: float

    def __post_init__(self):
        object.__setattr__(self, "m11", float(self.m11))
        object.__setattr__(self, "m12", float(self.m12))
        object.__setattr__(self, "m22", float(self.m22))

    @staticmethod
    def identity() -> "SymMat2":
        return SymMat2(1.0, 0.0, 1.0)

    @staticmethod
    def isotropic(value: float) -> "SymMat2":
        return SymMat2(value, 0.0, value)

    @staticmethod
    def from_matrix(arr) -> "SymMat2":
        a = np.asarray(arr, dtype=float)
        if a.shape != (2, 2):
            raise InputError(f"expected a 2x2 matrix, got shape {a.shape}")
        if not math.isclose(a[0, 1], a[1, 0], rel_tol=1e-9, abs_tol=1e-12):
            raise InputError("matrix is not symmetric")
        return SymMat2(float(a[0, 0]), 0.5 * float(a[0, 1] + a[1, 0]), float(a[1, 1]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m12, self.m22]])

    def det(self) -> float:
        return self.m11 * self.m22 - self.m12 * self.m12

    def trace(self) -> float:
        return self.m11 + self.m22

    def is_positive_definite(self) -> bool:
        return self.m11 > 0.0 and self.det() > 0.0

    def quadratic(self, v) -> float:
        """v^T M v for a single vector."""
        vx, vy = float(v[0]), float(v[1])
        return self.m11 * vx * vx + 2.0 * self.m12 * vx * vy + self.m22 * vy * vy

    def apply(self, v) -> np.ndarray:
        vx, vy = float(v[0]), float(v[1])
        return np.array([self.m11 * vx + self.m12 * vy, self.m12 * vx + self.m22 * vy])

    def inverse(self) -> "SymMat2":
        d = self.det()
        if d == 0.0:
            raise InputError("matrix is singular")
        return SymMat2(self.m22 / d, -self.m12 / d, self.m11 / d)

    def rotated(self, theta: float) -> "SymMat2":
        """Congruence R M R^T with R the rotation by theta."""
        c, s = math.cos(theta), math.sin(theta)
        m11 = c * c * self.m11 - 2 * c * s * self.m12 + s * s * self.m22
        m22 = s * s * self.m11 + 2 * c * s * self.m12 + c * c * self.m22
        m12 = c * s * (self.m11 - self.m22) + (c * c - s * s) * self.m12
        return SymMat2(m11, m12, m22)

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Closed-form spectral decomposition.

        Returns eigenvalues ascending and the matrix whose columns are the
        corresponding unit eigenvectors, mirroring ``numpy.linalg.eigh``.
        Uses the trace/determinant formula; for (near-)equal eigenvalues the
        basis is tied to the coordinate axes.
        """
        mean = 0.5 * (self.m11 + self.m22)
        half_gap = math.hypot(0.5 * (self.m11 - self.m22), self.m12)
        lo, hi = mean - half_gap, mean + half_gap
        scale = max(abs(lo), abs(hi))
        if half_gap <= _CIRCLE_TIE_REL * scale or scale == 0.0:
            return np.array([lo, hi]), np.eye(2)
        # eigenvector for hi from the better-conditioned of the two rows
        cand1 = np.array([self.m12, hi - self.m11])
        cand2 = np.array([hi - self.m22, self.m12])
        v = cand1 if cand1 @ cand1 >= cand2 @ cand2 else cand2
        v = v / math.hypot(v[0], v[1])
        v_lo = np.array([-v[1], v[0]])
        return np.array([lo, hi]), np.column_stack([v_lo, v])


@dataclass(frozen=True)
class Generator:
    """Weighted elliptical generator: id, center p, matrix M, weight w."""

    id: int
    p: Point
    M: SymMat2
    w: float

    def __post_init__(self):
        object.__setattr__(self, "p", as_point(self.p))
        if not np.all(np.isfinite(self.p)):
            raise InputError(f"generator {self.id}: center is not finite")
        if not (math.isfinite(self.M.m11) and math.isfinite(self.M.m12) and math.isfinite(self.M.m22)):
            raise InputError(f"generator {self.id}: matrix is not finite")
        if not self.M.is_positive_definite():
            raise InputError(f"generator {self.id}: matrix is not positive definite")
        if not math.isfinite(self.w):
            raise InputError(f"generator {self.id}: weight is not finite")

    def with_weight(self, w: float) -> "Generator":
        return Generator(self.id, self.p.copy(), self.M, w)


def dist_g(x, g: Generator) -> float:
    """Generator distance (x - p)^T M (x - p) - w. May be negative."""
    d = as_point(x) - g.p
    return g.M.quadratic(d) - g.w


DistanceKind = Literal["voronoi", "laguerre", "mw"]


def special_distances(x, g: Generator, kind: DistanceKind) -> float:
    """Classical distances recovered from a generator's parameters.

    ``voronoi``  Euclidean distance ||x - p|| (M and w ignored).
    ``laguerre`` power distance ||x - p||^2 - w, reading w as a squared radius.
    ``mw``       squared multiplicatively weighted distance (||x - p|| / sigma)^2
                 with sigma read from M = (1/sigma^2) I. The textbook form is
                 the square root of this; both induce the same diagram, and the
                 squared form is the one the generator distance reproduces.
    """
    d = as_point(x) - g.p
    if kind == "voronoi":
        return float(math.hypot(d[0], d[1]))
    if kind == "laguerre":
        return float(d @ d) - g.w
    if kind == "mw":
        iso = abs(g.M.m11 - g.M.m22) <= 1e-12 * max(abs(g.M.m11), abs(g.M.m22))
        if not iso or abs(g.M.m12) > 1e-12 * abs(g.M.m11):
            raise InputError("mw distance requires an isotropic matrix (1/sigma^2) I")
        return g.M.m11 * float(d @ d)
    raise InputError(f"unknown distance kind {kind!r}")


@dataclass(frozen=True)
class EllipseGeom:
    """Axis-aligned description of a generator's elliptical contour."""

    center: Point
    theta: float  # angle of the major semi-axis, in [0, pi)
    semi_axes: tuple[float, float]  # (major, minor), major >= minor


def generator_to_ellipse(g: Generator, scaled: bool = True) -> EllipseGeom:
    """Contour ellipse of a generator.

    The matrix decomposes as M = U diag(1/a1, 1/a2) U^T; the contour at
    distance 1 is the ellipse with semi-axis lengths sqrt((1 + w) a_k) along
    the columns of U. With ``scaled=False`` the weight factor is dropped and
    the bare (p, M) ellipse with semi-axes sqrt(a_k) is returned.
    """
    factor = 1.0 + g.w if scaled else 1.0
    if factor <= 0.0:
        raise NonRenderableContour(
            f"generator {g.id}: contour undefined for weight {g.w} (needs 1 + w > 0)"
        )
    evals, evecs = g.M.eigh()
    # semi-axes are 1/sqrt(eigenvalue of M); the major axis follows the
    # eigenvector of the smaller eigenvalue
    major = math.sqrt(factor / evals[0])
    minor = math.sqrt(factor / evals[1])
    v = evecs[:, 0]
    if v[1] < 0.0 or (v[1] == 0.0 and v[0] < 0.0):
        v = -v
    theta = math.atan2(v[1], v[0]) % math.pi
    if abs(evals[1] - evals[0]) <= _CIRCLE_TIE_REL * abs(evals[1]):
        theta = 0.0
    return EllipseGeom(center=g.p.copy(), theta=theta, semi_axes=(major, minor))


def ellipse_to_matrix(e: EllipseGeom) -> SymMat2:
    """Inverse of :func:`generator_to_ellipse` for w = 0: rebuild M from axes."""
    a_major, a_minor = e.semi_axes
    c, s = math.cos(e.theta), math.sin(e.theta)
    u = np.array([[c, -s], [s, c]])
    lam = np.diag([1.0 / (a_major * a_major), 1.0 / (a_minor * a_minor)])
    return SymMat2.from_matrix(u @ lam @ u.T)


@dataclass(frozen=True)
class Window:
    """Axis-aligned clipping rectangle."""

    xmin: float
    ymin: float
    xmax: float
    ymax: float

    def __post_init__(self):
        if not (self.xmin < self.xmax and self.ymin < self.ymax):
            raise InputError("window must satisfy xmin < xmax and ymin < ymax")

    @property
    def width(self) -> float:
        return self.xmax - self.xmin

    @property
    def height(self) -> float:
        return self.ymax - self.ymin

    @property
    def diagonal(self) -> float:
        return math.hypot(self.width, self.height)

    def area(self) -> float:
        return self.width * self.height

    def contains(self, q, margin: float = 0.0) -> bool:
        return (
            self.xmin + margin <= q[0] <= self.xmax - margin
            and self.ymin + margin <= q[1] <= self.ymax - margin
        )

    def corners(self) -> np.ndarray:
        """Counterclockwise corner list starting at (xmin, ymin)."""
        return np.array(
            [
                [self.xmin, self.ymin],
                [self.xmax, self.ymin],
                [self.xmax, self.ymax],
                [self.xmin, self.ymax],
            ]
        )


class SceneArrays:
    """Column view of a generator list for vectorized distance evaluation."""

    def __init__(self, generators: Sequence[Generator]):
        self.generators = list(generators)
        n = len(self.generators)
        self.ids = np.array([g.id for g in self.generators], dtype=int)
        self.px = np.array([g.p[0] for g in self.generators])
        self.py = np.array([g.p[1] for g in self.generators])
        self.m11 = np.array([g.M.m11 for g in self.generators])
        self.m12 = np.array([g.M.m12 for g in self.generators])
        self.m22 = np.array([g.M.m22 for g in self.generators])
        self.w = np.array([g.w for g in self.generators])
        self.n = n
        self.id_to_index = {g.id: k for k, g in enumerate(self.generators)}

    def dist(self, points) -> np.ndarray:
        """Distances from points (N, 2) to every generator; returns (N, n)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        dx = pts[:, 0:1] - self.px[None, :]
        dy = pts[:, 1:2] - self.py[None, :]
        return (
            self.m11[None, :] * dx * dx
            + 2.0 * self.m12[None, :] * dx * dy
            + self.m22[None, :] * dy * dy
            - self.w[None, :]
        )

    def scale(self) -> float:
        """Characteristic length: diagonal of the center bounding box (>= 1)."""
        if self.n == 0:
            return 1.0
        dx = float(self.px.max() - self.px.min())
        dy = float(self.py.max() - self.py.min())
        return max(math.hypot(dx, dy), 1.0)


SCENE_CSV_HEADER = ["id", "px", "py", "m11", "m12", "m22", "w"]


def load_scene(path) -> list[Generator]:
    """Read generators from CSV with header id,px,py,m11,m12,m22,w."""
    generators: list[Generator] = []
    seen: set[int] = set()
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise InputError(f"{path}: empty scene file") from None
        if [h.strip() for h in header] != SCENE_CSV_HEADER:
            raise InputError(
                f"{path}: line 1: expected header {','.join(SCENE_CSV_HEADER)}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != 7:
                raise InputError(f"{path}: line {lineno}: expected 7 fields, got {len(row)}")
            try:
                gid = int(row[0])
                vals = [float(f) for f in row[1:]]
            except ValueError as exc:
                raise InputError(f"{path}: line {lineno}: {exc}") from None
            if gid in seen:
                raise InputError(f"{path}: line {lineno}: duplicate generator id {gid}")
            seen.add(gid)
            try:
                generators.append(
                    Generator(
                        id=gid,
                        p=np.array(vals[0:2]),
                        M=SymMat2(vals[2], vals[3], vals[4]),
                        w=vals[5],
                    )
                )
            except InputError as exc:
                raise InputError(f"{path}: line {lineno}: {exc}") from None
    return generators


def save_scene(path, generators: Iterable[Generator]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SCENE_CSV_HEADER)
        for g in generators:
            fields = [g.p[0], g.p[1], g.M.m11, g.M.m12, g.M.m22, g.w]
            writer.writerow([int(g.id)] + [repr(float(v)) for v in fields])
