"""Cell perimeters and areas from the analytic boundary description.

Lengths come from adaptive quadrature of the parametric speed. Areas are
the contour integral (1/2) oint (x dy - y dx) taken loop by loop: each
boundary loop is traversed with the cell interior on its left, so outer
loops contribute positive area and holes negative, and the per-piece terms
reduce to the familiar vertex shoelace plus curved-bulge corrections.

Clipped diagrams already carry oriented loops. For a bare diagram graph the
edges of each boundary component are chained by shared vertices here, and
orientation is fixed by the side test against the pair's distance gradient;
cells that reach infinity raise UnboundedCellError.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .clip import ClippedDiagram
from .conic import ParametrizedConic
from .diagram import DiagramGraph, EdgeSegment
from .errors import NoSolutionError, NonFiniteSegmentError, UnboundedCellError
from .tolerances import DEFAULT_TOLERANCES, ToleranceSet

_HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class ComponentMeasure:
    """Area and boundary length of one connected piece of a cell."""

    area: float
    perimeter: float


@dataclass(frozen=True)
class CellMeasure:
    cell: int
    area: float
    perimeter: float
    components: tuple[ComponentMeasure, ...]


# ------------------------------------------------------------- quadrature


def _chart_breaks(a0: float, a1: float) -> list[float]:
    """Chart-switch angles (alpha = pi/2 mod pi) strictly inside (a0, a1)."""
    out = []
    k = math.ceil((a0 - _HALF_PI) / math.pi)
    c = _HALF_PI + k * math.pi
    while c < a1:
        if c > a0:
            out.append(c)
        k += 1
        c = _HALF_PI + k * math.pi
    return out


def _quad(f, a0: float, a1: float, tol: ToleranceSet) -> float:
    pts = _chart_breaks(a0, a1)
    val, _ = quad(f, a0, a1, points=pts or None, limit=200,
                  epsabs=tol.quad_abs, epsrel=1e-12)
    return val


def _arc_length(param: ParametrizedConic, a0: float, a1: float,
                tol: ToleranceSet) -> float:
    def speed(a: float) -> float:
        v = param.velocity_at_alpha(a, tol)
        return math.hypot(v[0], v[1])

    return _quad(speed, a0, a1, tol)


def _arc_area(param: ParametrizedConic, a0: float, a1: float,
              tol: ToleranceSet) -> float:
    """Integral of (x y' - y x') / 2 along the arc, in increasing alpha."""

    def f(a: float) -> float:
        p = param.point_at_alpha(a, tol)
        v = param.velocity_at_alpha(a, tol)
        return 0.5 * (p[0] * v[1] - p[1] * v[0])

    return _quad(f, a0, a1, tol)


# -------------------------------------------------------------- edge length


def edge_arc_length(graph: DiagramGraph, e: EdgeSegment,
                    tol: ToleranceSet | None = None) -> float:
    """Length of one edge segment; finite intervals and closed loops only."""
    tol = tol if tol is not None else graph.tol
    b = graph.bisectors[e.pair]
    if e.is_curve():
        if e.kind != "loop" and (e.endpoints[0] is None or e.endpoints[1] is None):
            raise NonFiniteSegmentError(
                f"edge {e.id} runs into a singular parameter; clip it first"
            )
        return _arc_length(b.param, e.alpha_a, e.alpha_b, tol)
    if (
        e.kind == "full_line"
        or e.t_a is None
        or e.t_b is None
        or math.isinf(e.t_a)
        or math.isinf(e.t_b)
    ):
        raise NonFiniteSegmentError(f"edge {e.id} is an unbounded line piece")
    # line parameters are arc length already
    return e.t_b - e.t_a


# ---------------------------------------------------------- loop traversal
#
# Both cell representations reduce to loops of directed primitives. Each
# primitive reports its signed area term (the contour integral along it,
# in traversal direction) and its length; a straight run from q0 to q1
# contributes the shoelace term (x0 y1 - y0 x1) / 2. Endpoints of adjacent
# primitives agree only to vertex-recovery precision, so tiny connector
# chords are inserted between them: an exactly closed contour keeps the
# signed total independent of the coordinate origin.


class _LoopAccum:
    def __init__(self):
        self.area = 0.0
        self.length = 0.0
        self._first = None
        self._prev = None

    def add(self, q0, q1, area_term: float, length_term: float) -> None:
        if self._prev is not None:
            self.area += 0.5 * (self._prev[0] * q0[1] - self._prev[1] * q0[0])
        else:
            self._first = q0
        self.area += area_term
        self.length += length_term
        self._prev = q1

    def close(self) -> tuple[float, float]:
        if self._prev is not None and self._first is not None:
            self.area += 0.5 * (
                self._prev[0] * self._first[1] - self._prev[1] * self._first[0]
            )
        return self.area, self.length


def _chord_term(q0, q1) -> float:
    return 0.5 * (q0[0] * q1[1] - q0[1] * q1[0])


def _clipped_loop_terms(cd: ClippedDiagram, loop, tol) -> tuple[float, float]:
    acc = _LoopAccum()
    for pid, forward in loop:
        piece = cd.pieces[pid]
        if piece.kind == "arc":
            param = cd.graph.bisectors[piece.pair].param
            a = _arc_area(param, piece.a0, piece.a1, tol)
            s = _arc_length(param, piece.a0, piece.a1, tol)
            if piece.closed:
                acc.area += a if forward else -a
                acc.length += s
                continue
            q0 = piece.p0 if piece.p0 is not None else param.point_at_alpha(piece.a0, tol)
            q1 = piece.p1 if piece.p1 is not None else param.point_at_alpha(piece.a1, tol)
            if not forward:
                q0, q1 = q1, q0
            acc.add(q0, q1, a if forward else -a, s)
        else:
            q0, q1 = (piece.p0, piece.p1) if forward else (piece.p1, piece.p0)
            acc.add(q0, q1, _chord_term(q0, q1),
                    math.hypot(q1[0] - q0[0], q1[1] - q0[1]))
    return acc.close()


def _graph_loop_terms(graph: DiagramGraph, loop, tol) -> tuple[float, float]:
    acc = _LoopAccum()
    for e, forward in loop:
        b = graph.bisectors[e.pair]
        if e.is_curve():
            a = _arc_area(b.param, e.alpha_a, e.alpha_b, tol)
            s = _arc_length(b.param, e.alpha_a, e.alpha_b, tol)
            if e.kind == "loop":
                acc.area += a if forward else -a
                acc.length += s
                continue
            q0 = b.param.point_at_alpha(e.alpha_a, tol)
            q1 = b.param.point_at_alpha(e.alpha_b, tol)
            if not forward:
                q0, q1 = q1, q0
            acc.add(q0, q1, a if forward else -a, s)
        else:
            line = b.lines[e.line_index]
            q0, q1 = line.point_at(e.t_a), line.point_at(e.t_b)
            if not forward:
                q0, q1 = q1, q0
            acc.add(q0, q1, _chord_term(q0, q1), e.t_b - e.t_a)
    return acc.close()


def _flatten_clipped_loop(cd: ClippedDiagram, loop, samples: int) -> np.ndarray:
    pts = []
    for pid, forward in loop:
        piece = cd.pieces[pid]
        for k in range(samples):
            f = k / samples
            pts.append(cd.piece_point(piece, f if forward else 1.0 - f))
    return np.array(pts)


def _flatten_graph_loop(graph: DiagramGraph, loop, samples: int) -> np.ndarray:
    pts = []
    for e, forward in loop:
        b = graph.bisectors[e.pair]
        for k in range(samples):
            f = k / samples
            if not forward:
                f = 1.0 - f
            if e.is_curve():
                a = e.alpha_a + f * (e.alpha_b - e.alpha_a)
                pts.append(b.param.point_at_alpha(a, graph.tol))
            else:
                line = b.lines[e.line_index]
                pts.append(line.point_at(e.t_a + f * (e.t_b - e.t_a)))
    return np.array(pts)


def _point_in_polygon(poly: np.ndarray, q) -> bool:
    x, y = float(q[0]), float(q[1])
    inside = False
    n = len(poly)
    for k in range(n):
        x0, y0 = poly[k]
        x1, y1 = poly[(k + 1) % n]
        if (y0 > y) != (y1 > y):
            xc = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if xc > x:
                inside = not inside
    return inside


def _group_loops(vals, polys, *, strict: bool, cell: int) -> list[list[int]]:
    """Group loop indices into connected components (outer loop + holes).

    vals[k] = (signed area, length); polys[k] a flattened polygon of loop k.
    Holes (negative loops) attach to the positive loop containing them. With
    strict=True a hole without an enclosing positive loop means the region
    extends to infinity.
    """
    outers = [k for k in range(len(vals)) if vals[k][0] >= 0.0]
    holes = [k for k in range(len(vals)) if vals[k][0] < 0.0]
    if not outers:
        if strict and holes:
            raise UnboundedCellError(
                f"cell {cell} has only hole loops; it is unbounded"
            )
        return [[k] for k in holes]
    groups = {k: [k] for k in outers}
    for k in holes:
        probe = polys[k][0]
        host = None
        for o in outers:
            if _point_in_polygon(polys[o], probe):
                host = o
                break
        if host is None:
            host = max(outers, key=lambda o: vals[o][0])
        groups[host].append(k)
    return [groups[o] for o in outers]


def _assemble_measure(cell: int, vals, groups) -> CellMeasure:
    comps = []
    for grp in groups:
        a = float(sum(vals[k][0] for k in grp))
        ln = float(sum(vals[k][1] for k in grp))
        comps.append(ComponentMeasure(a, ln))
    comps.sort(key=lambda c: (-c.area, c.perimeter))
    return CellMeasure(
        cell,
        float(sum(c.area for c in comps)),
        float(sum(c.perimeter for c in comps)),
        tuple(comps),
    )


# ------------------------------------------------------------ clipped cells


def _measure_clipped(cd: ClippedDiagram, cell: int, tol: ToleranceSet) -> CellMeasure:
    loops = cd.cells.get(cell, [])
    if not loops:
        return CellMeasure(cell, 0.0, 0.0, ())
    vals = [_clipped_loop_terms(cd, lp, tol) for lp in loops]
    polys = [_flatten_clipped_loop(cd, lp, 8) for lp in loops]
    groups = _group_loops(vals, polys, strict=False, cell=cell)
    return _assemble_measure(cell, vals, groups)


# -------------------------------------------------------------- graph cells


def _directed_edge_side(graph: DiagramGraph, e: EdgeSegment, forward: bool,
                        tol: ToleranceSet) -> int:
    """Generator id on the left of edge e traversed in the given direction."""
    b = graph.bisectors[e.pair]
    if e.is_curve():
        a_mid = 0.5 * (e.alpha_a + e.alpha_b)
        point = b.param.point_at_alpha(a_mid, tol)
        tangent = b.param.velocity_at_alpha(a_mid, tol)
    else:
        line = b.lines[e.line_index]
        point = line.point_at(0.5 * (e.t_a + e.t_b))
        tangent = line.direction
    if not forward:
        tangent = -tangent
    g = b.implicit.gradient(point[0], point[1])
    cross = tangent[0] * g[1] - tangent[1] * g[0]
    return e.pair[0] if cross < 0.0 else e.pair[1]


def _chain_component(graph: DiagramGraph, cell: int, edge_ids: list[int],
                     tol: ToleranceSet) -> list[tuple[EdgeSegment, bool]]:
    """Close one boundary component of a graph cell into a directed loop."""
    edges = [graph.edges[eid] for eid in sorted(edge_ids)]
    for e in edges:
        if e.is_curve():
            if e.kind != "loop" and (e.endpoints[0] is None or e.endpoints[1] is None):
                raise UnboundedCellError(
                    f"cell {cell} reaches a singular parameter on edge {e.id}"
                )
        elif (
            e.kind == "full_line"
            or e.t_a is None
            or e.t_b is None
            or math.isinf(e.t_a)
            or math.isinf(e.t_b)
        ):
            raise UnboundedCellError(f"cell {cell} is open along edge {e.id}")

    if len(edges) == 1 and edges[0].kind == "loop":
        e = edges[0]
        return [(e, _directed_edge_side(graph, e, True, tol) == cell)]

    at_vertex: dict[int, list[int]] = {}
    for k, e in enumerate(edges):
        for v in e.endpoints:
            at_vertex.setdefault(v, []).append(k)

    used = [False] * len(edges)
    loop: list[tuple[EdgeSegment, bool]] = []
    k = 0
    forward = True
    while True:
        e = edges[k]
        used[k] = True
        loop.append((e, forward))
        end_v = e.endpoints[1] if forward else e.endpoints[0]
        nxt = [m for m in at_vertex.get(end_v, []) if not used[m]]
        if not nxt:
            break
        k = min(nxt)
        forward = edges[k].endpoints[0] == end_v
    if not all(used):
        raise NoSolutionError(
            f"boundary component of cell {cell} does not chain into one loop"
        )
    start_v = loop[0][0].endpoints[0] if loop[0][1] else loop[0][0].endpoints[1]
    last_e, last_f = loop[-1]
    end_v = last_e.endpoints[1] if last_f else last_e.endpoints[0]
    if start_v != end_v:
        raise NoSolutionError(f"boundary component of cell {cell} does not close")
    if _directed_edge_side(graph, loop[0][0], loop[0][1], tol) != cell:
        loop = [(e, not f) for e, f in reversed(loop)]
    return loop


def _measure_graph(graph: DiagramGraph, cell: int, tol: ToleranceSet) -> CellMeasure:
    if cell in graph.empty_cells or cell in graph.aliases:
        return CellMeasure(cell, 0.0, 0.0, ())
    comps_edges = graph.cell_components.get(cell, [])
    if not comps_edges:
        raise UnboundedCellError(
            f"cell {cell} has no boundary at all; clip to a window first"
        )
    loops = [_chain_component(graph, cell, comp, tol) for comp in comps_edges]
    vals = [_graph_loop_terms(graph, lp, tol) for lp in loops]
    polys = [_flatten_graph_loop(graph, lp, 8) for lp in loops]
    groups = _group_loops(vals, polys, strict=True, cell=cell)
    return _assemble_measure(cell, vals, groups)


# ---------------------------------------------------------------- front end


def cell_area(cell: int, g: DiagramGraph | ClippedDiagram,
              tol: ToleranceSet | None = None) -> CellMeasure:
    """Full measure (area, perimeter, per-component breakdown) of one cell.

    Accepts a clipped diagram, or a bare graph when the cell happens to be
    bounded; unbounded graph cells raise UnboundedCellError.
    """
    if isinstance(g, ClippedDiagram):
        return _measure_clipped(g, cell, tol if tol is not None else g.graph.tol)
    return _measure_graph(g, cell, tol if tol is not None else g.tol)


def cell_perimeter(cell: int, g: DiagramGraph | ClippedDiagram,
                   tol: ToleranceSet | None = None) -> float:
    return cell_area(cell, g, tol).perimeter


def measure_cells(g: DiagramGraph | ClippedDiagram,
                  tol: ToleranceSet | None = None) -> dict[int, CellMeasure]:
    """CellMeasure for every generator id, keyed by id."""
    graph = g.graph if isinstance(g, ClippedDiagram) else g
    return {gen.id: cell_area(gen.id, g, tol) for gen in graph.generators}
