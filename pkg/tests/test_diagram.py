"""Diagram construction: vertices, visibility, topology, determinism."""

import math

import numpy as np
import pytest

from gbpd import DEFAULT_TOLERANCES, Generator, SymMat2
from gbpd.conic import ConicClass, alpha_of_param
from gbpd.diagram import build_diagram, visible_segments
from gbpd.geometry import SceneArrays, dist_g

from oracles import radical_center

I = SymMat2.identity()


def iso(gid, x, y, w=0.0):
    return Generator(gid, (x, y), I, w)


def random_scene(rng, n, aniso=True):
    gens = []
    for k in range(n):
        x, y = rng.uniform(0, 100, 2)
        if aniso and k % 2:
            th = rng.uniform(0, math.pi)
            a1 = rng.uniform(3, 10) ** 2
            a2 = rng.uniform(1, 3) ** 2
            m = SymMat2(1 / a1, 0, 1 / a2).rotated(th)
        else:
            m = I
        gens.append(Generator(k, (x, y), m, rng.uniform(0, 5)))
    return gens


def test_two_generators_single_full_line():
    d = build_diagram([iso(0, 0, 0), iso(1, 2, 0)])
    assert len(d.vertices) == 0
    assert len(d.edges) == 1
    e = d.edges[0]
    assert e.kind == "full_line"
    assert e.pair == (0, 1)
    assert d.adjacency == {(0, 1)}
    assert d.cell_components[0] == [[0]]
    assert d.cell_components[1] == [[0]]
    assert not d.empty_cells


def test_concentric_pair_closed_loop_edge():
    # 2 I vs I at the same center, w = (1, 0): bisector is x^2 + y^2 = 1
    g0 = Generator(0, (0, 0), SymMat2.isotropic(2.0), 1.0)
    g1 = Generator(1, (0, 0), I, 0.0)
    d = build_diagram([g0, g1])
    assert len(d.edges) == 1
    e = d.edges[0]
    assert e.kind == "loop"
    b = d.edge_bisector(e)
    assert b.conic_class is ConicClass.ELLIPSE
    q = b.point_at_alpha(0.7)
    assert math.hypot(q[0], q[1]) == pytest.approx(1.0, abs=1e-12)


def test_one_neighbor_cell():
    # concentric pair plus a distant generator: the inner cell keeps exactly
    # one neighbor and a single closed boundary loop
    g0 = Generator(0, (0, 0), SymMat2.isotropic(2.0), 1.0)
    g1 = Generator(1, (0, 0), I, 0.0)
    g2 = iso(2, 100, 0)
    d = build_diagram([g0, g1, g2])
    assert d.neighbors(0) == {1}
    assert d.neighbors(1) == {0, 2}
    loops = [d.edges[i] for i in d.cell_edges[0]]
    assert len(loops) == 1 and loops[0].kind == "loop"
    assert d.cell_components[0] == [[loops[0].id]]
    # the (1, 2) bisector is the full power line x = 50
    e12 = [e for e in d.edges if e.pair == (1, 2)]
    assert len(e12) == 1 and e12[0].kind == "full_line"


def test_equilateral_triangle_rays():
    h = 2.0 * math.sqrt(3.0)
    d = build_diagram([iso(0, 0, 0), iso(1, 4, 0), iso(2, 2, h)])
    assert len(d.vertices) == 1
    v = d.vertices[0]
    assert v.gens == frozenset({0, 1, 2})
    assert np.allclose(v.pos, [2.0, 2.0 / math.sqrt(3.0)], atol=1e-9)
    assert len(d.edges) == 3
    for e in d.edges:
        assert e.kind == "interval"
        assert sorted(x is None for x in e.endpoints) == [False, True]
        assert math.isinf(e.t_a) or math.isinf(e.t_b)
    assert d.adjacency == {(0, 1), (0, 2), (1, 2)}
    for gid in range(3):
        assert len(d.cell_components[gid]) == 1


def test_square_grid_degree_four_vertex():
    d = build_diagram([iso(0, 0, 0), iso(1, 1, 0), iso(2, 0, 1), iso(3, 1, 1)])
    assert len(d.vertices) == 1
    v = d.vertices[0]
    assert v.gens == frozenset({0, 1, 2, 3})
    assert np.allclose(v.pos, [0.5, 0.5], atol=1e-9)
    # diagonal pairs never become adjacent
    assert d.adjacency == {(0, 1), (0, 2), (1, 3), (2, 3)}
    assert len(d.edges) == 4
    # vertex degree: four edge ends
    ends = sum(e.endpoints.count(0) for e in d.edges)
    assert ends == 4


def test_empty_cell_flag():
    h = 2.0 * math.sqrt(3.0)
    gens = [iso(0, 0, 0), iso(1, 4, 0), iso(2, 2, h), iso(3, 2, 1.2, w=-100.0)]
    d = build_diagram(gens)
    assert 3 in d.empty_cells
    assert d.cell_edges[3] == []
    assert not d.neighbors(3)


def test_identical_generators_alias():
    gens = [iso(0, 0, 0), iso(1, 3, 0), iso(2, 0, 0)]  # 2 duplicates 0
    d = build_diagram(gens)
    assert d.aliases == {2: 0}
    assert 2 in d.empty_cells
    assert d.adjacency == {(0, 1)}


def test_hyperbola_branch_visibility():
    g0 = Generator(0, (0, 0), SymMat2(2.0, 0.0, 0.5), 0.0)
    g1 = Generator(1, (3, 0), I, 0.0)
    d2 = build_diagram([g0, g1])
    b = d2.bisectors[(0, 1)]
    assert b.conic_class is ConicClass.HYPERBOLA
    assert len(d2.edges) == 2  # both branches visible with two generators
    # left apex of the hyperbola (x + 3)^2 - y^2 / 2 = 18
    apex = np.array([-3.0 - math.sqrt(18.0), 0.0])
    assert abs(b.implicit.evaluate(apex[0], apex[1])) < 1e-9

    def covers(diagram, point):
        bb = diagram.bisectors[(0, 1)]
        from gbpd.bisector import param_of_point

        t = param_of_point(bb.param, point, 1e-6)[0]
        a = alpha_of_param(t)
        for e in diagram.edges:
            if e.pair != (0, 1) or e.alpha_a is None:
                continue
            off = (a - e.alpha_a) % (2 * math.pi)
            if off <= e.alpha_b - e.alpha_a:
                return True
        return False

    assert covers(d2, apex)
    # a generator sitting on the left apex hides that branch
    d3 = build_diagram([g0, g1, iso(2, apex[0], apex[1])])
    assert not covers(d3, apex)
    right = np.array([-3.0 + math.sqrt(18.0), 0.0])
    assert covers(d3, right)


def test_weight_shift_invariance():
    rng = np.random.default_rng(7)
    gens = random_scene(rng, 12)
    d1 = build_diagram(gens)
    d2 = build_diagram([g.with_weight(g.w + 17.0) for g in gens])
    assert d1.adjacency == d2.adjacency
    assert len(d1.vertices) == len(d2.vertices)
    scale = 1e-9 * (1.0 + d1.length_scale)
    for v1, v2 in zip(d1.vertices, d2.vertices):
        assert math.hypot(*(v1.pos - v2.pos)) <= scale
        assert v1.gens == v2.gens
    assert [(e.pair, e.kind, e.component) for e in d1.edges] == [
        (e.pair, e.kind, e.component) for e in d2.edges
    ]


def test_laguerre_vertices_are_radical_centers():
    rng = np.random.default_rng(21)
    pts = rng.uniform(0, 50, (10, 2))
    ws = rng.uniform(0, 30, 10)
    gens = [Generator(k, pts[k], I, ws[k]) for k in range(10)]
    d = build_diagram(gens)
    for b in d.bisectors.values():
        assert b.conic_class is ConicClass.SINGLE_LINE
    assert d.vertices, "expected at least one vertex in a 10-site scene"
    for v in d.vertices:
        ids = sorted(v.gens)[:3]
        rc = radical_center(
            pts[ids[0]], ws[ids[0]], pts[ids[1]], ws[ids[1]], pts[ids[2]], ws[ids[2]]
        )
        assert rc is not None
        assert math.hypot(v.pos[0] - rc[0], v.pos[1] - rc[1]) <= 1e-9 * (1 + np.abs(rc).max())


def test_vertex_degree_at_least_three():
    rng = np.random.default_rng(3)
    gens = random_scene(rng, 14)
    d = build_diagram(gens)
    assert d.vertices
    degree = {v.id: 0 for v in d.vertices}
    for e in d.edges:
        for vid in e.endpoints:
            if vid is not None:
                degree[vid] += 1
    for vid, deg in degree.items():
        assert deg >= 3, f"vertex {vid} has degree {deg}"


def test_edge_midpoints_are_two_nearest():
    rng = np.random.default_rng(11)
    gens = random_scene(rng, 10)
    d = build_diagram(gens)
    arr = SceneArrays(gens)
    checked = 0
    for e in d.edges:
        b = d.edge_bisector(e)
        if e.alpha_a is not None:
            span = e.alpha_b - e.alpha_a
            try:
                q = b.point_at_alpha(e.alpha_a + 0.37 * span)
            except Exception:
                continue
            if not np.all(np.isfinite(q)) or np.abs(q).max() > 1e7:
                continue
        elif e.kind == "full_line":
            q = b.lines[e.line_index].point_at(0.0)
        else:
            t0, t1 = e.t_a, e.t_b
            if math.isinf(t0):
                t = t1 - 1.0
            elif math.isinf(t1):
                t = t0 + 1.0
            else:
                t = 0.5 * (t0 + t1)
            q = b.lines[e.line_index].point_at(t)
        dists = arr.dist(q[None])[0]
        ii, jj = arr.id_to_index[e.pair[0]], arr.id_to_index[e.pair[1]]
        others = np.delete(dists, [ii, jj])
        slack = 1e-7 * (1.0 + abs(dists.min()))
        assert max(dists[ii], dists[jj]) <= others.min() + slack
        checked += 1
    assert checked >= len(d.edges) * 0.9


def test_determinism_across_threads_and_runs():
    rng = np.random.default_rng(5)
    gens = random_scene(rng, 16)

    def snapshot(d):
        return (
            [(v.pos[0], v.pos[1], tuple(sorted(v.gens))) for v in d.vertices],
            [
                (e.pair, e.kind, e.t_a, e.t_b, e.endpoints, e.alpha_a, e.alpha_b)
                for e in d.edges
            ],
            sorted(d.adjacency),
        )

    s1 = snapshot(build_diagram(gens, threads=1))
    s2 = snapshot(build_diagram(gens, threads=4))
    s3 = snapshot(build_diagram(gens, threads=1))
    assert s1 == s2  # bitwise identical across thread counts
    assert s1 == s3


def test_visible_segments_direct_call():
    gens = [iso(0, 0, 0), iso(1, 2, 0)]
    d = build_diagram(gens)
    b = d.bisectors[(0, 1)]
    segs = visible_segments(b, {0: [(0.0, None)]}, gens)
    assert len(segs) == 2
    kinds = sorted((s.t_a, s.t_b) for s in segs)
    assert kinds[0][0] == -math.inf and kinds[1][1] == math.inf


def test_single_generator_scene():
    d = build_diagram([iso(0, 5, 5)])
    assert d.edges == []
    assert d.vertices == []
    assert not d.empty_cells
