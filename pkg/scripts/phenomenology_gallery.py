#!/usr/bin/env python3
"""Render the classic cell phenomenology as an SVG gallery.

Six constructed scenes: the random-weights pair (all weights zero vs a
(-1,3)-uniform draw), an empty cell from a -100 weight, a one-neighbor cell
(concentric pair), a two-neighbor lens, and a disconnected cell split by a
locally stronger rival. Prints the structural flags the diagram reports for
each and writes one SVG per scene.

    python scripts/phenomenology_gallery.py --outdir gallery
"""

import argparse
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gbpd.cli import random_scene
from gbpd.clip import clip_to_window
from gbpd.diagram import build_diagram
from gbpd.geometry import Generator, SymMat2, Window
from gbpd.measure import measure_cells
from gbpd.render import write_svg

WIN400 = Window(0.0, 0.0, 400.0, 400.0)


def iso(gid, x, y, m=1.0, w=0.0):
    return Generator(gid, np.array([x, y], dtype=float), SymMat2.isotropic(m), w)


def scene_zero_weights():
    return random_scene("paper-random", 16, 7, WIN400), WIN400


def scene_random_weights():
    gens, _ = scene_zero_weights()
    rng = np.random.default_rng(77)
    return (
        [Generator(g.id, g.p, g.M, float(rng.uniform(-1.0, 3.0))) for g in gens],
        WIN400,
    )


def scene_empty_cells():
    # 17 generators, two empty cells: one pushed out by weight -100, one a
    # concentric generator strictly inside another (its bisector with the
    # host degenerates to a point)
    gens, win = scene_zero_weights()
    gens = list(gens)
    g = gens[10]
    gens[10] = Generator(g.id, g.p, g.M, -100.0)
    host = gens[3]
    inner = SymMat2(4.0 * host.M.m11, 4.0 * host.M.m12, 4.0 * host.M.m22)
    gens.append(Generator(16, host.p.copy(), inner, host.w))
    return gens, win


def scene_one_neighbor():
    # concentric pair: the inner cell is the unit disk, one neighbor only
    gens = [
        iso(0, 0.0, 0.0, m=2.0, w=1.0),
        iso(1, 0.0, 0.0, m=1.0, w=0.0),
        iso(2, 10.0, 0.0),
        iso(3, -10.0, 7.0),
    ]
    return gens, Window(-16.0, -12.0, 16.0, 12.0)


def scene_lens():
    # tight middle generator squeezed between two equal rivals: its cell is
    # the intersection of two Apollonius disks, bounded by two arcs meeting
    # at two vertices
    gens = [
        iso(0, 0.0, 0.0, m=4.0),
        iso(1, -5.0, 0.0),
        iso(2, 5.0, 0.0),
    ]
    return gens, Window(-10.0, -8.0, 10.0, 8.0)


def scene_disconnected():
    # the elongated generator owns a long strip along the x axis; two
    # weighted rivals pinch it shut in the middle, splitting the cell in two
    gens = [
        Generator(0, np.array([0.0, 0.0]), SymMat2(0.02, 0.0, 1.0), 0.0),
        iso(1, 0.0, 2.0, w=6.0),
        iso(2, 0.0, -2.0, w=6.0),
    ]
    return gens, Window(-16.0, -8.0, 16.0, 8.0)


SCENES = [
    ("zero_weights", scene_zero_weights),
    ("random_weights", scene_random_weights),
    ("empty_cells", scene_empty_cells),
    ("one_neighbor", scene_one_neighbor),
    ("lens", scene_lens),
    ("disconnected", scene_disconnected),
]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--outdir", default="gallery")
    ap.add_argument("--width", type=int, default=600, help="SVG width in px")
    args = ap.parse_args()
    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)

    for name, build in SCENES:
        gens, win = build()
        graph = build_diagram(gens)
        cd = clip_to_window(graph, win)
        measures = measure_cells(cd)
        flags = []
        if graph.empty_cells:
            flags.append(f"empty cells {sorted(graph.empty_cells)}")
        for gid in sorted(measures):
            deg = len(graph.neighbors(gid))
            parts = len(measures[gid].components)
            if deg == 1:
                flags.append(f"cell {gid}: one neighbor")
            elif deg == 2:
                flags.append(f"cell {gid}: lens (two neighbors)")
            if parts > 1:
                flags.append(f"cell {gid}: {parts} components")
        write_svg(out / f"{name}.svg", cd, args.width, vertex_markers=True)
        print(f"{name:16s} {len(gens):3d} generators  " + ("; ".join(flags) or "-"))
    print(f"SVGs in {out}/")
    return 0


if __name__ == "__main__":
    sys.exit(main())
