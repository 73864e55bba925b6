"""Conic-conic intersection via pencil degeneration, and the vertex test.

Two conics C1, C2 (homogeneous symmetric 3x3 matrices) span the pencil
C1 + lam C2. Every member passes through all intersection points, and the
members with det(C1 + lam C2) = 0 factor into at most two lines, so the
intersection reduces to line-conic quadratics: find a real root lam of the
determinant cubic, split that degenerate member into lines, cut the lines
with one of the inputs, and keep points that satisfy both implicit equations.

The cubic has up to three real roots; the member whose adjugate has the
largest negative pivot is kept, since that pivot value measures how cleanly
the member factors into two real lines (it is minus the squared homogeneous
weight of the lines' common point). A member whose pivot is positive is a
complex line pair through one real point, which is then the only possible
real intersection and is emitted directly.

Everything is written over a batch axis: the diagram construction calls this
for every generator triple, so the batch of pairs (E_ij, E_ik) runs through
one vectorized pass instead of half a million Python-level solves. The
scalar entry point wraps a batch of size one.
"""

from __future__ import annotations

import math

import numpy as np

from .conic import ConicImplicit
from .errors import OverlappingConicsError
from .geometry import Generator, SceneArrays, as_point
from .tolerances import DEFAULT_TOLERANCES, ToleranceSet

# determinant magnitude (after max-abs normalization) below which an input
# conic counts as already degenerate and is used as the pencil member itself
_DET_REL = 1e-10
# relative discriminant clamp: slightly negative discriminants from roundoff
# are treated as tangencies instead of missed intersections
_DISC_CLAMP = 1e-10


def _det3(m: np.ndarray) -> np.ndarray:
    return (
        m[..., 0, 0] * (m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1])
        - m[..., 0, 1] * (m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
        + m[..., 0, 2] * (m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0])
    )


def _adj3(m: np.ndarray) -> np.ndarray:
    """Adjugate (transposed cofactors), batched; adj(M) M = det(M) I."""
    out = np.empty_like(m)
    out[..., 0, 0] = m[..., 1, 1] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 1]
    out[..., 0, 1] = -(m[..., 0, 1] * m[..., 2, 2] - m[..., 0, 2] * m[..., 2, 1])
    out[..., 0, 2] = m[..., 0, 1] * m[..., 1, 2] - m[..., 0, 2] * m[..., 1, 1]
    out[..., 1, 0] = -(m[..., 1, 0] * m[..., 2, 2] - m[..., 1, 2] * m[..., 2, 0])
    out[..., 1, 1] = m[..., 0, 0] * m[..., 2, 2] - m[..., 0, 2] * m[..., 2, 0]
    out[..., 1, 2] = -(m[..., 0, 0] * m[..., 1, 2] - m[..., 0, 2] * m[..., 1, 0])
    out[..., 2, 0] = m[..., 1, 0] * m[..., 2, 1] - m[..., 1, 1] * m[..., 2, 0]
    out[..., 2, 1] = -(m[..., 0, 0] * m[..., 2, 1] - m[..., 0, 1] * m[..., 2, 0])
    out[..., 2, 2] = m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]
    return out


def _skew(p: np.ndarray) -> np.ndarray:
    """Cross-product matrices of homogeneous points, batched (..., 3)."""
    out = np.zeros(p.shape + (3,))
    out[..., 0, 1] = -p[..., 2]
    out[..., 0, 2] = p[..., 1]
    out[..., 1, 0] = p[..., 2]
    out[..., 1, 2] = -p[..., 0]
    out[..., 2, 0] = -p[..., 1]
    out[..., 2, 1] = p[..., 0]
    return out


def _real_cubic_roots(c3, c2, c1, c0):
    """Real roots of c3 x^3 + c2 x^2 + c1 x + c0, batched.

    Returns (T, 3) with single-real-root cases padded by repetition. The
    leading coefficient must be bounded away from zero (the caller only
    evaluates the result where both pencil ends are nondegenerate). Two
    Newton sweeps polish the closed-form roots.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        a = c2 / c3
        b = c1 / c3
        c = c0 / c3
        p = b - a * a / 3.0
        q = 2.0 * a**3 / 27.0 - a * b / 3.0 + c
        delta = 0.25 * q * q + p**3 / 27.0

        # one real root (delta > 0): Cardano
        sq = np.sqrt(np.maximum(delta, 0.0))
        u = np.cbrt(-0.5 * q + sq)
        v = np.cbrt(-0.5 * q - sq)
        y_single = u + v

        # three real roots (delta <= 0): trigonometric form
        pm = np.sqrt(np.maximum(-p / 3.0, 0.0))
        pm_safe = np.where(pm > 0.0, pm, 1.0)
        arg = np.clip(1.5 * q / (p * pm_safe), -1.0, 1.0)
        arg = np.where(pm > 0.0, arg, 0.0)
        theta = np.arccos(arg) / 3.0
        ks = np.array([0.0, 1.0, 2.0])
        y_triple = 2.0 * pm[:, None] * np.cos(theta[:, None] - 2.0 * math.pi * ks[None, :] / 3.0)

        single = (delta > 0.0)[:, None]
        y = np.where(single, y_single[:, None], y_triple)
        x = y - (a / 3.0)[:, None]

        # Newton polish on the original cubic
        c3e, c2e, c1e, c0e = (arr[:, None] for arr in (c3, c2, c1, c0))
        for _ in range(2):
            f = ((c3e * x + c2e) * x + c1e) * x + c0e
            df = (3.0 * c3e * x + 2.0 * c2e) * x + c1e
            step = np.where(np.abs(df) > 0.0, f / np.where(df == 0.0, 1.0, df), 0.0)
            x = x - step
    return x


def pencil_intersections_batch(
    d1: np.ndarray,
    d2: np.ndarray,
    length_scale: float = 1.0,
    tol: ToleranceSet = DEFAULT_TOLERANCES,
    center: tuple[float, float] = (0.0, 0.0),
) -> tuple[np.ndarray, np.ndarray]:
    """Intersection candidates for T conic pairs given as 3x3 matrices.

    Returns (points, valid) with shapes (T, 4, 2) and (T, 4). Valid points
    satisfy both implicit equations within the scaled residual tolerance and
    are deduplicated within tol.dedup_rel * length_scale per pair. Pairs with
    coincident zero sets produce no valid points (their intersection is not a
    finite set).

    ``length_scale`` and ``center`` define a similarity frame for the scene.
    Conic coefficients of bisectors are internally unbalanced (the constant
    term carries two powers of the coordinate magnitude), which starves the
    determinant cubic of precision; the kernel therefore works in the frame
    x = length_scale * xh + center, where quadratic, linear and constant
    parts are comparable, and maps the results back.
    """
    d1 = np.asarray(d1, dtype=float)
    d2 = np.asarray(d2, dtype=float)
    t_count = d1.shape[0]
    if t_count == 0:
        return np.zeros((0, 4, 2)), np.zeros((0, 4), bool)

    h = float(length_scale)
    cx, cy = float(center[0]), float(center[1])
    if h <= 0.0:
        raise ValueError("length_scale must be positive")
    frame = np.array([[h, 0.0, cx], [0.0, h, cy], [0.0, 0.0, 1.0]])
    d1 = np.einsum("ba,tbc,cd->tad", frame, d1, frame)
    d2 = np.einsum("ba,tbc,cd->tad", frame, d2, frame)

    with np.errstate(divide="ignore", invalid="ignore"):
        s1 = np.abs(d1).reshape(t_count, 9).max(axis=1)
        s2 = np.abs(d2).reshape(t_count, 9).max(axis=1)
        a1 = d1 / np.where(s1 > 0.0, s1, 1.0)[:, None, None]
        a2 = d2 / np.where(s2 > 0.0, s2, 1.0)[:, None, None]
        nonzero = (s1 > 0.0) & (s2 > 0.0)

        det1 = _det3(a1)
        det2 = _det3(a2)
        deg1 = np.abs(det1) <= _DET_REL
        deg2 = np.abs(det2) <= _DET_REL
        use_pencil = ~deg1 & ~deg2

        # determinant cubic det(a1 + lam a2) and its best degenerate member
        adj1 = _adj3(a1)
        adj2 = _adj3(a2)
        cubic = (
            det2,
            np.einsum("tij,tji->t", adj2, a1),
            np.einsum("tij,tji->t", adj1, a2),
            det1,
        )
        safe = np.where(use_pencil, cubic[0], 1.0)
        roots = _real_cubic_roots(safe, cubic[1], cubic[2], cubic[3])
        members = a1[:, None] + roots[:, :, None, None] * a2[:, None]  # (T, 3, 3, 3)
        diag = np.diagonal(_adj3(members), axis1=2, axis2=3)  # (T, 3, 3)
        piv3 = np.abs(diag).argmax(axis=2)
        bpp3 = np.take_along_axis(diag, piv3[:, :, None], axis=2)[:, :, 0]
        best = np.argmax(-bpp3, axis=1)
        member = members[np.arange(t_count), best]

        # degenerate inputs are their own degenerate member
        member = np.where(deg1[:, None, None], a1, np.where(deg2[:, None, None], a2, member))
        other = np.where(deg1[:, None, None], a2, a1)

        badj = _adj3(member)
        diag = np.diagonal(badj, axis1=1, axis2=2)  # (T, 3)
        piv = np.abs(diag).argmax(axis=1)
        bpp = np.take_along_axis(diag, piv[:, None], axis=1)[:, 0]
        b_scale = np.abs(member).reshape(t_count, 9).max(axis=1) ** 2
        p_raw = np.take_along_axis(badj, piv[:, None, None], axis=2)[:, :, 0]  # (T, 3)

        real_split = bpp <= 1e-12 * b_scale
        beta = np.sqrt(np.maximum(-bpp, 0.0))
        p_vec = p_raw / np.where(beta > 0.0, beta, 1.0)[:, None]
        cmat = member + _skew(p_vec)
        flat = np.abs(cmat).reshape(t_count, 9)
        ij = flat.argmax(axis=1)
        i_star, j_star = ij // 3, ij % 3
        l_line = np.take_along_axis(cmat, i_star[:, None, None], axis=1)[:, 0, :]
        m_line = np.take_along_axis(cmat, j_star[:, None, None], axis=2)[:, :, 0]
        lines = np.stack([l_line, m_line], axis=1)  # (T, 2, 3)

        # cut each line with the other conic
        a00 = other[:, 0, 0]
        a01 = other[:, 0, 1]
        a11 = other[:, 1, 1]
        bx = 2.0 * other[:, 0, 2]
        by = 2.0 * other[:, 1, 2]
        cc = other[:, 2, 2]

        pts = np.full((t_count, 4, 2), np.nan)
        valid = np.zeros((t_count, 4), bool)
        for li in range(2):
            la = lines[:, li, 0]
            lb = lines[:, li, 1]
            lc = lines[:, li, 2]
            n = np.hypot(la, lb)
            line_ok = nonzero & real_split & (n > 1e-12 * np.abs(lc)) & (n > 0.0)
            n_safe = np.where(n > 0.0, n, 1.0)
            an, bn, cn = la / n_safe, lb / n_safe, lc / n_safe
            q0x, q0y = -cn * an, -cn * bn
            dx, dy = -bn, an
            qa = a00 * dx * dx + 2.0 * a01 * dx * dy + a11 * dy * dy
            qb = (
                2.0 * (a00 * q0x * dx + a01 * (q0x * dy + q0y * dx) + a11 * q0y * dy)
                + bx * dx
                + by * dy
            )
            qc = (
                a00 * q0x * q0x
                + 2.0 * a01 * q0x * q0y
                + a11 * q0y * q0y
                + bx * q0x
                + by * q0y
                + cc
            )
            qs = np.abs(qa) + np.abs(qb) + np.abs(qc)
            disc = qb * qb - 4.0 * qa * qc
            dscale = qb * qb + np.abs(4.0 * qa * qc)
            disc = np.where((disc < 0.0) & (disc >= -_DISC_CLAMP * dscale), 0.0, disc)
            sq = np.sqrt(np.maximum(disc, 0.0))
            quad = np.abs(qa) > 1e-14 * qs
            lin = ~quad & (np.abs(qb) > 1e-14 * qs)
            qq = -0.5 * (qb + np.where(qb >= 0.0, sq, -sq))
            r1 = np.where(quad, qq / np.where(quad, qa, 1.0), np.nan)
            qq_ok = quad & (np.abs(qq) > 0.0)
            r2 = np.where(qq_ok, qc / np.where(qq_ok, qq, 1.0), r1)
            r1 = np.where(lin, -qc / np.where(lin, qb, 1.0), r1)
            r2 = np.where(quad, r2, np.nan)
            root_ok = line_ok & (disc >= 0.0)
            for ri, roots_li in enumerate((r1, r2)):
                slot = 2 * li + ri
                ok = root_ok & np.isfinite(roots_li)
                pts[:, slot, 0] = np.where(ok, q0x + roots_li * dx, np.nan)
                pts[:, slot, 1] = np.where(ok, q0y + roots_li * dy, np.nan)
                valid[:, slot] = ok

        # complex line pair: its single real point is the only candidate
        fb = nonzero & ~real_split
        hpt = p_raw
        hn = np.abs(hpt).max(axis=1)
        fb_ok = fb & (np.abs(hpt[:, 2]) > 1e-12 * np.where(hn > 0.0, hn, 1.0))
        h2 = np.where(fb_ok, hpt[:, 2], 1.0)
        pts[:, 0, 0] = np.where(fb_ok, hpt[:, 0] / h2, pts[:, 0, 0])
        pts[:, 0, 1] = np.where(fb_ok, hpt[:, 1] / h2, pts[:, 0, 1])
        valid[:, 0] = valid[:, 0] | fb_ok

        # Newton polish on the 2x2 implicit system, then residual filter
        x = pts[:, :, 0]
        y = pts[:, :, 1]
        for _ in range(3):
            f1 = _implicit_eval(a1, x, y)
            f2 = _implicit_eval(a2, x, y)
            f1x = 2.0 * (a1[:, None, 0, 0] * x + a1[:, None, 0, 1] * y + a1[:, None, 0, 2])
            f1y = 2.0 * (a1[:, None, 0, 1] * x + a1[:, None, 1, 1] * y + a1[:, None, 1, 2])
            f2x = 2.0 * (a2[:, None, 0, 0] * x + a2[:, None, 0, 1] * y + a2[:, None, 0, 2])
            f2y = 2.0 * (a2[:, None, 0, 1] * x + a2[:, None, 1, 1] * y + a2[:, None, 1, 2])
            det = f1x * f2y - f1y * f2x
            det_scale = np.abs(f1x * f2y) + np.abs(f1y * f2x)
            ok = valid & (np.abs(det) > 1e-12 * det_scale) & np.isfinite(det)
            det_safe = np.where(ok, det, 1.0)
            step_x = (f1 * f2y - f2 * f1y) / det_safe
            step_y = (f1x * f2 - f2x * f1) / det_safe
            x = np.where(ok, x - step_x, x)
            y = np.where(ok, y - step_y, y)
        pts[:, :, 0] = x
        pts[:, :, 1] = y

        f1 = _implicit_eval(a1, x, y)
        f2 = _implicit_eval(a2, x, y)
        r1s = _residual_scale(a1, x, y)
        r2s = _residual_scale(a2, x, y)
        with np.errstate(invalid="ignore"):
            valid &= np.isfinite(x) & np.isfinite(y)
            valid &= (np.abs(f1) <= tol.res_rel * r1s) & (np.abs(f2) <= tol.res_rel * r2s)

        # per-pair dedup (unit frame, so the radius is just dedup_rel)
        radius = tol.dedup_rel
        for hi in range(1, 4):
            for lo in range(hi):
                both = valid[:, hi] & valid[:, lo]
                close = both & (
                    np.hypot(x[:, hi] - x[:, lo], y[:, hi] - y[:, lo]) <= radius
                )
                valid[:, hi] = valid[:, hi] & ~close

        # back to scene coordinates
        pts[:, :, 0] = h * x + cx
        pts[:, :, 1] = h * y + cy

    return pts, valid


def _implicit_eval(d: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Evaluate homogeneous conic matrices (T,3,3) at point slots (T,S)."""
    return (
        d[:, None, 0, 0] * x * x
        + 2.0 * d[:, None, 0, 1] * x * y
        + d[:, None, 1, 1] * y * y
        + 2.0 * d[:, None, 0, 2] * x
        + 2.0 * d[:, None, 1, 2] * y
        + d[:, None, 2, 2]
    )


def _residual_scale(d: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return (
        1.0
        + np.abs(d[:, None, 0, 0] * x * x)
        + np.abs(2.0 * d[:, None, 0, 1] * x * y)
        + np.abs(d[:, None, 1, 1] * y * y)
        + np.abs(2.0 * d[:, None, 0, 2] * x)
        + np.abs(2.0 * d[:, None, 1, 2] * y)
        + np.abs(d[:, None, 2, 2])
    )


def conic_conic_intersections(
    c1: ConicImplicit,
    c2: ConicImplicit,
    tol: ToleranceSet = DEFAULT_TOLERANCES,
    length_scale: float = 1.0,
    center: tuple[float, float] = (0.0, 0.0),
) -> list[np.ndarray]:
    """All real intersection points of two conics, deduplicated and sorted.

    Raises OverlappingConicsError when the zero sets coincide (proportional
    coefficient matrices, or a whole-plane conic): the intersection is then
    not a finite point set. For conics living far from the origin pass the
    scene frame (length_scale, center); see pencil_intersections_batch.
    """
    d1 = c1.matrix3()
    d2 = c2.matrix3()
    s1 = float(np.abs(d1).max())
    s2 = float(np.abs(d2).max())
    if s1 == 0.0 or s2 == 0.0:
        raise OverlappingConicsError("a whole-plane conic overlaps every conic")
    n1 = d1 / s1
    n2 = d2 / s2
    if min(np.abs(n1 - n2).max(), np.abs(n1 + n2).max()) <= 1e-12:
        raise OverlappingConicsError("conics share their zero set")
    pts, valid = pencil_intersections_batch(d1[None], d2[None], length_scale, tol, center)
    found = [np.array(pts[0, k]) for k in range(4) if valid[0, k]]
    found.sort(key=lambda q: (q[0], q[1]))
    return found


def is_gbpd_vertex(
    v,
    triple,
    scene,
    tol: ToleranceSet = DEFAULT_TOLERANCES,
) -> bool:
    """True iff the triple's shared distance at v is the global minimum.

    ``triple`` holds generator ids; ``scene`` is a SceneArrays or a sequence
    of Generators. Tolerance scales with (1 + |min distance|).
    """
    arr = scene if isinstance(scene, SceneArrays) else SceneArrays(list(scene))
    q = as_point(v)
    d = arr.dist(q[None, :])[0]
    d_ref = min(float(d[arr.id_to_index[g]]) for g in triple)
    d_min = float(d.min())
    return d_ref - d_min <= tol.vert_rel * (1.0 + abs(d_min))
