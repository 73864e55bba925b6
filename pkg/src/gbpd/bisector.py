"""Bisector conics between generator pairs.

The locus of points equidistant to generators i and j,

    (q - p_i)^T M_i (q - p_i) - w_i = (q - p_j)^T M_j (q - p_j) - w_j,

expands to an implicit conic with quadratic part A = M_i - M_j, linear part
B = -2 (M_i p_i - M_j p_j) and constant p_i^T M_i p_i - p_j^T M_j p_j -
w_i + w_j. Equal matrices give the straight power-diagram bisector; unequal
matrices give ellipses, parabolas, hyperbolas, or degenerate line pairs.

A bisector also carries its connected components in parameter space. Curve
components are arcs of the circular alpha domain delimited by singular
parameters (an ellipse is one closed loop, a parabola one open arc, a
hyperbola two branches); each line of a degenerate bisector is a component
of its own.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .conic import (
    CURVE_CLASSES,
    ConicClass,
    ConicImplicit,
    DegenerateConic,
    LineParam,
    ParametrizedConic,
    alpha_of_param,
    classify_and_parametrize,
    param_of_alpha,
    real_quadratic_roots,
    wrap_angle,
)
from .errors import NoSolutionError, SingularParameterError
from .geometry import Generator, SymMat2, as_point
from .tolerances import DEFAULT_TOLERANCES, ToleranceSet

TWO_PI = 2.0 * math.pi


def bisector_implicit(gi: Generator, gj: Generator) -> ConicImplicit:
    """Implicit conic of the (i, j) bisector; coefficients are exact arithmetic."""
    a11 = gi.M.m11 - gj.M.m11
    a12 = gi.M.m12 - gj.M.m12
    a22 = gi.M.m22 - gj.M.m22
    mi_pi = gi.M.apply(gi.p)
    mj_pj = gj.M.apply(gj.p)
    b11 = -2.0 * (mi_pi[0] - mj_pj[0])
    b12 = -2.0 * (mi_pi[1] - mj_pj[1])
    c = float(gi.p @ mi_pi) - float(gj.p @ mj_pj) - gi.w + gj.w
    return ConicImplicit(a11, a12, a22, b11, b12, c)


@dataclass(frozen=True)
class BisectorComponent:
    """One connected piece of a bisector's point set.

    Curve pieces ("arc") live on the circular alpha domain: the piece covers
    alpha in (lo, hi) with hi - lo <= 2 pi, wrapping through pi as needed;
    ``closed`` marks the full loop of an ellipse. Line pieces ("line") cover
    all of R on the line with the stored index.
    """

    kind: str  # "arc" or "line"
    lo: float
    hi: float
    closed: bool = False
    line_index: int | None = None

    def midpoint(self) -> float:
        """Representative parameter: alpha for arcs, t for lines."""
        if self.kind == "line":
            return 0.0
        if self.closed:
            return 0.0
        return 0.5 * (self.lo + self.hi)

    def contains_alpha(self, alpha: float) -> bool:
        if self.kind != "arc":
            return False
        if self.closed:
            return True
        span = self.hi - self.lo
        off = (alpha - self.lo) % TWO_PI
        return 0.0 <= off <= span


def _curve_components(param: ParametrizedConic) -> tuple[BisectorComponent, ...]:
    cls = param.conic_class
    if cls is ConicClass.ELLIPSE:
        return (BisectorComponent("arc", -math.pi, math.pi, closed=True),)
    if cls is ConicClass.PARABOLA:
        a0 = param.singular_alphas[0]
        return (BisectorComponent("arc", a0, a0 + TWO_PI),)
    # hyperbola: branches split by the two singular parameters +-s
    a1, a2 = sorted(param.singular_alphas)
    return (
        BisectorComponent("arc", a1, a2),
        BisectorComponent("arc", a2, a1 + TWO_PI),
    )


@dataclass(frozen=True)
class Bisector:
    """Bisector of the generator pair (i, j) with i < j."""

    i: int
    j: int
    gi: Generator
    gj: Generator
    implicit: ConicImplicit
    conic_class: ConicClass
    param: ParametrizedConic | None
    lines: tuple[LineParam, ...]
    components: tuple[BisectorComponent, ...]

    @property
    def pair(self) -> tuple[int, int]:
        return (self.i, self.j)

    def point_at_alpha(self, alpha: float, tol: ToleranceSet = DEFAULT_TOLERANCES) -> np.ndarray:
        assert self.param is not None
        return self.param.point_at_alpha(alpha, tol)

    def is_empty(self) -> bool:
        return self.conic_class is ConicClass.EMPTY

    def is_whole_plane(self) -> bool:
        return self.conic_class is ConicClass.WHOLE_PLANE


def _pair_frame(gi: Generator, gj: Generator) -> tuple[np.ndarray, float]:
    """Similarity frame local to a generator pair: center and scale.

    The scale is a power of two so that rescaling generator data is exact;
    classifying the bisector in this frame keeps the conic matrix entries
    balanced regardless of where the scene sits in the plane.
    """
    c = 0.5 * (gi.p + gj.p)
    sep = max(
        abs(float(gi.p[0] - c[0])),
        abs(float(gi.p[1] - c[1])),
        abs(float(gj.p[0] - c[0])),
        abs(float(gj.p[1] - c[1])),
        abs(float(c[0])) * 1e-8,
        abs(float(c[1])) * 1e-8,
    )
    h = 2.0 ** math.ceil(math.log2(sep)) if sep > 1.0 else 1.0
    return c, h


def _rescaled_generator(g: Generator, c: np.ndarray, h: float) -> Generator:
    m = SymMat2(h * h * g.M.m11, h * h * g.M.m12, h * h * g.M.m22)
    return Generator(g.id, (g.p - c) / h, m, g.w)


def _rep_to_global(rep, h: float, c: np.ndarray):
    """Map a parametrization built in the pair frame back to scene coordinates."""
    if isinstance(rep, ParametrizedConic):
        xq = tuple(h * rep.xq[k] + c[0] * rep.uq[k] for k in range(3))
        yq = tuple(h * rep.yq[k] + c[1] * rep.uq[k] for k in range(3))
        return ParametrizedConic(xq, yq, rep.uq, rep.singular_params, rep.conic_class)
    lines = tuple(
        LineParam.from_implicit(ln.a, ln.b, h * ln.c - ln.a * c[0] - ln.b * c[1])
        for ln in rep.lines
    )
    return DegenerateConic(rep.conic_class, lines)


def make_bisector(
    gi: Generator,
    gj: Generator,
    tol: ToleranceSet = DEFAULT_TOLERANCES,
) -> Bisector:
    """Build the full bisector representation for a generator pair.

    The implicit form is exact scene-coordinate arithmetic. Classification
    and parametrization run in a pair-local similarity frame (the distance
    difference is frame-invariant when centers shift by c and matrices pick
    up h^2), which keeps the result accurate far from the origin; the
    representation is mapped back affinely.
    """
    if gi.id == gj.id:
        raise ValueError("bisector requires distinct generator ids")
    if gi.id > gj.id:
        gi, gj = gj, gi
    implicit = bisector_implicit(gi, gj)
    c, h = _pair_frame(gi, gj)
    if h != 1.0 or c[0] != 0.0 or c[1] != 0.0:
        hat = bisector_implicit(
            _rescaled_generator(gi, c, h), _rescaled_generator(gj, c, h)
        )
    else:
        hat = implicit
    rep = _rep_to_global(classify_and_parametrize(hat, tol, 2.0), h, c)
    if isinstance(rep, ParametrizedConic):
        return Bisector(
            i=gi.id,
            j=gj.id,
            gi=gi,
            gj=gj,
            implicit=implicit,
            conic_class=rep.conic_class,
            param=rep,
            lines=(),
            components=_curve_components(rep),
        )
    assert isinstance(rep, DegenerateConic)
    comps = tuple(
        BisectorComponent("line", -math.inf, math.inf, line_index=k)
        for k in range(len(rep.lines))
    )
    return Bisector(
        i=gi.id,
        j=gj.id,
        gi=gi,
        gj=gj,
        implicit=implicit,
        conic_class=rep.conic_class,
        param=None,
        lines=rep.lines,
        components=comps,
    )


def _project_param(p: ParametrizedConic, v, t: float, tol: ToleranceSet) -> float:
    """Polish a near-hit parameter by projecting v onto the curve.

    Gauss-Newton on the squared distance in alpha space; the raw quadratic
    roots carry coordinate-scale roundoff, the projected parameter pins the
    curve point to v at machine precision. The infinite parameter is kept
    as is so wrap bookkeeping stays exact.
    """
    if not math.isfinite(t):
        return t
    alpha = alpha_of_param(t)
    best_alpha, best_d2 = alpha, None
    for _ in range(3):
        try:
            q = p.point_at_alpha(alpha, tol)
            dv = p.velocity_at_alpha(alpha, tol)
        except SingularParameterError:
            break
        rx, ry = v[0] - q[0], v[1] - q[1]
        d2 = rx * rx + ry * ry
        if best_d2 is None or d2 < best_d2:
            best_alpha, best_d2 = alpha, d2
        n2 = dv[0] * dv[0] + dv[1] * dv[1]
        if n2 <= 0.0:
            break
        alpha = alpha + (rx * dv[0] + ry * dv[1]) / n2
    else:
        try:
            q = p.point_at_alpha(alpha, tol)
            rx, ry = v[0] - q[0], v[1] - q[1]
            d2 = rx * rx + ry * ry
            if best_d2 is None or d2 < best_d2:
                best_alpha = alpha
        except SingularParameterError:
            pass
    return param_of_alpha(best_alpha)


def param_of_point(
    p: ParametrizedConic,
    v,
    eps: float,
    tol: ToleranceSet = DEFAULT_TOLERANCES,
) -> list[float]:
    """All parameters t (math.inf allowed) whose curve point lies within eps of v.

    Solves the two quadratics x^(t) - v_x u^(t) = 0 and y^(t) - v_y u^(t) = 0,
    takes the union of their real roots (plus the infinite parameter when both
    leading coefficients vanish), and keeps candidates whose curve point is
    within eps of v. Raises NoSolutionError when nothing qualifies.
    """
    v = as_point(v)
    qx = tuple(p.xq[k] - v[0] * p.uq[k] for k in range(3))
    qy = tuple(p.yq[k] - v[1] * p.uq[k] for k in range(3))
    candidates: list[float] = []
    inf_candidate = True
    for q in (qx, qy):
        roots, inf_root, everywhere = real_quadratic_roots(*q)
        if not everywhere:
            candidates.extend(roots)
            inf_candidate = inf_candidate and inf_root
    if inf_candidate:
        candidates.append(math.inf)
    accepted: list[float] = []
    for t in candidates:
        x, y, u = p.homogeneous_at(t)
        if abs(u) <= tol.den_rel * p.u_scale:
            continue
        if math.hypot(x / u - v[0], y / u - v[1]) <= eps:
            accepted.append(_project_param(p, v, t, tol))
    if not accepted:
        raise NoSolutionError(f"point {tuple(v)} does not lie on the curve within {eps}")
    # merge duplicates in alpha space (handles inf and near-equal finite t)
    accepted.sort(key=alpha_of_param)
    merged: list[float] = []
    for t in accepted:
        if merged:
            prev = merged[-1]
            da = abs(wrap_angle(alpha_of_param(t) - alpha_of_param(prev)))
            if da <= tol.param_merge * 10.0 or (
                math.isfinite(t)
                and math.isfinite(prev)
                and abs(t - prev) <= tol.param_merge * (1.0 + abs(t) + abs(prev))
            ):
                continue
        merged.append(t)
    # the list is circular: first and last may also coincide
    if len(merged) > 1:
        da = abs(wrap_angle(alpha_of_param(merged[0]) - alpha_of_param(merged[-1])))
        if da <= tol.param_merge * 10.0:
            merged.pop()
    return merged


def alphas_of_point(
    b: Bisector, v, eps: float, tol: ToleranceSet = DEFAULT_TOLERANCES
) -> list[float]:
    """Parameters of a point on a curved bisector, in alpha space."""
    assert b.param is not None
    return [alpha_of_param(t) for t in param_of_point(b.param, v, eps, tol)]


def bisector_has_points(b: Bisector) -> bool:
    return b.conic_class in CURVE_CLASSES or len(b.lines) > 0


def sample_points(
    b: Bisector,
    count: int = 64,
    line_span: float = 100.0,
    tol: ToleranceSet = DEFAULT_TOLERANCES,
) -> list[np.ndarray]:
    """Evenly spread points over every component of a bisector.

    Curve components are sampled in alpha with a margin away from singular
    parameters; line components over t in [-line_span, line_span]. Empty and
    whole-plane bisectors yield no points.
    """
    if not bisector_has_points(b):
        return []
    pts: list[np.ndarray] = []
    per = max(1, count // max(1, len(b.components)))
    for comp in b.components:
        if comp.kind == "line":
            line = b.lines[comp.line_index]
            for t in np.linspace(-line_span, line_span, per):
                pts.append(line.point_at(float(t)))
        else:
            span = comp.hi - comp.lo
            margin = 0.0 if comp.closed else 0.02 * span
            alphas = np.linspace(comp.lo + margin, comp.hi - margin, per, endpoint=not comp.closed)
            for a in alphas:
                pts.append(b.point_at_alpha(float(a), tol))
    return pts
