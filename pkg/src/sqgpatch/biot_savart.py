"""Velocity of patch configurations in the half-plane.

The velocity induced at ``x`` by a scalar ``omega`` is

    u(x) = int (x - y)^perp / |x - y|^(2 + 2 alpha) omega(y) dy
           - int (x - ybar)^perp / |x - ybar|^(2 + 2 alpha) omega(y) dy,

with ``v^perp = (v2, -v1)``, ``ybar = (y1, -y2)`` and ``ytilde = (-y1, y2)``.
The second integral is the wall image and is switched on or off by the
caller.

Two independent evaluators are provided.  :func:`velocity_boundary_integral`
reduces the area integral to a contour integral and is the fast path used
by the time stepper.  :func:`velocity_region_area` integrates over the
region in polar coordinates centred at the kernel singularity and serves as
the reference.  :func:`velocity_odd_system` evaluates the kernels ``K1`` and
``K2`` of the odd-in-``x1`` reduction together with the good/bad splits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.integrate import quad_vec
from scipy.special import beta, betainc

from . import _contour
from .errors import AccuracyError, DomainError, SingularEvaluationError
from .geometry import (
    FloatArray,
    Interpolation,
    PatchCurve,
    Region,
    eval_panel_derivative,
    eval_panels,
    panel_arc_lengths,
)
from .quadrature import gauss_jacobi_unit, gauss_legendre_unit

if TYPE_CHECKING:
    from .evolution import PatchSystem

CSV_HEADER = "x1,x2,u1,u2,u1bad,u1good,u2bad,u2good"


@dataclass(frozen=True)
class KernelParams:
    """Kernel exponent and optional mollification length.

    Parameters
    ----------
    alpha : float
        Exponent in ``[0, 1/2)``; ``alpha = 0`` is the Euler kernel.
    regularization_delta : float
        When positive, ``|x - y|`` is replaced by ``sqrt(|x - y|**2 + delta**2)``
        in the contour evaluator.  The default 0 integrates the singular kernel
        exactly with product rules.
    """

    alpha: float = 0.0
    regularization_delta: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha < 0.5:
            raise ValueError(f"alpha must lie in [0, 1/2), got {self.alpha}")
        if not self.regularization_delta >= 0.0:
            raise ValueError("regularization_delta must be nonnegative")


@dataclass(frozen=True)
class VelocityDecomposition:
    """Velocity at one point of an odd-in-``x1`` configuration.

    Attributes
    ----------
    u : ndarray, shape (2,)
        Velocity, equal to the sum of the bad and good parts.
    k1_terms, k2_terms : ndarray, shape (4,)
        Integrals of the individual terms ``K11..K14`` and ``K21..K24``
        against the stored patches.
    u1_bad, u1_good, u2_bad, u2_good : float
        The parts of ``u1`` from ``y2 < x2`` and ``y2 > x2`` and of ``u2``
        from ``y1 < x1`` and ``y1 > x1``.
    error_estimate : float
        Accumulated quadrature error estimate.
    """

    u: FloatArray
    k1_terms: FloatArray
    k2_terms: FloatArray
    u1_bad: float
    u1_good: float
    u2_bad: float
    u2_good: float
    error_estimate: float = 0.0

    def csv_row(self, x: ArrayLike) -> str:
        x1, x2 = np.asarray(x, dtype=float)
        vals = (x1, x2, self.u[0], self.u[1], self.u1_bad, self.u1_good, self.u2_bad, self.u2_good)
        return ",".join(repr(float(v)) for v in vals)


# ---------------------------------------------------------------------------
# kernel terms


def kernel_terms(x: ArrayLike, y: ArrayLike, params: KernelParams) -> FloatArray:
    """The eight terms ``K11..K14, K21..K24`` of the odd reduction.

    ``x`` and ``y`` broadcast against each other along leading axes.

    Returns
    -------
    ndarray, shape (..., 8)
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    x1, x2 = x[..., 0], x[..., 1]
    y1, y2 = y[..., 0], y[..., 1]
    p = 1.0 + params.alpha
    dist = np.stack(
        [
            (x1 - y1) ** 2 + (x2 - y2) ** 2,
            (x1 + y1) ** 2 + (x2 - y2) ** 2,
            (x1 + y1) ** 2 + (x2 + y2) ** 2,
            (x1 - y1) ** 2 + (x2 + y2) ** 2,
        ],
        axis=-1,
    )
    if np.any(dist == 0.0):
        raise SingularEvaluationError("x coincides with y or one of its reflections")
    inv = dist ** (-p)
    k1 = np.stack([y2 - x2, y2 - x2, y2 + x2, y2 + x2], axis=-1) * inv
    k2 = np.stack([y1 - x1, y1 + x1, y1 + x1, y1 - x1], axis=-1) * inv
    return np.concatenate([k1, k2], axis=-1)


# ---------------------------------------------------------------------------
# contour evaluator


@dataclass(frozen=True)
class PanelSet:
    """Flattened panel data for the compiled contour kernel."""

    coef: FloatArray
    factor: FloatArray
    center: FloatArray
    radius: FloatArray
    length: FloatArray
    speed: FloatArray
    far2_z: FloatArray
    far2_d: FloatArray
    far4_z: FloatArray
    far4_d: FloatArray

    @classmethod
    def build(cls, sources: Sequence[tuple[FloatArray, float]]) -> "PanelSet":
        """Assemble panels from ``(coefficients, factor)`` pairs."""
        if not sources:
            empty2 = np.zeros((0, 2))
            return cls(
                np.zeros((0, 4, 2)), np.zeros(0), empty2, np.zeros(0), np.zeros(0), np.zeros(0),
                np.zeros((0, 2, 2)), np.zeros((0, 2, 2)), np.zeros((0, 4, 2)), np.zeros((0, 4, 2)),
            )
        coef = np.ascontiguousarray(np.concatenate([c for c, _ in sources], axis=0))
        factor = np.concatenate([np.full(len(c), f) for c, f in sources])
        samples = np.linspace(0.0, 1.0, 9)
        pts = eval_panels(coef, samples)
        center = pts[:, 4].copy()
        length = panel_arc_lengths(coef)
        radius = np.max(np.hypot(*(pts - center[:, None]).transpose(2, 0, 1)), axis=1) + 0.05 * length
        der = eval_panel_derivative(coef, samples)
        speed = 1.1 * np.max(np.hypot(der[..., 0], der[..., 1]), axis=1) + 1e-300
        far = []
        for order in (2, 4):
            t, w = gauss_legendre_unit(order)
            far.append(np.ascontiguousarray(eval_panels(coef, t)))
            far.append(np.ascontiguousarray(eval_panel_derivative(coef, t) * (w[None, :, None] * factor[:, None, None])))
        return cls(coef, factor, center, radius, length, speed, *far)


def _image_copies(coef: FloatArray, wall_image: bool, odd_x1: bool) -> list[FloatArray]:
    """Reflected copies of a panel set.

    A reflection reverses orientation and the image carries the opposite
    sign, so every copy enters with the same factor as the original.
    """
    copies = [coef]
    flip1 = np.array([-1.0, 1.0])
    flip2 = np.array([1.0, -1.0])
    if odd_x1:
        copies.append(coef * flip1)
    if wall_image:
        copies.append(coef * flip2)
    if odd_x1 and wall_image:
        copies.append(-coef)
    return copies


def build_sources(
    curves: Iterable[PatchCurve],
    wall_image: bool = False,
    odd_x1: bool = False,
    interpolation: Interpolation = "spline",
) -> PanelSet:
    """Panels of all curves and their images, weighted by strength and orientation."""
    sources = []
    for curve in curves:
        factor = curve.strength * (1.0 if curve.ccw else -1.0)
        for coef in _image_copies(curve.panels(interpolation), wall_image, odd_x1):
            sources.append((coef, factor))
    return PanelSet.build(sources)


def evaluate_panels(panels: PanelSet, points: ArrayLike, params: KernelParams) -> FloatArray:
    """Velocity of a panel set at an ``(m, 2)`` array of points."""
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(points, dtype=float)))
    out = np.zeros_like(pts)
    if len(panels.coef) == 0 or len(pts) == 0:
        return out
    gt, gw = gauss_legendre_unit(8)
    if params.alpha > 0.0:
        jt, jw = gauss_jacobi_unit(8, -2.0 * params.alpha)
    else:
        jt, jw = gt, gw
    _contour.contour_velocity(
        pts, panels.coef, panels.factor, panels.center, panels.radius, panels.length, panels.speed,
        panels.far2_z, panels.far2_d, panels.far4_z, panels.far4_d,
        float(params.alpha), float(params.regularization_delta) ** 2,
        np.ascontiguousarray(gt), np.ascontiguousarray(gw), np.ascontiguousarray(jt), np.ascontiguousarray(jw),
        out,
    )
    return out


def velocity_boundary_integral(
    curve: PatchCurve,
    x: ArrayLike,
    params: KernelParams,
    include_image: bool = False,
    interpolation: Interpolation = "spline",
) -> FloatArray:
    """Velocity of one patch from the contour form of the velocity law.

    Parameters
    ----------
    curve : PatchCurve
        Patch boundary; its strength scales the result.
    x : array_like, shape (2,) or (m, 2)
        Target point(s).  Targets on the curve are handled by product rules.
    params : KernelParams
    include_image : bool
        Add the wall image across ``x2 = 0``.
    interpolation : {"spline", "linear"}
        Boundary interpolant; ``"linear"`` integrates over the node polygon.

    Returns
    -------
    ndarray, shape (2,) or (m, 2)
    """
    pts = np.asarray(x, dtype=float)
    panels = build_sources([curve], wall_image=include_image, interpolation=interpolation)
    out = evaluate_panels(panels, np.atleast_2d(pts), params)
    return out[0] if pts.ndim == 1 else out


# ---------------------------------------------------------------------------
# area evaluator


def polygon_kernel_moment(
    vertices: ArrayLike, center: ArrayLike, alpha: float, tol: float = 1e-12
) -> tuple[FloatArray, float]:
    """``int_P (y - c) / |y - c|^(2 + 2 alpha) dy`` over a simple polygon.

    The polygon is split into the signed fan of triangles with apex ``c``.
    In polar coordinates about ``c`` the radial integral is
    ``rho^(1 - 2 alpha) / (1 - 2 alpha)``.  Along an edge at distance ``h``
    the angular integral splits into a component along the edge, which is
    elementary, and a component toward the edge, ``int cos^(2 alpha)``, an
    incomplete beta function.  Both are evaluated from distances rather
    than angles, so edges seen almost end-on lose no accuracy.

    Returns
    -------
    moment : ndarray, shape (2,)
    error : float
        Estimated absolute error.

    Raises
    ------
    AccuracyError
        If the rounding estimate exceeds ``tol``.
    """
    v = np.asarray(vertices, dtype=float) - np.asarray(center, dtype=float)
    a = v
    b = np.roll(v, -1, axis=0)
    edge = b - a
    elen = np.hypot(edge[:, 0], edge[:, 1])
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    keep = (elen > 0.0) & (cross != 0.0)
    a, b, edge, elen = a[keep], b[keep], edge[keep], elen[keep]
    if len(a) == 0:
        return np.zeros(2), 0.0
    # unit normal from the center toward the edge line, and the distance to it
    side = np.sign(cross[keep])
    normal = side[:, None] * np.column_stack([edge[:, 1], -edge[:, 0]]) / elen[:, None]
    perp = np.column_stack([-normal[:, 1], normal[:, 0]])
    h = np.abs(cross[keep]) / elen
    good = h > 0.0
    a, b, normal, perp, h = a[good], b[good], normal[good], perp[good], h[good]
    ra = np.hypot(a[:, 0], a[:, 1])
    rb = np.hypot(b[:, 0], b[:, 1])
    sin_a = np.einsum("ij,ij->i", a, perp) / ra
    sin_b = np.einsum("ij,ij->i", b, perp) / rb
    expo = 1.0 - 2.0 * alpha
    # along the edge: h * (ra^(-2 alpha) - rb^(-2 alpha)) / (2 alpha), log form at alpha = 0
    log_ratio = np.log(rb) - np.log(ra)
    if alpha > 0.0:
        along = h * ra ** (-2.0 * alpha) * -np.expm1(-2.0 * alpha * log_ratio) / (2.0 * alpha)
    else:
        along = h * log_ratio
    along /= expo
    # toward the edge: h^(1 - 2 alpha) / (1 - 2 alpha) * int cos^(2 alpha) over the subtended angle
    half_beta = 0.5 * beta(0.5, alpha + 0.5)

    def from_zero(sin: FloatArray) -> FloatArray:
        return np.sign(sin) * half_beta * betainc(0.5, alpha + 0.5, sin * sin)

    def to_right_angle(cos2: FloatArray) -> FloatArray:
        return half_beta * betainc(alpha + 0.5, 0.5, cos2)

    steep = (sin_a * sin_b > 0.0) & (np.minimum(np.abs(sin_a), np.abs(sin_b)) > np.sqrt(0.5))
    angular = np.where(
        steep,
        np.sign(sin_a) * (to_right_angle((h / ra) ** 2) - to_right_angle((h / rb) ** 2)),
        from_zero(sin_b) - from_zero(sin_a),
    )
    toward = h**expo / expo * angular
    moment = toward @ normal + along @ perp
    error = 8.0 * np.finfo(float).eps * float(np.sum(np.abs(toward) + np.abs(along)))
    if error > tol:
        raise AccuracyError("polygon kernel moment lost accuracy to rounding", error)
    return moment, error




def _trapezoid_circle(func, tol: float, n0: int = 64, n_max: int = 1 << 16) -> FloatArray:
    """Periodic trapezoid rule with doubling until two levels agree."""
    n = n0
    prev = None
    while True:
        th = 2.0 * np.pi * np.arange(n) / n
        val = func(th).mean(axis=-1) * 2.0 * np.pi
        if prev is not None and np.max(np.abs(val - prev)) <= tol:
            return val
        if n >= n_max:
            raise AccuracyError("angular trapezoid rule did not converge", float(np.max(np.abs(val - prev))))
        prev = val
        n *= 2


def disk_kernel_moment(
    disk_center: ArrayLike, disk_radius: float, center: ArrayLike, alpha: float, tol: float = 1e-12
) -> FloatArray:
    """``int_B (y - c) / |y - c|^(2 + 2 alpha) dy`` over the disk ``B``."""
    o = np.asarray(disk_center, dtype=float)
    c = np.asarray(center, dtype=float)
    p = c - o
    dist = float(np.hypot(*p))
    expo = 1.0 - 2.0 * alpha
    if abs(dist - disk_radius) <= 1e-12 * disk_radius:
        raise SingularEvaluationError("point lies on the disk boundary")
    if dist < disk_radius:
        def inner(th):
            e = np.array([np.cos(th), np.sin(th)])
            pe = p @ e
            rho = -pe + np.sqrt(pe * pe + disk_radius**2 - dist**2)
            return e * rho**expo / expo
        return _trapezoid_circle(inner, tol)

    def ring(r: float) -> FloatArray:
        def integrand(th):
            y = o[:, None] + r * np.array([np.cos(th), np.sin(th)]) - c[:, None]
            return y * np.hypot(y[0], y[1]) ** (-2.0 - 2.0 * alpha) * r
        return _trapezoid_circle(integrand, 0.1 * tol)

    value, err = quad_vec(ring, 0.0, disk_radius, epsabs=tol, epsrel=0.0)
    if err > 10 * tol:
        raise AccuracyError("radial quadrature over the disk did not converge", float(err))
    return value


def region_kernel_moment(region: Region, center: ArrayLike, alpha: float, tol: float) -> tuple[FloatArray, float]:
    if region.kind == "disk":
        cx, cy, r = region.params
        return disk_kernel_moment((cx, cy), r, center, alpha, tol), tol
    return polygon_kernel_moment(region.polygon(), center, alpha, tol)


def velocity_region_area(
    region: Region | PatchCurve,
    x: ArrayLike,
    params: KernelParams,
    include_image: bool = False,
    tol: float = 1e-11,
) -> FloatArray:
    """Velocity of a unit-strength region by polar quadrature over its interior.

    Parameters
    ----------
    region : Region or PatchCurve
        A curve stands for its polygonal interior.
    x : array_like, shape (2,)
    params : KernelParams
    include_image : bool
        Subtract the contribution of the reflection across ``x2 = 0``.
    tol : float
        Absolute tolerance per moment.

    Returns
    -------
    ndarray, shape (2,)
    """
    if isinstance(region, PatchCurve):
        region = Region.interior(region)
    x = np.asarray(x, dtype=float)
    m, _ = region_kernel_moment(region, x, params.alpha, tol)
    u = np.array([-m[1], m[0]])
    if include_image:
        mb, _ = region_kernel_moment(region, (x[0], -x[1]), params.alpha, tol)
        u -= np.array([mb[1], mb[0]])
    return u


# ---------------------------------------------------------------------------
# odd reduction


def clip_halfplane(vertices: FloatArray, axis: int, value: float, keep_below: bool) -> FloatArray:
    """Sutherland-Hodgman clip of a polygon against ``y[axis] <= value`` (or ``>=``)."""
    pts = np.asarray(vertices, dtype=float)
    sign = 1.0 if keep_below else -1.0
    s = sign * (value - pts[:, axis])
    out = []
    n = len(pts)
    for i in range(n):
        j = (i + 1) % n
        si, sj = s[i], s[j]
        if si >= 0.0:
            out.append(pts[i])
        if (si > 0.0 and sj < 0.0) or (si < 0.0 and sj > 0.0):
            lam = si / (si - sj)
            q = pts[i] + lam * (pts[j] - pts[i])
            q[axis] = value
            out.append(q)
    if len(out) < 3:
        return np.zeros((0, 2))
    return np.array(out)


def odd_decomposition(
    polygons: Sequence[tuple[ArrayLike, float]],
    x: ArrayLike,
    alpha: float,
    tol: float = 1e-12,
) -> VelocityDecomposition:
    """Velocity of an odd-in-``x1`` half-plane configuration and its parts.

    Parameters
    ----------
    polygons : sequence of (vertices, strength)
        Patches in the open quadrant; their reflections across both axes
        are implied.
    x : array_like, shape (2,)
        Point in the closed quadrant.
    alpha : float
    tol : float
        Absolute tolerance per polar moment.
    """
    x1, x2 = np.asarray(x, dtype=float)
    if x1 < 0.0 or x2 < 0.0:
        raise DomainError("the odd reduction is evaluated in the closed quadrant only")
    centers = [(x1, x2), (-x1, x2), (-x1, -x2), (x1, -x2)]
    k1 = np.zeros((2, 4))  # rows: y2 < x2 piece, y2 > x2 piece
    k2 = np.zeros((2, 4))  # rows: y1 < x1 piece, y1 > x1 piece
    err = 0.0
    for vertices, strength in polygons:
        verts = np.asarray(vertices, dtype=float)
        if shoelace_sign(verts) < 0:
            verts = verts[::-1]
        pieces = [
            (k1, 0, 1, clip_halfplane(verts, 1, x2, True)),
            (k1, 1, 1, clip_halfplane(verts, 1, x2, False)),
            (k2, 0, 0, clip_halfplane(verts, 0, x1, True)),
            (k2, 1, 0, clip_halfplane(verts, 0, x1, False)),
        ]
        for target, row, component, piece in pieces:
            if len(piece) == 0:
                continue
            for j, c in enumerate(centers):
                m, e = polygon_kernel_moment(piece, c, alpha, tol)
                target[row, j] += strength * m[component]
                err += abs(strength) * e
    s1 = np.array([1.0, -1.0, -1.0, 1.0])
    s2 = np.array([1.0, 1.0, -1.0, -1.0])
    u1_bad, u1_good = -(k1 @ s1)
    u2_bad, u2_good = k2 @ s2
    return VelocityDecomposition(
        u=np.array([u1_bad + u1_good, u2_bad + u2_good]),
        k1_terms=k1.sum(axis=0),
        k2_terms=k2.sum(axis=0),
        u1_bad=float(u1_bad),
        u1_good=float(u1_good),
        u2_bad=float(u2_bad),
        u2_good=float(u2_good),
        error_estimate=err,
    )


def shoelace_sign(vertices: FloatArray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return float(np.sign(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def velocity_odd_system(system: "PatchSystem", x: ArrayLike, tol: float = 1e-12) -> VelocityDecomposition:
    """Odd-reduced velocity of a system storing only its right-half patches.

    The patch interiors are the node polygons of the stored curves.
    """
    if system.symmetry_mode != "odd-x1" or not system.half_plane:
        raise ValueError("velocity_odd_system needs a half-plane system in odd-x1 mode")
    polys = [(c.nodes, c.strength) for c in system.patches]
    return odd_decomposition(polys, x, system.params.alpha, tol)


def velocity_csv_lines(points: ArrayLike, decompositions: Sequence[VelocityDecomposition]) -> list[str]:
    """CSV header plus one row per evaluated point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    return [CSV_HEADER] + [d.csv_row(p) for p, d in zip(pts, decompositions)]
