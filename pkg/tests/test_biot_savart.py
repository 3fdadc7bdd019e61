from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.spatial import ConvexHull

from helpers import circle_curve, square_curve
from sqgpatch.biot_savart import (
    CSV_HEADER,
    KernelParams,
    build_sources,
    clip_halfplane,
    evaluate_panels,
    kernel_terms,
    odd_decomposition,
    polygon_kernel_moment,
    velocity_boundary_integral,
    velocity_csv_lines,
    velocity_odd_system,
    velocity_region_area,
)
from sqgpatch.bounds import holder_constant
from sqgpatch.errors import DomainError, SingularEvaluationError
from sqgpatch.evolution import PatchSystem
from sqgpatch.geometry import PatchCurve, Region

# K11..K14, K21..K24 at alpha = 0.1, x = (1, 1), y = (2, 3) (mpmath, 40 digits)
KERNEL_TERMS_REFERENCE = np.array([
    0.34053596900831384134, 0.11903983277863105235, 0.11596474618843128504, 0.17724181057059740893,
    0.17026798450415692067, 0.17855974916794657853, 0.086973559641323463776, 0.044310452642649352232,
])
# velocity of the unit square (2, 3)^2 at (0.5, 0.5), alpha = 0.1 (mpmath double quadrature)
SQUARE_VELOCITY_REFERENCE = np.array([-0.20360322108364339808, 0.20360322108364339808])


def _dense_polygon(vertices: np.ndarray, per_edge: int = 8) -> PatchCurve:
    s = np.arange(per_edge) / per_edge
    n = len(vertices)
    pts = np.concatenate([vertices[i] + s[:, None] * (vertices[(i + 1) % n] - vertices[i]) for i in range(n)])
    return PatchCurve(pts)


def _rectangle(x0, x1, y0, y1, per_edge=16) -> PatchCurve:
    return _dense_polygon(np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]]), per_edge)


# ---------------------------------------------------------------------------
# kernel terms


def test_kernel_terms_unit_displacements():
    k = kernel_terms((1.0, 1.0), (1.0, 2.0), KernelParams(0.0))
    assert k[0] == pytest.approx(1.0, abs=1e-15)
    k = kernel_terms((1.0, 1.0), (2.0, 1.0), KernelParams(0.0))
    assert k[4] == pytest.approx(1.0, abs=1e-15)
    assert k[0] == 0.0


def test_kernel_terms_high_precision():
    k = kernel_terms((1.0, 1.0), (2.0, 3.0), KernelParams(0.1))
    assert np.max(np.abs(k - KERNEL_TERMS_REFERENCE)) < 1e-14


def test_kernel_terms_broadcast_and_singular():
    ys = np.array([[2.0, 3.0], [1.0, 2.0]])
    k = kernel_terms((1.0, 1.0), ys, KernelParams(0.1))
    assert k.shape == (2, 8)
    assert np.allclose(k[0], KERNEL_TERMS_REFERENCE, atol=1e-14)
    with pytest.raises(SingularEvaluationError):
        kernel_terms((1.0, 1.0), (1.0, 1.0), KernelParams(0.1))


def test_kernel_params_validation():
    with pytest.raises(ValueError):
        KernelParams(0.5)
    with pytest.raises(ValueError):
        KernelParams(-0.1)
    with pytest.raises(ValueError):
        KernelParams(0.1, -1.0)


# ---------------------------------------------------------------------------
# area evaluator


def test_area_disk_exterior():
    u = velocity_region_area(Region.disk((0.0, 10.0), 1.0), (2.0, 10.0), KernelParams(0.0))
    assert np.allclose(u, [0.0, -math.pi / 2], atol=1e-9)


def test_area_square_matches_reference():
    sq = Region.rectangle(2.0, 3.0, 2.0, 3.0)
    u = velocity_region_area(sq, (0.5, 0.5), KernelParams(0.1))
    assert np.allclose(u, SQUARE_VELOCITY_REFERENCE, rtol=1e-9, atol=0)


def test_area_wall_condition():
    sq = Region.rectangle(0.5, 1.5, 0.2, 1.0)
    for x1 in (-1.0, 0.3, 1.0, 2.5):
        u = velocity_region_area(sq, (x1, 0.0), KernelParams(0.2), include_image=True)
        assert abs(u[1]) < 1e-10


# ---------------------------------------------------------------------------
# contour evaluator


def test_boundary_disk_exterior_and_interior():
    disk = circle_curve(2048, 1.0, (0.0, 10.0))
    u = velocity_boundary_integral(disk, (2.0, 10.0), KernelParams(0.0))
    assert np.allclose(u, [0.0, -math.pi / 2], atol=1e-6 * math.pi / 2)
    u = velocity_boundary_integral(disk, (0.5, 10.0), KernelParams(0.0))
    assert np.allclose(u, [0.0, -math.pi / 2], atol=1e-6)


def test_boundary_square_matches_reference():
    sq = square_curve(2.0, 2.0, per_edge=8)
    u = velocity_boundary_integral(sq, (0.5, 0.5), KernelParams(0.1), interpolation="linear")
    # far panels use a two-point rule, good to about 1e-8 relative
    assert np.allclose(u, SQUARE_VELOCITY_REFERENCE, rtol=1e-7, atol=0)


def test_boundary_matches_area_on_convex_polygon():
    rng = np.random.default_rng(7)
    pts = rng.uniform(-1.0, 1.0, (12, 2))
    hull = pts[ConvexHull(pts).vertices]
    curve = _dense_polygon(hull)
    params = KernelParams(0.05)
    for x in ((2.0, 0.3), (-1.5, -1.2), (0.1, 2.2)):
        ub = velocity_boundary_integral(curve, x, params, interpolation="linear")
        ua = velocity_region_area(curve, x, params)
        assert np.linalg.norm(ub - ua) < 1e-5 * np.linalg.norm(ua)


def test_boundary_on_curve_targets_are_finite():
    c = circle_curve(64)
    for a in (0.0, 0.1, 0.4):
        u = velocity_boundary_integral(c, c.nodes[:5], KernelParams(a))
        assert np.all(np.isfinite(u))
    # solid body rotation of the disk on its own boundary
    u = velocity_boundary_integral(c, c.nodes, KernelParams(0.0))
    expected = math.pi * np.column_stack([c.nodes[:, 1], -c.nodes[:, 0]])
    assert np.max(np.abs(u - expected)) < 1e-5


def test_boundary_wall_condition():
    c = circle_curve(128, 0.5, (1.0, 1.0))
    xs = np.column_stack([np.linspace(-2, 3, 11), np.zeros(11)])
    u = velocity_boundary_integral(c, xs, KernelParams(0.15), include_image=True)
    assert np.max(np.abs(u[:, 1])) < 1e-12


def test_boundary_divergence_free():
    c = circle_curve(256, 1.0)
    q, w = np.polynomial.legendre.leggauss(16)
    for center in ((1.8, 0.3), (0.0, 0.0)):
        half = 0.05
        flux = 0.0
        for normal, fixed_axis, sign in (((1, 0), 0, 1), ((-1, 0), 0, -1), ((0, 1), 1, 1), ((0, -1), 1, -1)):
            s = center[1 - fixed_axis] + half * q
            pts = np.empty((16, 2))
            pts[:, fixed_axis] = center[fixed_axis] + sign * half
            pts[:, 1 - fixed_axis] = s
            u = velocity_boundary_integral(c, pts, KernelParams(0.1))
            flux += half * np.sum(w * (u @ np.array(normal, dtype=float)))
        assert abs(flux) < 1e-6 * 8 * half


def test_regularization_changes_near_field_only():
    c = circle_curve(256, 1.0)
    exact = velocity_boundary_integral(c, (3.0, 0.0), KernelParams(0.1))
    mollified = velocity_boundary_integral(c, (3.0, 0.0), KernelParams(0.1, 1e-3))
    assert np.allclose(exact, mollified, rtol=1e-6)


def test_holder_bound_on_square():
    alpha = 0.1
    sq = square_curve(0.0, 0.0, per_edge=16)
    rng = np.random.default_rng(3)
    x = rng.uniform(-1.0, 2.0, (1000, 2))
    z = x + rng.normal(scale=0.3, size=(1000, 2))
    params = KernelParams(alpha)
    ux = velocity_boundary_integral(sq, x, params, interpolation="linear")
    uz = velocity_boundary_integral(sq, z, params, interpolation="linear")
    bound = holder_constant(alpha, 1.0, 1.0)
    ratio = np.hypot(*(ux - uz).T) / np.hypot(*(x - z).T) ** (1 - 2 * alpha)
    assert ratio.max() <= bound


def test_empty_panel_set():
    panels = build_sources([])
    assert np.array_equal(evaluate_panels(panels, [(1.0, 2.0)], KernelParams(0.1)), np.zeros((1, 2)))


# ---------------------------------------------------------------------------
# odd reduction


def test_clip_halfplane():
    sq = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    below = clip_halfplane(sq, 1, 0.25, True)
    assert abs(0.5 * np.sum(below[:, 0] * np.roll(below[:, 1], -1) - np.roll(below[:, 0], -1) * below[:, 1])) == pytest.approx(0.25)
    assert len(clip_halfplane(sq, 0, -1.0, True)) == 0


def test_polygon_moment_of_zero_area_sliver():
    # collinear vertices seen end-on from just below
    sliver = np.column_stack([np.linspace(0.3, 0.9, 9), np.full(9, 1e-300)])
    moment, error = polygon_kernel_moment(sliver, (-0.74, -1e-300), 0.16)
    assert np.abs(moment).max() < 1e-250 and error < 1e-250


@pytest.mark.parametrize(
    "box, alpha, x",
    [
        ((0.3029385698537356, 0.9220888439843598, 1e-300, 0.8877792225262595), 0.16425326857885153,
         (0.7417221436831132, 1e-300)),
        ((1.0, 2.0, 0.0, 0.9307102654003436), 0.2596806763948271, (1.9255727419738107, 1e-10)),
    ],
)
def test_odd_split_with_edges_seen_end_on(box, alpha, x):
    # targets a hair above the wall see the clipped slivers almost edge-on
    d = velocity_odd_system(_odd_system(_rectangle(*box), alpha), x)
    assert np.all(np.isfinite(d.u))
    assert abs(d.u[0] - (d.u1_bad + d.u1_good)) <= 1e-10 * max(1.0, np.abs(d.u).max())


def _odd_system(curve: PatchCurve, alpha: float) -> PatchSystem:
    return PatchSystem((curve,), KernelParams(alpha), "odd-x1", half_plane=True)


def test_odd_four_image_identity():
    rect = _rectangle(0.3, 1.2, 0.1, 0.9)
    alpha = 0.07
    params = KernelParams(alpha)
    x = (0.2, 0.5)
    d = velocity_odd_system(_odd_system(rect, alpha), x, tol=1e-12)
    v = rect.nodes
    images = [(v, 1.0), (v * [-1, 1], -1.0), (v * [1, -1], -1.0), (-v, 1.0)]
    total = sum(w * velocity_region_area(PatchCurve(p), x, params, tol=1e-12) for p, w in images)
    assert np.allclose(d.u, total, atol=4e-11)
    panels = build_sources([rect], wall_image=True, odd_x1=True, interpolation="linear")
    contour = evaluate_panels(panels, [x], params)[0]
    assert np.allclose(d.u, contour, atol=1e-9)


def test_odd_split_consistency():
    rect = _rectangle(0.3, 1.2, 0.0, 0.9)
    system = _odd_system(rect, 0.05)
    rng = np.random.default_rng(11)
    for x in rng.uniform(0.0, 1.5, (100, 2)):
        d = velocity_odd_system(system, x)
        scale = max(1.0, np.abs(d.u).max())
        assert abs(d.u[0] - (d.u1_bad + d.u1_good)) <= 1e-10 * scale
        assert abs(d.u[1] - (d.u2_bad + d.u2_good)) <= 1e-10 * scale


def test_odd_u1_vanishes_on_axis_and_is_negative_near_corner():
    eps = 0.05
    rect = _rectangle(2 * eps, 3.0, 0.0, 3.0, per_edge=32)
    system = _odd_system(rect, 0.03)
    assert abs(velocity_odd_system(system, (0.0, 0.7)).u[0]) < 1e-10
    assert velocity_odd_system(system, (0.15, 0.05)).u[0] < 0.0


def test_odd_rejects_points_outside_quadrant():
    with pytest.raises(DomainError):
        odd_decomposition([(np.array([[1, 1], [2, 1], [2, 2], [1, 2]]), 1.0)], (-0.1, 0.5), 0.1)
    with pytest.raises(ValueError):
        velocity_odd_system(PatchSystem((circle_curve(16, 0.5, (2, 2)),), KernelParams(0.1)), (1, 1))


def test_csv_lines():
    rect = _rectangle(0.3, 1.2, 0.0, 0.9)
    system = _odd_system(rect, 0.05)
    pts = np.array([[0.5, 0.5], [1.0, 0.2]])
    lines = velocity_csv_lines(pts, [velocity_odd_system(system, p) for p in pts])
    assert lines[0] == CSV_HEADER
    assert len(lines) == 3
    assert all(len(line.split(",")) == 8 for line in lines)
