from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from helpers import circle_curve, square_curve
from sqgpatch.errors import GeometryError
from sqgpatch.geometry import (
    PatchCurve,
    Region,
    axis_panels,
    build_triangle_A,
    curve_hausdorff,
    format_curve,
    hausdorff_distance,
    interpolant_area,
    interpolant_min,
    panel_arc_lengths,
    parse_curve,
    polygon_area,
    read_curve,
    region_distance,
    reparametrize_constant_speed,
    rounded_rectangle,
    write_curve,
)

# arc length of the ellipse x = 2 cos t, y = sin t (mpmath quadrature, 40 digits)
ELLIPSE_PERIMETER = 9.6884482205476761984
# n/2 sin(2 pi / n) for n = 4096
POLYGON_4096_AREA = 3.141591421511199974


# ---------------------------------------------------------------------------
# PatchCurve


def test_curve_invariants():
    c = circle_curve(64)
    seg = np.hypot(*np.diff(np.vstack([c.nodes, c.nodes[:1]]), axis=0).T)
    assert c.arc_length == pytest.approx(seg.sum(), rel=1e-12)
    assert c.ccw and polygon_area(c) > 0
    cw = PatchCurve(c.nodes[::-1])
    assert not cw.ccw and polygon_area(cw) < 0


def test_curve_drops_repeated_closing_node():
    c = circle_curve(16)
    closed = PatchCurve(np.vstack([c.nodes, c.nodes[:1]]))
    assert len(closed) == 16


@pytest.mark.parametrize(
    "nodes",
    [
        np.array([[0, 0], [1, 0], [1, 1], [0, 1]]),
        np.array([[0, 0], [1, 0], [1, 0], [2, 0], [2, 1], [1, 1], [0.5, 1], [0, 1]]),
        np.array([[0, 0], [2, 2], [2, 0], [1.5, 0], [1, 0], [0, 2], [0, 1.5], [0, 1]]),
    ],
    ids=["too-few-nodes", "repeated-node", "self-intersecting"],
)
def test_curve_rejects_invalid(nodes):
    with pytest.raises(GeometryError):
        PatchCurve(nodes)


def test_curve_rejects_zero_area():
    nodes = np.column_stack([np.linspace(0, 1, 8), np.zeros(8)])
    nodes = np.vstack([nodes, nodes[-2:0:-1]])
    with pytest.raises(GeometryError):
        PatchCurve(nodes, check=False)


def test_curve_text_roundtrip(tmp_path):
    c = circle_curve(32, 0.7, (0.3, 2.0), strength=-2.5)
    text = format_curve(c)
    assert text.splitlines()[0] == "strength -2.5"
    back = parse_curve(text)
    assert back.strength == -2.5
    assert np.array_equal(back.nodes, c.nodes)
    path = write_curve(tmp_path / "c.curve", c)
    assert np.array_equal(read_curve(path).nodes, c.nodes)


def test_parse_curve_rejects_missing_header():
    with pytest.raises(GeometryError):
        parse_curve("0 0\n1 0\n")


# ---------------------------------------------------------------------------
# reparametrization


def test_reparam_regular_polygon_is_fixed():
    c = circle_curve(64)
    r = reparametrize_constant_speed(c, 64)
    assert np.max(np.abs(r.nodes - c.nodes)) < 1e-10


def _nonuniform_square(x0: float, y0: float, n: int = 200) -> PatchCurve:
    # three times as many parameter values on the first half of the perimeter
    s = np.concatenate([np.linspace(0.0, 2.0, 3 * n // 4, endpoint=False), np.linspace(2.0, 4.0, n // 4, endpoint=False)])
    corners = np.array([[0, 0], [1, 0], [1, 1], [0, 1], [0, 0]], dtype=float)
    k = np.floor(s).astype(int)
    pts = corners[k] + (s - k)[:, None] * (corners[k + 1] - corners[k])
    return PatchCurve(pts + [x0, y0])


@pytest.mark.parametrize("offset", [(0.0, 0.0), (2.0, 3.0)], ids=["on-axes", "off-axes"])
def test_reparam_square_equal_spacing(offset):
    c = _nonuniform_square(*offset)
    r = reparametrize_constant_speed(c, 400, interpolation="linear")
    assert len(r) == 400
    assert np.allclose(r.segment_lengths, 0.01, atol=1e-12)
    assert polygon_area(r) == pytest.approx(1.0, abs=1e-12)


def test_reparam_ellipse_equal_arc_length():
    t = 2.0 * np.pi * np.arange(512) / 512
    c = PatchCurve(np.column_stack([2.0 * np.cos(t), np.sin(t)]))
    r = reparametrize_constant_speed(c, 512)
    # arc length of the exact ellipse between consecutive new nodes
    angle = np.unwrap(np.arctan2(r.nodes[:, 1], r.nodes[:, 0] / 2.0))
    angle = np.append(angle, angle[0] + 2.0 * np.pi)
    speed = lambda a: math.hypot(2.0 * math.sin(a), math.cos(a))
    arcs = np.array([quad(speed, a, b, epsabs=1e-15, epsrel=1e-13)[0] for a, b in zip(angle[:-1], angle[1:])])
    target = ELLIPSE_PERIMETER / 512
    assert np.max(np.abs(arcs / target - 1.0)) < 1e-6


def test_reparam_linear_wavy_curve_is_idempotent():
    # each linear pass cuts corners, so the sweeps contract slowly (about 0.4 per sweep)
    rng = np.random.default_rng(5)
    gaps = rng.uniform(0.5, 1.5, 73)
    theta = 2.0 * np.pi * np.cumsum(gaps) / gaps.sum()
    r = 1.0 + 0.28 * np.cos(4.0 * theta + 1.0)
    c = PatchCurve(np.column_stack([r * np.cos(theta), r * np.sin(theta)]))
    once = reparametrize_constant_speed(c, 19, "linear", check=False)
    twice = reparametrize_constant_speed(once, 19, "linear", check=False)
    assert np.max(np.abs(once.nodes - twice.nodes)) <= 1e-12


def test_reparam_keeps_wall_run_endpoints():
    nodes = rounded_rectangle(0.5, 2.0, 0.0, 1.0, 0.1, 0.05)
    c = PatchCurve(nodes)
    flags = axis_panels(c.nodes)
    assert flags.any()
    r = reparametrize_constant_speed(c, len(c) + 7)
    on_wall = r.nodes[r.nodes[:, 1] == 0.0]
    wall = c.nodes[c.nodes[:, 1] == 0.0]
    assert on_wall[:, 0].min() == wall[:, 0].min()
    assert on_wall[:, 0].max() == wall[:, 0].max()


def test_reparam_rejects_small_n():
    with pytest.raises(GeometryError):
        reparametrize_constant_speed(circle_curve(16), 4)


# ---------------------------------------------------------------------------
# areas and interpolants


def test_polygon_area_squares():
    assert polygon_area(square_curve(0.0, 0.0)) == pytest.approx(1.0, abs=1e-15)
    assert polygon_area(square_curve(0.0, 0.0, ccw=False)) == pytest.approx(-1.0, abs=1e-15)


def test_polygon_area_fine_polygon():
    c = circle_curve(4096)
    assert polygon_area(c) == pytest.approx(POLYGON_4096_AREA, abs=1e-12)
    assert abs(polygon_area(c) - math.pi) < 1e-5


def test_spline_area_and_min_on_circle():
    c = circle_curve(128, 1.0, (3.0, 0.0))
    # cubic spline error is fourth order in the spacing
    assert interpolant_area(c) == pytest.approx(math.pi, abs=1e-6)
    assert abs(interpolant_area(c) - math.pi) < abs(polygon_area(c) - math.pi) * 1e-3
    assert interpolant_min(c, axis=0) == pytest.approx(2.0, abs=1e-6)
    assert interpolant_min(c, axis=1) == pytest.approx(-1.0, abs=1e-6)
    assert panel_arc_lengths(c.panels()).sum() == pytest.approx(2.0 * math.pi, abs=1e-6)


def test_rounded_rectangle_shape():
    nodes = rounded_rectangle(0.075, 3.5, 0.0, 3.5, 0.0125, 0.015)
    c = PatchCurve(nodes)
    assert c.ccw
    lengths = c.segment_lengths
    assert lengths.min() >= 0.015 * 0.97 and lengths.max() <= 0.015 * 1.03
    assert nodes[:, 1].min() == 0.0 and nodes[:, 0].min() == 0.075
    assert np.sum(nodes[:, 1] == 0.0) > 100


# ---------------------------------------------------------------------------
# distances


def test_hausdorff_examples():
    c = circle_curve(256)
    assert hausdorff_distance(c, c) == 0.0
    a = square_curve(0.0, 0.0)
    b = PatchCurve(a.nodes + [0.5, 0.0])
    assert hausdorff_distance(a, b) == pytest.approx(0.5, abs=1e-15)
    big = circle_curve(2048, 1.1)
    assert hausdorff_distance(circle_curve(2048), big) == pytest.approx(0.1, abs=1e-4)
    assert curve_hausdorff(circle_curve(2048), big) == pytest.approx(0.1, abs=1e-4)


def test_hausdorff_rejects_empty():
    with pytest.raises(GeometryError):
        hausdorff_distance(np.zeros((0, 2)), circle_curve(8))


def test_region_distance_complement_to_corner():
    omega = PatchCurve(np.array([[0.01, 0.0], [2.0, 0.0], [4.0, 0.0], [4.0, 2.0], [4.0, 4.0], [2.0, 4.0], [0.01, 4.0], [0.01, 2.0]]))
    assert region_distance(Region.complement(omega), Region.corner(0.03)) == pytest.approx(0.02, abs=1e-14)


def test_region_distance_touching_and_gap():
    assert region_distance(Region.rectangle(0, 1, 0, 1), Region.rectangle(1, 2, 0.5, 1.5)) == 0.0
    assert region_distance(Region.rectangle(0, 1, 0, 1), Region.rectangle(1.3, 2.3, 0, 1)) == pytest.approx(0.3, abs=1e-15)
    # corner region inside a big patch touching its boundary point
    big = PatchCurve(np.array([[0.02, 0.0], [1, 0], [3, 0], [3, 1], [3, 3], [1, 3], [0.02, 3], [0.02, 1]]))
    assert region_distance(Region.complement(big), Region.corner(0.02)) == 0.0


def test_region_validation():
    with pytest.raises(GeometryError):
        Region.rectangle(1, 0, 0, 1)
    with pytest.raises(GeometryError):
        Region.corner(2.0)
    with pytest.raises(GeometryError):
        Region.disk((0, 0), 0.0)
    assert Region.disk((0, 0), 2.0).area == pytest.approx(4 * math.pi)


def test_triangle_A_examples():
    tri = build_triangle_A((0.0, 0.0))
    assert np.array_equal(tri.polygon(), np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]))
    assert tri.area == pytest.approx(0.5, abs=1e-15)
    shifted = build_triangle_A((0.03, 0.0))
    assert shifted.contains([(0.5, 0.2)])[0]
    assert not shifted.contains([(0.5, 0.6)])[0]
    with pytest.raises(GeometryError):
        build_triangle_A((-0.1, 0.0))
