"""Closed curves, polygons and planar regions.

A :class:`PatchCurve` stores the boundary of one patch as an ordered list of
nodes.  Two interpolants of the nodes are supported: the polygon itself
(``"linear"``) and a periodic cubic spline in the chord-length parameter
(``"spline"``).  Both are exposed in a common panel form, one cubic per
segment in the local parameter ``t`` in ``[0, 1]``,

    z(t) = a0 + a1 t + a2 t**2 + a3 t**3,

so that quadrature code never needs to know which interpolant is in use.
"""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field
from pathlib import Path
from typing import Literal, Union

import numpy as np
import shapely
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import CubicSpline
from scipy.spatial.distance import directed_hausdorff

from .errors import GeometryError
from .quadrature import gauss_legendre_unit

FloatArray = NDArray[np.float64]
Interpolation = Literal["spline", "linear"]

MIN_NODES = 8
# fixed-point resampling: stop once a sweep moves nodes by less than this (relative)
RESAMPLE_TOL = 1e-13
MAX_RESAMPLE_SWEEPS = 64


def _as_points(points: ArrayLike) -> FloatArray:
    pts = np.array(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise GeometryError(f"expected an (n, 2) array of points, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise GeometryError("points must be finite")
    return pts


def shoelace_area(points: FloatArray) -> float:
    """Signed area of the closed polygon through ``points``."""
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


@dataclass(frozen=True, eq=False)
class PatchCurve:
    """Closed boundary curve of one patch.

    Parameters
    ----------
    nodes : array_like, shape (n, 2)
        Ordered boundary nodes; the curve closes implicitly.  A repeated
        final node equal to the first is dropped.
    strength : float
        Signed patch weight.
    check : bool
        Validate node count, distinct consecutive nodes and simplicity.
        Evolution code passes ``False`` and reports self-intersections as
        events instead.

    Attributes
    ----------
    ccw : bool
        True when the shoelace area is positive.
    arc_length : float
        Perimeter of the polygon.
    """

    nodes: FloatArray
    strength: float = 1.0
    check: InitVar[bool] = True
    ccw: bool = field(init=False)
    arc_length: float = field(init=False)

    def __post_init__(self, check: bool) -> None:
        pts = _as_points(self.nodes)
        if len(pts) > 1 and np.array_equal(pts[0], pts[-1]):
            pts = pts[:-1]
        if len(pts) < MIN_NODES:
            raise GeometryError(f"a curve needs at least {MIN_NODES} nodes, got {len(pts)}")
        seg = np.roll(pts, -1, axis=0) - pts
        lengths = np.hypot(seg[:, 0], seg[:, 1])
        if np.any(lengths == 0.0):
            raise GeometryError("consecutive nodes must be distinct")
        if check and not shapely.LinearRing(pts).is_simple:
            raise GeometryError("curve is not simple")
        area = shoelace_area(pts)
        if area == 0.0:
            raise GeometryError("curve encloses zero area")
        pts.setflags(write=False)
        object.__setattr__(self, "nodes", pts)
        object.__setattr__(self, "strength", float(self.strength))
        object.__setattr__(self, "ccw", area > 0.0)
        object.__setattr__(self, "arc_length", float(lengths.sum()))

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def segment_lengths(self) -> FloatArray:
        seg = np.roll(self.nodes, -1, axis=0) - self.nodes
        return np.hypot(seg[:, 0], seg[:, 1])

    def with_nodes(self, nodes: ArrayLike, check: bool = True) -> "PatchCurve":
        """Return a curve with the same strength and new nodes."""
        return PatchCurve(nodes, self.strength, check=check)

    def panels(self, interpolation: Interpolation = "spline") -> FloatArray:
        """Cubic panel coefficients, shape ``(n, 4, 2)``; cached per interpolant."""
        cache = self.__dict__.setdefault("_panel_cache", {})
        if interpolation not in cache:
            coef = panel_coefficients(self.nodes, interpolation)
            coef.setflags(write=False)
            cache[interpolation] = coef
        return cache[interpolation]

    def contains(self, points: ArrayLike) -> NDArray[np.bool_]:
        """Strict point-in-polygon test for the node polygon."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return shapely.contains_xy(shapely.Polygon(self.nodes), pts[:, 0], pts[:, 1])


def panel_coefficients(nodes: ArrayLike, interpolation: Interpolation = "spline") -> FloatArray:
    """Power-basis coefficients of the closed interpolant through ``nodes``.

    With ``"spline"``, panels whose two end nodes lie on the same coordinate
    axis are kept straight and the arcs between such runs are interpolated
    by open not-a-knot splines.  Straight runs are wall or mirror segments
    in the half-plane and odd settings; splitting the spline there keeps
    ringing from the contact points off the axis.

    Returns
    -------
    ndarray, shape (n, 4, 2)
        ``coef[j, k]`` multiplies ``t**k`` on the panel from node ``j`` to
        node ``j + 1``.
    """
    pts = _as_points(nodes)
    nxt = np.roll(pts, -1, axis=0)
    coef = np.zeros((len(pts), 4, 2))
    coef[:, 0] = pts
    if interpolation == "linear":
        coef[:, 1] = nxt - pts
        return coef
    if interpolation != "spline":
        raise ValueError(f"unknown interpolation {interpolation!r}")
    seg = np.hypot(*(nxt - pts).T)
    n = len(pts)
    on_axis = axis_panels(pts)
    if not on_axis.any():
        s = np.concatenate([[0.0], np.cumsum(seg)])
        spline = CubicSpline(s, np.vstack([pts, pts[:1]]), bc_type="periodic", axis=0)
        _store_spline(coef, np.arange(n), spline.c, seg)
        return coef
    coef[on_axis, 1] = nxt[on_axis] - pts[on_axis]
    # the free arcs between straight runs are open splines
    first = int(np.flatnonzero(on_axis)[-1]) + 1
    order = (first + np.arange(n)) % n
    run: list[int] = []
    for p in list(order) + [None]:
        if p is not None and not on_axis[p]:
            run.append(int(p))
            continue
        if run:
            idx = np.array(run)
            knots = np.vstack([pts[idx], nxt[idx[-1:]]])
            if len(idx) == 1:
                coef[idx, 1] = nxt[idx] - pts[idx]
            else:
                s = np.concatenate([[0.0], np.cumsum(seg[idx])])
                spline = CubicSpline(s, knots, bc_type="not-a-knot", axis=0)
                _store_spline(coef, idx, spline.c, seg[idx])
            run = []
    return coef


def _store_spline(coef: FloatArray, idx: np.ndarray, c: FloatArray, seg: FloatArray) -> None:
    h = seg[:, None]
    coef[idx, 1] = c[2] * h
    coef[idx, 2] = c[1] * h**2
    coef[idx, 3] = c[0] * h**3


def eval_panels(coef: FloatArray, t: ArrayLike) -> FloatArray:
    """Evaluate every panel at local parameters ``t``; shape ``(n, len(t), 2)``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    powers = np.stack([np.ones_like(t), t, t**2, t**3], axis=0)
    return np.einsum("pkd,km->pmd", coef, powers)


def eval_panel_derivative(coef: FloatArray, t: ArrayLike) -> FloatArray:
    """Derivative ``dz/dt`` of every panel at ``t``; shape ``(n, len(t), 2)``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    powers = np.stack([np.zeros_like(t), np.ones_like(t), 2.0 * t, 3.0 * t**2], axis=0)
    return np.einsum("pkd,km->pmd", coef, powers)


def panel_arc_lengths(coef: FloatArray, order: int = 16) -> FloatArray:
    """Arc length of each panel by Gauss-Legendre quadrature of ``|z'|``."""
    t, w = gauss_legendre_unit(order)
    d = eval_panel_derivative(coef, t)
    return np.hypot(d[..., 0], d[..., 1]) @ w


def interpolant_area(curve: PatchCurve, interpolation: Interpolation = "spline") -> float:
    """Signed area enclosed by the interpolant (exact for cubic panels)."""
    coef = curve.panels(interpolation)
    t, w = gauss_legendre_unit(4)
    z = eval_panels(coef, t)
    d = eval_panel_derivative(coef, t)
    integrand = z[..., 0] * d[..., 1] - z[..., 1] * d[..., 0]
    return 0.5 * float(np.sum(integrand @ w))


def interpolant_min(curve: PatchCurve, axis: int = 0, interpolation: Interpolation = "spline") -> float:
    """Minimum of one coordinate over the interpolant, found panel by panel."""
    coef = curve.panels(interpolation)[:, :, axis]
    a1, a2, a3 = coef[:, 1], coef[:, 2], coef[:, 3]
    candidates = [np.zeros(len(coef)), np.ones(len(coef))]
    # stationary points of the cubic: 3 a3 t^2 + 2 a2 t + a1 = 0
    qa, qb, qc = 3.0 * a3, 2.0 * a2, a1
    disc = qb * qb - 4.0 * qa * qc
    ok = disc >= 0.0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        quad = np.abs(qa) > 1e-300
        r1 = np.where(quad, (-qb - sq) / (2.0 * qa), -qc / qb)
        r2 = np.where(quad, (-qb + sq) / (2.0 * qa), -qc / qb)
    for r in (r1, r2):
        r = np.where(ok & np.isfinite(r), np.clip(r, 0.0, 1.0), 0.0)
        candidates.append(r)
    tt = np.stack(candidates, axis=1)
    vals = coef[:, :1] + coef[:, 1:2] * tt + coef[:, 2:3] * tt**2 + coef[:, 3:4] * tt**3
    return float(vals.min())


def axis_panels(nodes: ArrayLike) -> NDArray[np.bool_]:
    """Panels whose two end nodes lie on the same coordinate axis."""
    pts = _as_points(nodes)
    nxt = np.roll(pts, -1, axis=0)
    return ((pts[:, 1] == 0.0) & (nxt[:, 1] == 0.0)) | ((pts[:, 0] == 0.0) & (nxt[:, 0] == 0.0))


def _sample_by_arc_length(coef: FloatArray, lengths: FloatArray, targets: FloatArray, spline: bool) -> FloatArray:
    """Points at arc-length positions ``targets`` along consecutive panels ``coef``."""
    cumulative = np.concatenate([[0.0], np.cumsum(lengths)])
    panel = np.clip(np.searchsorted(cumulative, targets, side="right") - 1, 0, len(coef) - 1)
    local = targets - cumulative[panel]
    c = coef[panel]
    t = np.clip(local / lengths[panel], 0.0, 1.0)
    if spline:
        gt, gw = gauss_legendre_unit(16)
        for _ in range(12):
            tau = t[:, None] * gt[None, :]
            d = c[:, 1, None, :] + 2.0 * c[:, 2, None, :] * tau[..., None] + 3.0 * c[:, 3, None, :] * tau[..., None] ** 2
            partial = t * (np.hypot(d[..., 0], d[..., 1]) @ gw)
            dt_ = c[:, 1] + 2.0 * c[:, 2] * t[:, None] + 3.0 * c[:, 3] * t[:, None] ** 2
            speed = np.hypot(dt_[:, 0], dt_[:, 1])
            step = (partial - local) / speed
            t = np.clip(t - step, 0.0, 1.0)
            if np.max(np.abs(step)) < 1e-15:
                break
    tt = t[:, None]
    return c[:, 0] + c[:, 1] * tt + c[:, 2] * tt**2 + c[:, 3] * tt**3


def _allocate(n: int, lengths: FloatArray) -> NDArray[np.int_]:
    """Split ``n`` panels among pieces proportionally to length, at least one each."""
    share = n * lengths / lengths.sum()
    counts = np.maximum(1, np.floor(share).astype(int))
    while counts.sum() > n:
        k = int(np.argmax(np.where(counts > 1, counts - share, -np.inf)))
        counts[k] -= 1
    while counts.sum() < n:
        counts[int(np.argmax(share - counts))] += 1
    return counts


def _resample_once(curve: PatchCurve, n: int, interpolation: Interpolation) -> FloatArray:
    """One pass of arc-length resampling along the interpolant of ``curve``."""
    coef = curve.panels(interpolation)
    lengths = panel_arc_lengths(coef)
    total = float(lengths.sum())
    if not total > 0.0:
        raise GeometryError("curve has zero arc length")
    spline = interpolation == "spline"
    flags = axis_panels(curve.nodes)
    if not flags.any() or flags.all():
        new = _sample_by_arc_length(coef, lengths, total * np.arange(n) / n, spline)
        new[0] = curve.nodes[0]
        return new
    m = len(flags)
    start = int(np.flatnonzero(flags != np.roll(flags, 1))[0])
    order = (start + np.arange(m)) % m
    breaks = [0] + [k for k in range(1, m) if flags[order[k]] != flags[order[k - 1]]] + [m]
    pieces = [order[a:b] for a, b in zip(breaks[:-1], breaks[1:])]
    piece_len = np.array([lengths[p].sum() for p in pieces])
    counts = _allocate(n, piece_len)
    out = []
    for idx, L, k in zip(pieces, piece_len, counts):
        pts = _sample_by_arc_length(coef[idx], lengths[idx], L * np.arange(k) / k, spline)
        pts[0] = curve.nodes[idx[0]]
        out.append(pts)
    return np.concatenate(out)


def reparametrize_constant_speed(
    curve: PatchCurve,
    n: int,
    interpolation: Interpolation = "spline",
    check: bool = True,
) -> PatchCurve:
    """Resample a curve at ``n`` nodes equally spaced in arc length.

    Arc length is measured along the chosen interpolant and the first node
    is kept in place, so the map commutes with reflections of the plane.
    The pass is repeated until the nodes are equally spaced along their own
    interpolant (a fixed point to roundoff), which makes the map idempotent.
    When the curve has runs of panels on a coordinate axis (wall or mirror
    contact), the ends of those runs are kept as nodes and the spacing is
    constant within each run and within each arc between runs.

    Parameters
    ----------
    curve : PatchCurve
        Input curve.
    n : int
        Number of output nodes, at least 8.
    interpolation : {"spline", "linear"}
        Interpolant along which arc length is measured.
    check : bool
        Validate the returned curve.
    """
    if n < MIN_NODES:
        raise GeometryError(f"n must be at least {MIN_NODES}")
    nodes = _resample_once(curve, n, interpolation)
    scale = max(1.0, float(np.abs(nodes).max()))
    for _ in range(MAX_RESAMPLE_SWEEPS):
        again = _resample_once(PatchCurve(nodes, curve.strength, check=False), n, interpolation)
        moved = float(np.abs(again - nodes).max())
        nodes = again
        if moved <= RESAMPLE_TOL * scale:
            break
    return PatchCurve(nodes, curve.strength, check=check)


def polygon_area(curve: PatchCurve) -> float:
    """Shoelace area of the node polygon, positive iff counter-clockwise."""
    return shoelace_area(curve.nodes)


PointsOrCurve = Union[PatchCurve, ArrayLike]


def _points_of(a: PointsOrCurve) -> FloatArray:
    pts = a.nodes if isinstance(a, PatchCurve) else np.asarray(a, dtype=float)
    pts = np.atleast_2d(pts)
    if pts.size == 0:
        raise GeometryError("Hausdorff distance needs nonempty sets")
    return pts


def hausdorff_distance(a: PointsOrCurve, b: PointsOrCurve) -> float:
    """Symmetric Hausdorff distance between two finite point sets (or node sets)."""
    pa, pb = _points_of(a), _points_of(b)
    return max(directed_hausdorff(pa, pb)[0], directed_hausdorff(pb, pa)[0])


def points_to_polyline_distance(points: ArrayLike, polyline: ArrayLike, closed: bool = True) -> FloatArray:
    """Euclidean distance from each point to a polyline."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    verts = np.asarray(polyline, dtype=float)
    line = shapely.LinearRing(verts) if closed else shapely.LineString(verts)
    return shapely.distance(shapely.points(pts), line)


def curve_hausdorff(a: PatchCurve | ArrayLike, b: PatchCurve | ArrayLike) -> float:
    """Hausdorff distance between two closed polylines, sampled at their nodes."""
    pa, pb = _points_of(a), _points_of(b)
    return float(max(points_to_polyline_distance(pa, pb).max(), points_to_polyline_distance(pb, pa).max()))


RegionKind = Literal["rectangle", "triangle", "corner-K", "disk", "curve-interior", "curve-complement"]


@dataclass(frozen=True, eq=False)
class Region:
    """Planar region used by the scenario, the bounds and the oracles.

    Use the class-method constructors rather than the raw fields.

    Attributes
    ----------
    kind : str
        One of ``rectangle``, ``triangle``, ``corner-K``, ``disk``,
        ``curve-interior`` and ``curve-complement``.
    params : tuple of float
        Kind specific numbers: ``(x0, x1, y0, y1)`` for rectangles, six
        vertex coordinates for triangles, ``(X,)`` for the corner region,
        ``(cx, cy, r)`` for disks and the box ``(x0, x1, y0, y1)`` for
        complements.
    curve : PatchCurve or None
        The boundary for the two curve kinds.
    """

    kind: RegionKind
    params: tuple[float, ...] = ()
    curve: PatchCurve | None = None

    @classmethod
    def rectangle(cls, x0: float, x1: float, y0: float, y1: float) -> "Region":
        if not (x0 < x1 and y0 < y1):
            raise GeometryError("rectangle corners must satisfy low < high on each axis")
        return cls("rectangle", (float(x0), float(x1), float(y0), float(y1)))

    @classmethod
    def triangle(cls, a: ArrayLike, b: ArrayLike, c: ArrayLike) -> "Region":
        verts = np.array([a, b, c], dtype=float)
        if shoelace_area(verts) == 0.0:
            raise GeometryError("degenerate triangle")
        return cls("triangle", tuple(verts.ravel()))

    @classmethod
    def corner(cls, barrier: float) -> "Region":
        """The corner region ``{barrier < x1 < 2, 0 < x2 < x1}``."""
        if not 0.0 <= barrier < 2.0:
            raise GeometryError("corner region needs 0 <= X < 2")
        return cls("corner-K", (float(barrier),))

    @classmethod
    def disk(cls, center: ArrayLike, radius: float) -> "Region":
        if not radius > 0.0:
            raise GeometryError("disk radius must be positive")
        cx, cy = np.asarray(center, dtype=float)
        return cls("disk", (float(cx), float(cy), float(radius)))

    @classmethod
    def interior(cls, curve: PatchCurve) -> "Region":
        return cls("curve-interior", (), curve)

    @classmethod
    def complement(cls, curve: PatchCurve, box: tuple[float, float, float, float] | None = None) -> "Region":
        """Quadrant minus the closed patch, truncated to a box around both."""
        if box is None:
            hi = float(np.max(curve.nodes)) + 1.0
            box = (0.0, max(hi, 4.0), 0.0, max(hi, 4.0))
        return cls("curve-complement", tuple(float(v) for v in box), curve)

    def polygon(self, disk_nodes: int = 1024) -> FloatArray:
        """Counter-clockwise vertex array of the region (disks are discretized)."""
        p = self.params
        if self.kind == "rectangle":
            x0, x1, y0, y1 = p
            return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
        if self.kind == "triangle":
            v = np.array(p).reshape(3, 2)
            return v if shoelace_area(v) > 0 else v[::-1].copy()
        if self.kind == "corner-K":
            (bx,) = p
            return np.array([[bx, 0.0], [2.0, 0.0], [2.0, 2.0], [bx, bx]])
        if self.kind == "disk":
            cx, cy, r = p
            th = 2.0 * np.pi * np.arange(disk_nodes) / disk_nodes
            return np.column_stack([cx + r * np.cos(th), cy + r * np.sin(th)])
        if self.kind == "curve-interior":
            assert self.curve is not None
            nodes = self.curve.nodes
            return nodes if self.curve.ccw else nodes[::-1].copy()
        raise GeometryError(f"region kind {self.kind} has no single polygon")

    def geometry(self) -> shapely.Geometry:
        """Shapely geometry of the (discretized) region."""
        if self.kind == "curve-complement":
            assert self.curve is not None
            x0, x1, y0, y1 = self.params
            return shapely.box(x0, y0, x1, y1).difference(shapely.Polygon(self.curve.nodes))
        if self.kind == "corner-K" and self.params[0] == 0.0:
            return shapely.Polygon([[0.0, 0.0], [2.0, 0.0], [2.0, 2.0]])
        return shapely.Polygon(self.polygon())

    @property
    def area(self) -> float:
        if self.kind == "disk":
            return float(np.pi * self.params[2] ** 2)
        return float(self.geometry().area)

    def contains(self, points: ArrayLike) -> NDArray[np.bool_]:
        """Strict containment of each point in the open region."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.kind == "disk":
            cx, cy, r = self.params
            return np.hypot(pts[:, 0] - cx, pts[:, 1] - cy) < r
        return shapely.contains_xy(self.geometry(), pts[:, 0], pts[:, 1])


def build_triangle_A(x: ArrayLike) -> Region:
    """Triangle ``{x1 < y1 < x1 + 1, x2 < y2 < x2 + y1 - x1}`` of area 1/2."""
    x1, x2 = np.asarray(x, dtype=float)
    if x1 < 0.0 or x2 < 0.0:
        raise GeometryError("apex must lie in the closed quadrant")
    return Region.triangle((x1, x2), (x1 + 1.0, x2), (x1 + 1.0, x2 + 1.0))


def region_distance(r1: Region, r2: Region) -> float:
    """Euclidean distance between two regions via their polygonal forms."""
    g1, g2 = r1.geometry(), r2.geometry()
    if g1.is_empty or g2.is_empty:
        return float("inf")
    return float(g1.distance(g2))


def format_curve(curve: PatchCurve) -> str:
    """Serialize a curve: ``strength <value>`` then one ``x y`` line per node."""
    lines = [f"strength {curve.strength!r}"]
    lines.extend(f"{x!r} {y!r}" for x, y in curve.nodes.tolist())
    return "\n".join(lines) + "\n"


def parse_curve(text: str, check: bool = True) -> PatchCurve:
    """Inverse of :func:`format_curve`."""
    rows = [line.split() for line in text.splitlines() if line.strip()]
    if not rows or rows[0][0] != "strength" or len(rows[0]) != 2:
        raise GeometryError("curve text must start with 'strength <value>'")
    strength = float(rows[0][1])
    try:
        nodes = np.array([[float(a), float(b)] for a, b in rows[1:]])
    except ValueError as exc:
        raise GeometryError(f"malformed node line: {exc}") from exc
    return PatchCurve(nodes, strength, check=check)


def write_curve(path: str | Path, curve: PatchCurve) -> Path:
    path = Path(path)
    path.write_text(format_curve(curve))
    return path


def read_curve(path: str | Path, check: bool = True) -> PatchCurve:
    return parse_curve(Path(path).read_text(), check=check)


def rounded_rectangle(
    x0: float, x1: float, y0: float, y1: float, radius: float, spacing: float, dense: int = 4096
) -> FloatArray:
    """Nodes of a rectangle with rounded corners, equally spaced at no less than ``spacing``.

    Each corner is the quadrant of the superellipse ``|u|^4 + |v|^4 = radius^4``
    about the corner centre, which joins the straight edges with
    continuous curvature.  The curve starts at the midpoint of the bottom
    edge and runs counter clockwise.
    """
    if not (0.0 < radius <= 0.5 * min(x1 - x0, y1 - y0)):
        raise GeometryError("corner radius does not fit the rectangle")
    theta = 0.5 * np.pi * np.linspace(0.0, 1.0, dense)
    cu, sv = np.sqrt(np.cos(theta)), np.sqrt(np.sin(theta))
    quarter = radius * np.column_stack([cu, sv])  # from (r, 0) to (0, r)
    centres = [(x1 - radius, y0 + radius), (x1 - radius, y1 - radius), (x0 + radius, y1 - radius), (x0 + radius, y0 + radius)]
    rot = np.array([[0.0, -1.0], [1.0, 0.0]])
    pieces = [np.array([[0.5 * (x0 + x1), y0]])]
    turn = np.linalg.matrix_power(rot, 3)  # first corner runs from (0, -r) to (r, 0)
    for c in centres:
        pieces.append(np.asarray(c) + quarter @ turn.T)
        turn = rot @ turn
    pieces.append(np.array([[0.5 * (x0 + x1), y0]]))
    path = np.concatenate(pieces)
    seg = np.hypot(*np.diff(path, axis=0).T)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    perimeter = cum[-1]
    n = max(MIN_NODES, int(np.floor(perimeter / spacing)))
    s = perimeter * np.arange(n) / n
    out = np.column_stack([np.interp(s, cum, path[:, 0]), np.interp(s, cum, path[:, 1])])
    # straight edges are exact
    for axis, value in ((1, y0), (0, x1), (1, y1), (0, x0)):
        other = 1 - axis
        lo = (x0 if other == 0 else y0) + radius
        hi = (x1 if other == 0 else y1) - radius
        near = (np.abs(out[:, axis] - value) < 1e-9 * (1.0 + abs(value))) & (out[:, other] >= lo) & (out[:, other] <= hi)
        out[near, axis] = value
    return out
