"""Contour-dynamics time stepping with node management and diagnostics."""

from __future__ import annotations

from dataclasses import InitVar, dataclass, field
from typing import Callable, Literal, Sequence

import numpy as np
import shapely
from numpy.typing import ArrayLike
from scipy.spatial import cKDTree

from .biot_savart import KernelParams, build_sources, evaluate_panels
from .errors import GeometryError, StepRejected
from .geometry import (
    FloatArray,
    PatchCurve,
    curve_hausdorff,
    interpolant_area,
    interpolant_min,
    reparametrize_constant_speed,
)

SymmetryMode = Literal["none", "odd-x1"]
DIAGNOSTICS_HEADER = "t,patch,area,max_speed,hausdorff_step,min_interpatch,min_gap_to_axis,motion_residual"

WALL_SNAP = 1e-13
AXIS_SNAP = 1e-14


@dataclass(frozen=True, eq=False)
class PatchSystem:
    """A set of patches together with the kernel and the symmetry setting.

    Parameters
    ----------
    patches : sequence of PatchCurve
        Stored patches.  In ``odd-x1`` mode only the right-half patches are
        stored and their negative mirror images are implied.
    params : KernelParams
    symmetry_mode : {"none", "odd-x1"}
    time : float
    half_plane : bool
        Domain is ``x2 > 0`` with a wall at ``x2 = 0`` (image terms on).
    check : bool
        Validate disjointness and the half-plane/axis placement.
    """

    patches: tuple[PatchCurve, ...]
    params: KernelParams
    symmetry_mode: SymmetryMode = "none"
    time: float = 0.0
    half_plane: bool = False
    check: InitVar[bool] = True

    def __post_init__(self, check: bool) -> None:
        object.__setattr__(self, "patches", tuple(self.patches))
        if self.symmetry_mode not in ("none", "odd-x1"):
            raise ValueError(f"unknown symmetry mode {self.symmetry_mode!r}")
        if self.time < 0.0:
            raise ValueError("time must be nonnegative")
        if not check:
            return
        polys = [shapely.Polygon(c.nodes) for c in self.patches]
        for i in range(len(polys)):
            for j in range(i + 1, len(polys)):
                if polys[i].distance(polys[j]) <= 0.0:
                    raise GeometryError(f"patches {i} and {j} are not disjoint")
        for c in self.patches:
            if self.symmetry_mode == "odd-x1" and c.nodes[:, 0].min() <= 0.0:
                raise GeometryError("odd-x1 patches must lie in the open right half-plane")
            if self.half_plane and c.nodes[:, 1].min() < 0.0:
                raise GeometryError("half-plane patches must lie in x2 >= 0")

    @property
    def odd(self) -> bool:
        return self.symmetry_mode == "odd-x1"

    def copies(self) -> int:
        """Number of image copies per stored patch."""
        return (2 if self.odd else 1) * (2 if self.half_plane else 1)

    def velocity(self, points: ArrayLike) -> FloatArray:
        """Velocity at an ``(m, 2)`` array of points (contour evaluator)."""
        panels = build_sources(self.patches, wall_image=self.half_plane, odd_x1=self.odd)
        return evaluate_panels(panels, points, self.params)

    def full_extension_l1(self) -> float:
        """L1 norm of the full-plane extension of the scalar (all images)."""
        return float(sum(abs(c.strength) * abs(interpolant_area(c)) for c in self.patches) * self.copies())

    def sup_norm(self) -> float:
        return max((abs(c.strength) for c in self.patches), default=0.0)

    def uniform_velocity_bound(self) -> float:
        """``2 pi / (1 - 2 alpha) * sup|omega| + ||omega||_1`` of the full extension."""
        a = self.params.alpha
        return 2.0 * np.pi / (1.0 - 2.0 * a) * self.sup_norm() + self.full_extension_l1()

    def replace(self, patches: Sequence[PatchCurve], time: float, check: bool = False) -> "PatchSystem":
        return PatchSystem(tuple(patches), self.params, self.symmetry_mode, time, self.half_plane, check=check)


@dataclass(frozen=True)
class SingularityEvent:
    """A detected touch: self contact, contact of two patches, or contact with the mirror image."""

    kind: Literal["self", "interpatch", "mirror"]
    location: tuple[float, float]
    patches: tuple[int, ...]
    distance: float
    time: float


@dataclass(frozen=True)
class StepDiagnostics:
    """Per-step diagnostics.

    Attributes
    ----------
    dt : float
    area_per_patch : tuple of float
        Area enclosed by each spline boundary after the step.
    max_speed : float
        Largest node speed over all Runge-Kutta stages.
    hausdorff_step : float
        Hausdorff distance between the old and new boundaries.
    redistribution : float
        Hausdorff distance between the advected nodes and the resampled curve.
    min_interpatch_dist : float
        Smallest distance between distinct stored patches (``inf`` for one).
    min_node_spacing : float
    motion_residual : float
        ``d_H(new boundary, old boundary + dt u(old)) / dt``.
    gap_to_axis : float
        Smallest ``x1`` over the boundaries (odd mode), else ``nan``.
    event : SingularityEvent or None
    """

    dt: float
    area_per_patch: tuple[float, ...]
    max_speed: float
    hausdorff_step: float
    redistribution: float
    min_interpatch_dist: float
    min_node_spacing: float
    motion_residual: float
    gap_to_axis: float
    event: SingularityEvent | None = None

    def csv_rows(self, t: float) -> list[str]:
        rows = []
        for k, area in enumerate(self.area_per_patch):
            vals = (t, k, area, self.max_speed, self.hausdorff_step, self.min_interpatch_dist,
                    self.gap_to_axis, self.motion_residual)
            rows.append(",".join(repr(float(v)) if not isinstance(v, int) else str(v) for v in vals))
        return rows


def _snap(nodes: FloatArray, half_plane: bool, odd: bool) -> FloatArray:
    """Project nodes below or within roundoff of the wall onto it; snap roundoff at the axis."""
    if half_plane:
        col = nodes[:, 1]
        col[col < WALL_SNAP] = 0.0
    if odd:
        col = nodes[:, 0]
        col[np.abs(col) < AXIS_SNAP] = 0.0
    return nodes


def _node_count(curve: PatchCurve, h_min: float | None) -> int:
    n = len(curve)
    if h_min is None:
        return n
    spacing = curve.arc_length / n
    if h_min <= spacing <= 2.0 * h_min:
        return n
    return max(8, int(round(curve.arc_length / (1.5 * h_min))))


def _min_spacing(curves: Sequence[PatchCurve]) -> float:
    return min((float(c.segment_lengths.min()) for c in curves), default=np.inf)


def _segment_distance(p1, p2, q1, q2) -> FloatArray:
    """Vectorized distance between segments ``[p1, p2]`` and ``[q1, q2]``."""

    def point_seg(p, a, b):
        ab = b - a
        denom = np.maximum(np.einsum("ij,ij->i", ab, ab), 1e-300)
        s = np.clip(np.einsum("ij,ij->i", p - a, ab) / denom, 0.0, 1.0)
        return np.hypot(*(p - a - s[:, None] * ab).T)

    d = np.minimum.reduce([point_seg(p1, q1, q2), point_seg(p2, q1, q2), point_seg(q1, p1, p2), point_seg(q2, p1, p2)])

    def orient(a, b, c):
        return np.sign((b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0]))

    crossing = (orient(p1, p2, q1) * orient(p1, p2, q2) < 0) & (orient(q1, q2, p1) * orient(q1, q2, p2) < 0)
    return np.where(crossing, 0.0, d)


def self_contact(curve: PatchCurve, threshold: float) -> tuple[float, tuple[float, float]] | None:
    """Closest pair of non-neighbouring segments when closer than ``threshold``."""
    nodes = curve.nodes
    n = len(nodes)
    seg = curve.segment_lengths
    window = int(np.ceil(threshold / max(seg.min(), 1e-300))) + 2
    if 2 * window + 2 >= n:
        window = max(1, n // 4)
    mids = 0.5 * (nodes + np.roll(nodes, -1, axis=0))
    tree = cKDTree(mids)
    pairs = tree.query_pairs(threshold + seg.max(), output_type="ndarray")
    if len(pairs) == 0:
        return None
    i, j = pairs[:, 0], pairs[:, 1]
    gap = np.minimum(np.abs(i - j), n - np.abs(i - j))
    keep = gap > window
    i, j = i[keep], j[keep]
    if len(i) == 0:
        return None
    d = _segment_distance(nodes[i], nodes[(i + 1) % n], nodes[j], nodes[(j + 1) % n])
    k = int(np.argmin(d))
    if d[k] >= threshold:
        return None
    loc = 0.5 * (mids[i[k]] + mids[j[k]])
    return float(d[k]), (float(loc[0]), float(loc[1]))


def detect_contact(system: PatchSystem, threshold: float) -> SingularityEvent | None:
    """Look for self contact, contact between patches and contact with the mirror image."""
    curves = system.patches
    for k, c in enumerate(curves):
        if not shapely.LinearRing(c.nodes).is_simple:
            return SingularityEvent("self", tuple(map(float, c.nodes[0])), (k,), 0.0, system.time)
        hit = self_contact(c, threshold)
        if hit is not None:
            return SingularityEvent("self", hit[1], (k,), hit[0], system.time)
    lines = [shapely.LinearRing(c.nodes) for c in curves]
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            d = lines[i].distance(lines[j])
            if d < threshold:
                (ax, ay), (bx, by) = shapely.get_coordinates(shapely.shortest_line(lines[i], lines[j]))
                loc = (0.5 * (ax + bx), 0.5 * (ay + by))
                return SingularityEvent("interpatch", loc, (i, j), float(d), system.time)
    if system.odd:
        for k, c in enumerate(curves):
            i = int(np.argmin(c.nodes[:, 0]))
            gap = float(c.nodes[i, 0])
            if 2.0 * gap < threshold:
                return SingularityEvent("mirror", (0.0, float(c.nodes[i, 1])), (k,), 2.0 * gap, system.time)
    return None


def min_interpatch_distance(curves: Sequence[PatchCurve]) -> float:
    lines = [shapely.LinearRing(c.nodes) for c in curves]
    best = np.inf
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            best = min(best, lines[i].distance(lines[j]))
    return float(best)


def gap_to_axis(system: PatchSystem) -> float:
    """Smallest ``x1`` over the spline boundaries; half the distance to the mirror image."""
    if not system.odd:
        return float("nan")
    return min(interpolant_min(c, axis=0) for c in system.patches)


def step(
    system: PatchSystem,
    dt: float,
    *,
    cfl: float | None = 0.25,
    h_min: float | None = None,
) -> tuple[PatchSystem, StepDiagnostics]:
    """Advance all boundary nodes by one classical Runge-Kutta step.

    Parameters
    ----------
    system : PatchSystem
    dt : float
        Time step, nonnegative.
    cfl : float or None
        Largest allowed ``dt * speed / min node spacing``; ``None`` disables
        the check.
    h_min : float or None
        Target node spacing.  Node counts are adapted so the spacing stays
        in ``[h_min, 2 h_min]``; ``None`` keeps node counts fixed.

    Returns
    -------
    system : PatchSystem
        The advanced, resampled system.
    diagnostics : StepDiagnostics
        Includes a :class:`SingularityEvent` when a contact is detected.

    Raises
    ------
    StepRejected
        When the CFL restriction is violated.
    """
    if dt < 0.0:
        raise ValueError("dt must be nonnegative")
    curves = system.patches
    sizes = [len(c) for c in curves]
    splits = np.cumsum(sizes)[:-1]
    spacing = _min_spacing(curves)
    if dt == 0.0 or not curves:
        diag = StepDiagnostics(
            dt, tuple(interpolant_area(c) for c in curves), 0.0, 0.0, 0.0,
            min_interpatch_distance(curves), spacing, 0.0, gap_to_axis(system),
        )
        return system, diag

    def rhs(stage_curves: Sequence[PatchCurve]) -> FloatArray:
        panels = build_sources(stage_curves, wall_image=system.half_plane, odd_x1=system.odd)
        targets = np.concatenate([c.nodes for c in stage_curves])
        return evaluate_panels(panels, targets, system.params)

    x0 = np.concatenate([c.nodes for c in curves])
    k1 = rhs(curves)
    speed1 = float(np.max(np.hypot(k1[:, 0], k1[:, 1])))
    if cfl is not None and dt * speed1 > cfl * spacing:
        raise StepRejected("CFL restriction violated", cfl * spacing / speed1)

    def stage(nodes: FloatArray) -> list[PatchCurve]:
        nodes = _snap(nodes, system.half_plane, system.odd)
        return [c.with_nodes(part, check=False) for c, part in zip(curves, np.split(nodes, splits))]

    k2 = rhs(stage(x0 + 0.5 * dt * k1))
    k3 = rhs(stage(x0 + 0.5 * dt * k2))
    k4 = rhs(stage(x0 + dt * k3))
    max_speed = max(float(np.max(np.hypot(k[:, 0], k[:, 1]))) for k in (k1, k2, k3, k4))
    moved = stage(x0 + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))

    new_curves = []
    for c in moved:
        r = reparametrize_constant_speed(c, _node_count(c, h_min), check=False)
        r = c.with_nodes(_snap(np.array(r.nodes), system.half_plane, system.odd), check=False)
        new_curves.append(r)
    new_system = system.replace(new_curves, system.time + dt)

    euler = np.split(x0 + dt * k1, splits)
    hausdorff_step = max(curve_hausdorff(a, b) for a, b in zip(curves, new_curves))
    redistribution = max(curve_hausdorff(a, b) for a, b in zip(moved, new_curves))
    residual = max(curve_hausdorff(e, b) for e, b in zip(euler, new_curves)) / dt
    new_spacing = _min_spacing(new_curves)
    threshold = 2.0 * (h_min if h_min is not None else new_spacing)
    event = detect_contact(new_system, threshold)
    diag = StepDiagnostics(
        dt=dt,
        area_per_patch=tuple(interpolant_area(c) for c in new_curves),
        max_speed=max_speed,
        hausdorff_step=hausdorff_step,
        redistribution=redistribution,
        min_interpatch_dist=min_interpatch_distance(new_curves),
        min_node_spacing=new_spacing,
        motion_residual=residual,
        gap_to_axis=gap_to_axis(new_system),
        event=event,
    )
    return new_system, diag


Monitor = Callable[[float, PatchSystem, "StepDiagnostics | None"], "str | None"]


@dataclass
class Trajectory:
    """Frames of a run and its final status.

    ``frames`` holds ``(time, system, diagnostics)``; the first frame is the
    initial state with ``diagnostics = None``.  ``diagnostics`` holds every
    step, ``frames`` only the retained ones.
    """

    frames: list[tuple[float, PatchSystem, StepDiagnostics | None]] = field(default_factory=list)
    diagnostics: list[tuple[float, StepDiagnostics]] = field(default_factory=list)
    status: str = "reached_t_end"
    event: SingularityEvent | None = None

    @property
    def final(self) -> PatchSystem:
        return self.frames[-1][1]


def run(
    system: PatchSystem,
    t_end: float,
    dt_init: float,
    monitors: Sequence[Monitor] = (),
    *,
    cfl: float | None = 0.25,
    h_min: float | None = None,
    frame_every: int = 1,
    monitor_every: int = 1,
    max_steps: int | None = None,
) -> Trajectory:
    """Step to ``t_end``, a singularity event, or a stop request from a monitor.

    The step size starts at ``dt_init`` and is reduced whenever a step is
    rejected by the CFL check; after a rejection it stays at the largest
    accepted value.  A monitor is called as ``monitor(t, system, diag)``
    every ``monitor_every`` steps and may return a status string to stop
    the run.
    """
    if t_end < system.time:
        raise ValueError("t_end must not precede the current time")
    if dt_init <= 0.0:
        raise ValueError("dt_init must be positive")
    traj = Trajectory(frames=[(system.time, system, None)])
    for m in monitors:
        status = m(system.time, system, None)
        if status:
            traj.status = status
            return traj
    dt = dt_init
    steps = 0
    last = None
    while system.time < t_end * (1.0 - 1e-15) and (max_steps is None or steps < max_steps):
        h = min(dt, t_end - system.time)
        try:
            new_system, diag = step(system, h, cfl=cfl, h_min=h_min)
        except StepRejected as exc:
            dt = 0.9 * exc.suggested_dt
            continue
        if system.time + h >= t_end * (1.0 - 1e-15):
            new_system = new_system.replace(new_system.patches, t_end)
        system = new_system
        steps += 1
        traj.diagnostics.append((system.time, diag))
        last = (system.time, system, diag)
        stop = None
        if diag.event is not None:
            traj.status = "contact_event"
            traj.event = diag.event
            stop = traj.status
        elif steps % monitor_every == 0:
            for m in monitors:
                stop = m(system.time, system, diag) or stop
            if stop:
                traj.status = stop
        if steps % frame_every == 0 or stop:
            traj.frames.append(last)
        if stop:
            return traj
    if last is not None and traj.frames[-1][0] != last[0]:
        traj.frames.append(last)
    if system.time < t_end * (1.0 - 1e-15):
        traj.status = "max_steps"
    return traj


@dataclass(frozen=True)
class GridSpec:
    """Rectangular lattice ``nx`` by ``ny`` over ``[x_min, x_max] x [y_min, y_max]``."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def __post_init__(self) -> None:
        if not (self.x_min <= self.x_max and self.y_min <= self.y_max and self.nx >= 1 and self.ny >= 1):
            raise ValueError("invalid grid")

    def points(self) -> FloatArray:
        """Lattice points in row-major order, rows of constant ``x2``."""
        xs = np.linspace(self.x_min, self.x_max, self.nx)
        ys = np.linspace(self.y_min, self.y_max, self.ny)
        gx, gy = np.meshgrid(xs, ys)
        return np.column_stack([gx.ravel(), gy.ravel()])


def velocity_field_snapshot(system: PatchSystem, grid: GridSpec) -> FloatArray:
    """Velocity on a lattice, shape ``(ny, nx, 2)``."""
    u = system.velocity(grid.points()) if system.patches else np.zeros((grid.nx * grid.ny, 2))
    return u.reshape(grid.ny, grid.nx, 2)
