"""Odd half-plane collapse scenario: initial patch, barrier, containment monitor and runs."""

from __future__ import annotations

import math
import time as _time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import shapely

from .biot_savart import KernelParams
from .bounds import search_delta_alpha
from .errors import DomainError, UsageError
from .evolution import PatchSystem, SingularityEvent, StepDiagnostics, run
from .geometry import (
    PatchCurve,
    Region,
    interpolant_area,
    interpolant_min,
    region_distance,
    rounded_rectangle,
    write_curve,
)

SPEED_CAP = 100.0
SCENARIO_CSV_HEADER = "t,gap,X,f,contained,max_u,area_drift"


@dataclass(frozen=True)
class ScenarioConfig:
    """Parameters of the collapse experiment.

    Parameters
    ----------
    alpha : float
        Kernel exponent in ``(0, 1/24)``.
    epsilon : float
        Scale of the initial gap to the symmetry axis.
    corner_rounding : float or None
        Corner radius of the initial rounded rectangle; ``None`` means
        ``min(epsilon / 4, 0.1)``.
    node_spacing : float
        Target node spacing ``h_min``.
    t_end : float or None
        Final time; ``None`` means half the barrier lifetime.
    euler_contrast : bool
        Repeat the run with ``alpha = 0`` over the horizon reached.
    cfl : float
    frame_every : int
        Keep every ``frame_every``-th step as a frame.
    floor_factor : float
        The run stops with status ``resolution_floor`` once the gap drops
        below ``floor_factor`` times the smallest node spacing.
    delta_alpha : float or None
        Smallness threshold for the drift bounds; ``None`` uses
        :func:`search_delta_alpha`.
    max_steps : int or None
    """

    alpha: float = 0.03
    epsilon: float = 0.05
    corner_rounding: float | None = None
    node_spacing: float = 0.015
    t_end: float | None = None
    euler_contrast: bool = True
    cfl: float = 0.25
    frame_every: int = 1
    floor_factor: float = 2.0
    delta_alpha: float | None = None
    max_steps: int | None = None

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0 / 24.0:
            raise UsageError(f"alpha: must lie in (0, 1/24), got {self.alpha}")
        if not self.epsilon > 0.0:
            raise UsageError(f"epsilon: must be positive, got {self.epsilon}")
        if self.corner_rounding is not None and not 0.0 < self.corner_rounding <= min(self.epsilon, 1.0):
            raise UsageError("corner_rounding: must lie in (0, min(epsilon, 1)]")
        if not self.node_spacing > 0.0:
            raise UsageError("node_spacing: must be positive")
        if self.t_end is not None and not self.t_end >= 0.0:
            raise UsageError("t_end: must be nonnegative")
        if not self.cfl > 0.0:
            raise UsageError("cfl: must be positive")
        if self.frame_every < 1:
            raise UsageError("frame_every: must be at least 1")

    @property
    def rounding(self) -> float:
        return min(self.epsilon / 4.0, 0.1) if self.corner_rounding is None else self.corner_rounding

    @property
    def lifetime(self) -> float:
        return barrier_lifetime(self.epsilon, self.alpha)

    @property
    def horizon(self) -> float:
        return 0.5 * self.lifetime if self.t_end is None else self.t_end

    def resolved_delta(self) -> float:
        return search_delta_alpha(self.alpha) if self.delta_alpha is None else self.delta_alpha

    def admissible(self) -> bool:
        """Whether ``epsilon <= delta^(1/(2 alpha)) / (3 * 100^(1/alpha))``."""
        return self.epsilon <= admissible_epsilon(self.resolved_delta(), self.alpha)

    def echo(self) -> str:
        lines = [f"{k}={v}" for k, v in asdict(self).items()]
        return "\n".join(lines) + "\n"


def admissible_epsilon(delta: float, alpha: float) -> float:
    """Largest ``epsilon`` allowed by the barrier argument, ``delta^(1/(2 alpha)) / (3 * 100^(1/alpha))``."""
    if delta <= 0.0:
        return 0.0
    return math.exp(math.log(delta) / (2.0 * alpha) - math.log(3.0) - math.log(100.0) / alpha)


def outer_rectangle(epsilon: float) -> tuple[float, float, float, float]:
    """``(epsilon, 4) x (0, 4)`` as ``(x0, x1, y0, y1)``."""
    return (epsilon, 4.0, 0.0, 4.0)


def inner_rectangle(epsilon: float) -> tuple[float, float, float, float]:
    """``(2 epsilon, 3) x (0, 3)`` as ``(x0, x1, y0, y1)``."""
    return (2.0 * epsilon, 3.0, 0.0, 3.0)


def _sandwich_ok(curve: PatchCurve, epsilon: float, samples: int = 64) -> bool:
    """Inner rectangle inside and outer rectangle around the patch, checked on sample points."""
    poly = shapely.Polygon(curve.nodes)
    x0, x1, y0, y1 = outer_rectangle(epsilon)
    outer = shapely.box(x0, y0, x1, y1)
    if not outer.buffer(1e-12).covers(poly):
        return False
    a0, a1, b0, b1 = inner_rectangle(epsilon)
    s = (np.arange(samples) + 0.5) / samples
    gx, gy = np.meshgrid(a0 + (a1 - a0) * s, b0 + (b1 - b0) * s)
    edge = np.concatenate([
        np.column_stack([a0 + (a1 - a0) * s, np.full(samples, b0 + 1e-9)]),
        np.column_stack([np.full(samples, a0 + 1e-9), b0 + (b1 - b0) * s]),
        np.column_stack([np.full(samples, a1 - 1e-9), b0 + (b1 - b0) * s]),
        np.column_stack([a0 + (a1 - a0) * s, np.full(samples, b1 - 1e-9)]),
    ])
    pts = np.concatenate([np.column_stack([gx.ravel(), gy.ravel()]), edge])
    return bool(np.all(shapely.contains_xy(poly, pts[:, 0], pts[:, 1])))


def build_initial_data(config: ScenarioConfig) -> PatchSystem:
    """Rounded rectangle ``[1.5 epsilon, 3.5] x [0, 3.5]`` as an odd half-plane system.

    The rectangle lies midway between the inner rectangle ``(2 eps, 3) x (0, 3)``
    and the outer rectangle ``(eps, 4) x (0, 4)``; its bottom edge rests on
    the wall.

    Raises
    ------
    UsageError
        When the rounded corners break the sandwich between the two rectangles.
    """
    eps = config.epsilon
    if 1.5 * eps >= 3.0:
        raise UsageError("epsilon: too large for the initial rectangle")
    nodes = rounded_rectangle(1.5 * eps, 3.5, 0.0, 3.5, config.rounding, config.node_spacing)
    curve = PatchCurve(nodes, strength=1.0)
    if not _sandwich_ok(curve, eps):
        raise UsageError("corner_rounding: rounded patch does not fit between the inner and outer rectangles")
    return PatchSystem((curve,), KernelParams(config.alpha), "odd-x1", 0.0, half_plane=True)


# ---------------------------------------------------------------------------
# barrier


def barrier_lifetime(epsilon: float, alpha: float) -> float:
    """``T = 50 (3 epsilon)^(2 alpha)``."""
    return 50.0 * (3.0 * epsilon) ** (2.0 * alpha)


def barrier_position(t, epsilon: float, alpha: float):
    """``X(t) = 3 epsilon (1 - t/T)^(1/(2 alpha))``, equal to ``((3 eps)^(2 alpha) - t/50)^(1/(2 alpha))``."""
    T = barrier_lifetime(epsilon, alpha)
    s = np.clip(1.0 - np.asarray(t, dtype=float) / T, 0.0, None)
    return 3.0 * epsilon * s ** (1.0 / (2.0 * alpha))


def barrier_slope(X, alpha: float):
    """Right-hand side of the barrier equation, ``-X^(1 - 2 alpha) / (100 alpha)``."""
    return -np.asarray(X, dtype=float) ** (1.0 - 2.0 * alpha) / (100.0 * alpha)


@dataclass(frozen=True)
class BarrierState:
    """Barrier abscissa, corner region and, once monitored, containment data."""

    epsilon: float
    alpha: float
    t: float
    T: float
    X: float
    K: Region | None
    f: float = float("nan")
    gap: float = float("nan")
    contained: bool | None = None
    witness: tuple[float, float] | None = None


def barrier_at(t: float, epsilon: float, alpha: float) -> BarrierState:
    """Barrier state at time ``t`` in ``[0, T]``; ``K`` is ``None`` when ``X >= 2`` (empty region)."""
    if not 0.0 < alpha < 0.5:
        raise DomainError("alpha must lie in (0, 1/2)")
    T = barrier_lifetime(epsilon, alpha)
    if t < 0.0 or t > T:
        raise DomainError(f"t={t} outside [0, T={T}]")
    X = 0.0 if t == T else float(barrier_position(t, epsilon, alpha))
    K = Region.corner(X) if X < 2.0 else None
    return BarrierState(epsilon, alpha, float(t), T, X, K)


def _segments(X: float, delta: float) -> tuple[shapely.LineString, shapely.LineString]:
    i1 = shapely.LineString([(X, 0.0), (X, X)])
    i2 = shapely.LineString([(X, X), (delta, delta)]) if delta != X else shapely.Point(X, X)
    return i1, i2


def _corner_samples(X: float, n: int = 48) -> np.ndarray:
    """Points of the open corner region, denser next to its left and diagonal edges."""
    s = (np.arange(n) + 0.5) / n
    x1 = X + (2.0 - X) * s**2
    q = (np.arange(n) + 0.5) / n
    gx = np.repeat(x1, n)
    gy = gx * np.tile(q, n)
    inset = 1e-9 * max(1.0, X)
    left = np.column_stack([np.full(n, X + inset), X * q])
    diag = np.column_stack([x1, x1 * (1.0 - 1e-9)])
    return np.concatenate([np.column_stack([gx, gy]), left, diag])


def monitor_containment(
    system: PatchSystem, barrier: BarrierState, delta_alpha: float = 0.0
) -> tuple[float, bool, tuple[float, float] | None]:
    """Distance from the patch exterior to ``K``, containment flag and a witness.

    Returns
    -------
    f : float
        Distance between the quadrant minus the closed patch and ``K``;
        ``inf`` when ``K`` is empty.
    contained : bool
        Every sample point of ``K`` lies inside the patch polygon.
    witness : tuple or None
        When not contained, the first boundary point found on the segment
        ``{X} x [0, X]`` or on the segment from ``(X, X)`` to
        ``(delta_alpha, delta_alpha)``.
    """
    if not system.odd:
        raise DomainError("containment monitoring needs an odd-x1 system")
    if barrier.K is None:
        return float("inf"), True, None
    curve = system.patches[0]
    f = region_distance(Region.complement(curve), barrier.K)
    pts = _corner_samples(barrier.X)
    poly = shapely.Polygon(curve.nodes)
    contained = bool(np.all(shapely.contains_xy(poly, pts[:, 0], pts[:, 1])))
    witness = None
    if not contained:
        ring = shapely.LinearRing(curve.nodes)
        for seg in _segments(barrier.X, delta_alpha):
            coords = shapely.get_coordinates(ring.intersection(seg))
            # boundary resting on the wall is not a crossing
            coords = coords[coords[:, 1] > 0.0]
            if len(coords):
                start = np.array(seg.coords[0])
                k = int(np.argmin(np.hypot(*(coords - start).T)))
                witness = (float(coords[k, 0]), float(coords[k, 1]))
                break
    return f, contained, witness


# ---------------------------------------------------------------------------
# experiment


@dataclass
class FrameRecord:
    t: float
    gap: float
    X: float
    f: float
    contained: bool
    max_u: float
    area_drift: float
    min_node_spacing: float
    system: PatchSystem = field(repr=False)

    def csv_row(self) -> str:
        vals = (self.t, self.gap, self.X, self.f)
        head = ",".join(repr(float(v)) for v in vals)
        return f"{head},{int(self.contained)},{self.max_u!r},{self.area_drift!r}"


@dataclass
class CollapseReport:
    """Frames and outcome of one collapse run, plus the optional Euler contrast."""

    config: ScenarioConfig
    alpha: float
    frames: list[FrameRecord]
    status: str
    event: SingularityEvent | None
    delta_alpha: float
    admissible: bool
    lifetime: float
    wall_seconds: float
    contrast: "CollapseReport | None" = None

    @property
    def gaps(self) -> np.ndarray:
        return np.array([fr.gap for fr in self.frames])

    @property
    def times(self) -> np.ndarray:
        return np.array([fr.t for fr in self.frames])

    def summary_line(self) -> str:
        return f"status={self.status}"


def _evolve(config: ScenarioConfig, system: PatchSystem, horizon: float, delta: float, with_barrier: bool):
    area0 = interpolant_area(system.patches[0])
    frames: list[FrameRecord] = []
    speed = {"last": float("nan")}

    def record(t: float, sys: PatchSystem, diag: StepDiagnostics | None) -> str | None:
        curve = sys.patches[0]
        gap = interpolant_min(curve, axis=0)
        spacing = float(curve.segment_lengths.min())
        if diag is None:
            max_u = float(np.max(np.hypot(*sys.velocity(curve.nodes).T)))
        else:
            max_u = diag.max_speed
        speed["last"] = max_u
        if with_barrier and t <= config.lifetime:
            b = barrier_at(min(t, config.lifetime), config.epsilon, config.alpha)
            f, contained, _ = monitor_containment(sys, b, delta)
            X = b.X
        else:
            X, f, contained = float("nan"), float("nan"), True
        drift = abs(interpolant_area(curve) - area0) / abs(area0)
        frames.append(FrameRecord(t, gap, X, f, contained, max_u, drift, spacing, sys))
        if gap < config.floor_factor * spacing:
            return "resolution_floor"
        return None

    dt0 = config.cfl * config.node_spacing / 10.0
    traj = run(
        system, horizon, dt0, (record,), cfl=config.cfl, h_min=config.node_spacing,
        frame_every=config.frame_every, max_steps=config.max_steps,
    )
    keep = {id(fr[1]) for fr in traj.frames}
    if traj.event is not None and frames[-1].system is not traj.final:
        record(traj.final.time, traj.final, traj.diagnostics[-1][1])
        keep.add(id(traj.final))
    kept = [fr for fr in frames if id(fr.system) in keep]
    return kept, traj.status, traj.event


def run_collapse_experiment(config: ScenarioConfig, output_dir: str | Path | None = None) -> CollapseReport:
    """Evolve the odd half-plane patch until the horizon, a contact event or the resolution floor.

    Each frame records the gap to the symmetry axis (minimum of ``x1`` over
    the spline boundary), the barrier ``X(t)``, the containment distance
    ``f(t)`` and flag, the largest node speed and the relative area drift.
    With ``euler_contrast`` the same data is evolved with ``alpha = 0`` up
    to the time the main run reached.  When ``output_dir`` is given the
    report is written there (the contrast run into ``euler/``).
    """
    start = _time.perf_counter()
    delta = config.resolved_delta()
    system = build_initial_data(config)
    frames, status, event = _evolve(config, system, config.horizon, delta, True)
    report = CollapseReport(
        config, config.alpha, frames, status, event, delta, config.admissible(), config.lifetime,
        _time.perf_counter() - start,
    )
    if config.euler_contrast:
        t_reached = frames[-1].t
        start = _time.perf_counter()
        euler = PatchSystem(system.patches, KernelParams(0.0), "odd-x1", 0.0, half_plane=True)
        cframes, cstatus, cevent = _evolve(config, euler, t_reached, delta, False)
        report.contrast = CollapseReport(
            replace(config, euler_contrast=False), 0.0, cframes, cstatus, cevent, delta, False,
            float("inf"), _time.perf_counter() - start,
        )
    if output_dir is not None:
        write_collapse_report(report, output_dir)
    return report


def write_collapse_report(report: CollapseReport, output_dir: str | Path, echo: bool = True) -> Path:
    """Config echo, per-frame curves, diagnostics CSV and summary line.

    With ``echo=False`` an existing ``config.txt`` is left in place.
    """
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if echo:
        (out / "config.txt").write_text(report.config.echo() + f"run_alpha={report.alpha}\n")
    for k, fr in enumerate(report.frames):
        for p, curve in enumerate(fr.system.patches):
            write_curve(out / f"frame_{k:03d}_patch_{p}.curve", curve)
    lines = [SCENARIO_CSV_HEADER] + [fr.csv_row() for fr in report.frames]
    (out / "diagnostics.csv").write_text("\n".join(lines) + "\n")
    (out / "summary.txt").write_text(
        f"{report.summary_line()}\nalpha={report.alpha}\ndelta_alpha={report.delta_alpha}\n"
        f"admissible={report.admissible}\nT={report.lifetime}\nt_final={report.frames[-1].t}\n"
        f"gap_initial={report.frames[0].gap}\ngap_final={report.frames[-1].gap}\n"
    )
    if report.contrast is not None:
        write_collapse_report(report.contrast, out / "euler")
    return out
