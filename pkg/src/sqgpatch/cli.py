"""Command-line front end: configuration parsing, run orchestration and file output.

Usage::

    sqgpatch <subcommand> [--config FILE] [--output-dir DIR] [--seed N] [key=value ...]

Configuration files hold ``key=value`` lines (``#`` starts a comment).
Overrides given on the command line win over the file.  Every run writes
the fully resolved configuration to ``<output_dir>/config.txt`` before
anything else.

Exit status: 0 success, 1 usage error, 2 accuracy error or failed
certificate, 3 singularity event reached.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .biot_savart import CSV_HEADER, KernelParams, VelocityDecomposition, velocity_odd_system
from .bounds import (
    BoundCertificate,
    check_uniform_u,
    default_certificate_suite,
    search_delta_alpha,
)
from .errors import AccuracyError, DomainError, GeometryError, UsageError
from .evolution import DIAGNOSTICS_HEADER, GridSpec, PatchSystem, Trajectory, run, velocity_field_snapshot
from .geometry import PatchCurve, read_curve, write_curve
from .scenario import SPEED_CAP, CollapseReport, ScenarioConfig, build_initial_data, run_collapse_experiment, write_collapse_report

SUBCOMMANDS = ("certify", "snapshot", "evolve", "collapse")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_ACCURACY = 2
EXIT_SINGULARITY = 3


# ---------------------------------------------------------------------------
# schema


@dataclass(frozen=True)
class Param:
    """One configuration key: value type, default and range check.

    ``kind`` is one of ``float``, ``int``, ``bool``, ``str`` or
    ``"choice"``.  ``optional`` admits the value ``none``.  ``check``
    returns an error message for an out-of-range value, or ``None``.
    """

    kind: Any
    default: Any = None
    required: bool = False
    optional: bool = False
    choices: tuple[str, ...] = ()
    check: Callable[[Any], str | None] | None = None


def _positive(v: float) -> str | None:
    return None if v > 0 else "must be positive"


def _nonnegative(v: float) -> str | None:
    return None if v >= 0 else "must be nonnegative"


def _at_least(m: int) -> Callable[[int], str | None]:
    return lambda v: None if v >= m else f"must be at least {m}"


def _alpha_range(v: float) -> str | None:
    return None if 0.0 <= v < 0.5 else "must lie in [0, 1/2)"


_COMMON = {
    "output_dir": Param(str, required=True),
    "seed": Param(int, 0, check=_nonnegative),
}

_SOURCE = {
    "source": Param("choice", "scenario", choices=("scenario", "disk", "curve")),
    "alpha": Param(float, 0.0, check=_alpha_range),
    "epsilon": Param(float, 0.05, check=_positive),
    "node_spacing": Param(float, 0.015, check=_positive),
    "radius": Param(float, 1.0, check=_positive),
    "center_x1": Param(float, 0.0),
    "center_x2": Param(float, 0.0),
    "nodes": Param(int, 256, check=_at_least(8)),
    "curve_file": Param(str, optional=True),
    "half_plane": Param(bool, False),
    "symmetry": Param("choice", "none", choices=("none", "odd-x1")),
}

SCHEMAS: dict[str, dict[str, Param]] = {
    "certify": {
        "samples": Param(int, 100_000, check=_at_least(1)),
        "grid_n": Param(int, 20, check=_at_least(2)),
        "truncation_R": Param(float, 10.0, check=lambda v: None if v >= 2.0 else "must be at least 2"),
        "delta_alphas": Param(str, "0.03333333333333333,0.02"),
        "uniform_points": Param(int, 1000, check=_nonnegative),
        "uniform_alpha": Param(float, 0.03, check=_alpha_range),
        "uniform_epsilon": Param(float, 0.05, check=_positive),
    },
    "snapshot": {
        **_SOURCE,
        "x_min": Param(float, -2.0),
        "x_max": Param(float, 2.0),
        "y_min": Param(float, -2.0),
        "y_max": Param(float, 2.0),
        "nx": Param(int, 50, check=_at_least(1)),
        "ny": Param(int, 50, check=_at_least(1)),
        "decompose": Param(bool, False),
    },
    "evolve": {
        **_SOURCE,
        "t_end": Param(float, 1.0, check=_nonnegative),
        "dt": Param(float, 0.01, check=_positive),
        "cfl": Param(float, 0.25, check=_nonnegative),
        "h_min": Param(float, optional=True, check=_positive),
        "frame_every": Param(int, 1, check=_at_least(1)),
        "max_steps": Param(int, optional=True, check=_at_least(1)),
    },
    "collapse": {
        "alpha": Param(float, 0.03, check=_alpha_range),
        "epsilon": Param(float, 0.05, check=_positive),
        "corner_rounding": Param(float, optional=True, check=_positive),
        "node_spacing": Param(float, 0.015, check=_positive),
        "t_end": Param(float, optional=True, check=_nonnegative),
        "euler_contrast": Param(bool, True),
        "cfl": Param(float, 0.25, check=_positive),
        "frame_every": Param(int, 1, check=_at_least(1)),
        "floor_factor": Param(float, 2.0, check=_positive),
        "delta_alpha": Param(float, optional=True, check=_nonnegative),
        "max_steps": Param(int, optional=True, check=_at_least(1)),
    },
}

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _convert(key: str, raw: str, spec: Param) -> Any:
    text = raw.strip()
    if spec.optional and text.lower() == "none":
        return None
    try:
        if spec.kind is bool:
            low = text.lower()
            if low not in _TRUE | _FALSE:
                raise ValueError(text)
            value: Any = low in _TRUE
        elif spec.kind is int:
            value = int(text)
        elif spec.kind is float:
            value = float(text)
            if not np.isfinite(value):
                raise ValueError(text)
        elif spec.kind == "choice":
            if text not in spec.choices:
                raise UsageError(f"{key}: must be one of {', '.join(spec.choices)}, got {text!r}")
            value = text
        else:
            value = text
    except ValueError as exc:
        if isinstance(exc, UsageError):
            raise
        raise UsageError(f"{key}: cannot parse {raw!r} as {getattr(spec.kind, '__name__', spec.kind)}") from None
    if spec.check is not None:
        msg = spec.check(value)
        if msg:
            raise UsageError(f"{key}: {msg}, got {value!r}")
    return value


def _format(value: Any) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved configuration of one command-line run."""

    subcommand: str
    params: Mapping[str, Any] = field(default_factory=dict)
    output_dir: Path = Path(".")
    seed: int = 0

    def __getitem__(self, key: str) -> Any:
        return self.params[key]

    def echo(self) -> str:
        """``key=value`` text of every resolved key, sorted, headed by the subcommand."""
        lines = [f"subcommand={self.subcommand}", f"output_dir={self.output_dir}", f"seed={self.seed}"]
        lines += [f"{k}={_format(self.params[k])}" for k in sorted(self.params)]
        return "\n".join(lines) + "\n"


def _pairs(text: str, origin: str) -> list[tuple[str, str]]:
    pairs = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{origin} line {n}: expected key=value, got {line!r}")
        key, value = line.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    return pairs


def parse_config(
    subcommand: str,
    text: str = "",
    overrides: Sequence[str] | Mapping[str, Any] = (),
    *,
    echo: bool = True,
) -> RunConfig:
    """Resolve file text and command-line overrides into a :class:`RunConfig`.

    Parameters
    ----------
    subcommand : {"certify", "snapshot", "evolve", "collapse"}
    text : str
        ``key=value`` lines.
    overrides : sequence of ``"key=value"`` strings or mapping
        Applied after ``text``.
    echo : bool
        Write the resolved configuration to ``<output_dir>/config.txt``.

    Raises
    ------
    UsageError
        Unknown subcommand or key, unparsable or out-of-range value,
        missing required key.  The message starts with the key.
    """
    if subcommand not in SCHEMAS:
        raise UsageError(f"subcommand: must be one of {', '.join(SUBCOMMANDS)}, got {subcommand!r}")
    schema = {**_COMMON, **SCHEMAS[subcommand]}
    pairs = _pairs(text, "config")
    if isinstance(overrides, Mapping):
        pairs += [(k, _format(v)) for k, v in overrides.items()]
    else:
        for item in overrides:
            pairs += _pairs(item, "override")
    raw: dict[str, str] = {}
    for key, value in pairs:
        if key not in schema:
            raise UsageError(f"{key}: unknown key for subcommand {subcommand}")
        raw[key] = value
    values: dict[str, Any] = {}
    for key, spec in schema.items():
        if key in raw:
            values[key] = _convert(key, raw[key], spec)
        elif spec.required:
            raise UsageError(f"{key}: required key is missing")
        else:
            values[key] = spec.default
    output_dir = Path(values.pop("output_dir"))
    seed = values.pop("seed")
    if subcommand == "collapse":
        _scenario_config(values)
    if subcommand in ("snapshot", "evolve") and values["source"] == "curve" and not values["curve_file"]:
        raise UsageError("curve_file: required when source=curve")
    config = RunConfig(subcommand, values, output_dir, seed)
    if echo:
        write_config_echo(config)
    return config


def write_config_echo(config: RunConfig) -> Path:
    path = config.output_dir / "config.txt"
    try:
        config.output_dir.mkdir(parents=True, exist_ok=True)
        path.write_text(config.echo())
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def _scenario_config(values: Mapping[str, Any]) -> ScenarioConfig:
    try:
        return ScenarioConfig(**values)
    except UsageError:
        raise
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from exc


# ---------------------------------------------------------------------------
# output


@dataclass
class FieldSnapshot:
    """Velocity on a lattice, optionally with the bad/good split of each component."""

    points: np.ndarray
    velocity: np.ndarray
    decompositions: list[VelocityDecomposition | None] | None = None

    def csv_lines(self) -> list[str]:
        """Header plus one row per lattice point; split columns are ``nan`` where not computed."""
        lines = [CSV_HEADER]
        for k, (p, u) in enumerate(zip(self.points, self.velocity)):
            d = self.decompositions[k] if self.decompositions is not None else None
            if d is not None:
                lines.append(d.csv_row(p))
            else:
                vals = (p[0], p[1], u[0], u[1]) + (float("nan"),) * 4
                lines.append(",".join(repr(float(v)) for v in vals))
        return lines


def _write(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_plot_data(data: Any, output_dir: str | Path) -> list[Path]:
    """Write a trajectory, field snapshot, certificate list or collapse report.

    File names: ``frame_<index>_patch_<k>.curve`` and ``diagnostics.csv``
    for trajectories, ``snapshot.csv`` for fields, ``certificates.txt``
    (one line per certificate) for certificate lists.  Collapse reports
    use :func:`write_collapse_report` without replacing ``config.txt``.

    Raises
    ------
    OSError
        On any write failure; the message names the path.
    """
    out = Path(output_dir)
    if not out.is_dir():
        raise OSError(f"output directory {out} does not exist")
    written: list[Path] = []
    if isinstance(data, Trajectory):
        for i, (_, system, _) in enumerate(data.frames):
            for k, curve in enumerate(system.patches):
                path = out / f"frame_{i:03d}_patch_{k}.curve"
                try:
                    write_curve(path, curve)
                except OSError as exc:
                    raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
                written.append(path)
        rows = [DIAGNOSTICS_HEADER]
        for t, diag in data.diagnostics:
            rows += diag.csv_rows(t)
        written.append(out / "diagnostics.csv")
        _write(written[-1], "\n".join(rows) + "\n")
        summary = f"status={data.status}\nt_final={data.final.time!r}\nsteps={len(data.diagnostics)}\n"
        if data.event is not None:
            e = data.event
            summary += f"event={e.kind} x1={e.location[0]!r} x2={e.location[1]!r} distance={e.distance!r} t={e.time!r}\n"
        written.append(out / "summary.txt")
        _write(written[-1], summary)
    elif isinstance(data, FieldSnapshot):
        written.append(out / "snapshot.csv")
        _write(written[-1], "\n".join(data.csv_lines()) + "\n")
    elif isinstance(data, CollapseReport):
        try:
            write_collapse_report(data, out, echo=False)
        except OSError as exc:
            raise OSError(f"cannot write report to {out}: {exc.strerror or exc}") from exc
        written.append(out / "diagnostics.csv")
    elif isinstance(data, (list, tuple)) and all(isinstance(c, BoundCertificate) for c in data):
        written.append(out / "certificates.txt")
        _write(written[-1], "".join(c.report_line() + "\n" for c in data))
    else:
        raise TypeError(f"cannot emit {type(data).__name__}")
    return written


# ---------------------------------------------------------------------------
# runs


def _disk(radius: float, center: tuple[float, float], n: int) -> PatchCurve:
    theta = 2.0 * np.pi * np.arange(n) / n
    return PatchCurve(np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)]))


def build_system(config: RunConfig) -> PatchSystem:
    """Patch system described by the ``source`` keys of a snapshot or evolve run."""
    p = config.params
    params = KernelParams(p["alpha"])
    try:
        if p["source"] == "scenario":
            base = build_initial_data(ScenarioConfig(epsilon=p["epsilon"], node_spacing=p["node_spacing"]))
            return PatchSystem(base.patches, params, "odd-x1", half_plane=True)
        if p["source"] == "disk":
            curves = [_disk(p["radius"], (p["center_x1"], p["center_x2"]), p["nodes"])]
        else:
            curves = []
            for name in str(p["curve_file"]).split(","):
                try:
                    curves.append(read_curve(name.strip()))
                except OSError as exc:
                    raise UsageError(f"curve_file: cannot read {name.strip()}: {exc.strerror or exc}") from exc
        return PatchSystem(curves, params, p["symmetry"], half_plane=p["half_plane"])
    except (GeometryError, DomainError) as exc:
        raise UsageError(f"source: {exc}") from exc


def run_certify(config: RunConfig) -> tuple[list[BoundCertificate], int]:
    p = config.params
    certs = default_certificate_suite(p["samples"], config.seed, p["grid_n"], p["truncation_R"])
    if p["uniform_points"] > 0:
        system = build_initial_data(ScenarioConfig(epsilon=p["uniform_epsilon"]))
        system = PatchSystem(system.patches, KernelParams(p["uniform_alpha"]), "odd-x1", half_plane=True)
        rng = np.random.default_rng(config.seed)
        pts = rng.uniform([0.0, 0.0], [4.0, 4.0], size=(p["uniform_points"], 2))
        certs.append(check_uniform_u(system, pts, cap=SPEED_CAP))
    emit_plot_data(certs, config.output_dir)
    lines = []
    for text in filter(None, (s.strip() for s in p["delta_alphas"].split(","))):
        try:
            a = float(text)
        except ValueError:
            raise UsageError(f"delta_alphas: cannot parse {text!r}") from None
        if not 0.0 < a < 1.0 / 24.0:
            raise UsageError(f"delta_alphas: each value must lie in (0, 1/24), got {a}")
        lines.append(f"delta_alpha {a!r} {search_delta_alpha(a)!r}\n")
    if lines:
        _write(config.output_dir / "delta_alpha.txt", "".join(lines))
    code = EXIT_OK if all(c.verdict for c in certs) else EXIT_ACCURACY
    return certs, code


def run_snapshot(config: RunConfig) -> tuple[FieldSnapshot, int]:
    p = config.params
    if not (p["x_min"] <= p["x_max"] and p["y_min"] <= p["y_max"]):
        raise UsageError("x_max: grid bounds must satisfy x_min <= x_max and y_min <= y_max")
    system = build_system(config)
    grid = GridSpec(p["x_min"], p["x_max"], p["y_min"], p["y_max"], p["nx"], p["ny"])
    pts = grid.points()
    u = velocity_field_snapshot(system, grid).reshape(-1, 2)
    decomps = None
    if p["decompose"]:
        if not (system.odd and system.half_plane):
            raise UsageError("decompose: needs symmetry=odd-x1 and half_plane=true")
        decomps = [
            velocity_odd_system(system, x) if x[0] > 0.0 and x[1] > 0.0 else None for x in pts
        ]
    snap = FieldSnapshot(pts, u, decomps)
    emit_plot_data(snap, config.output_dir)
    return snap, EXIT_OK


def run_evolve(config: RunConfig) -> tuple[Trajectory, int]:
    p = config.params
    system = build_system(config)
    cfl = p["cfl"] if p["cfl"] > 0.0 else None
    traj = run(
        system, p["t_end"], p["dt"], cfl=cfl, h_min=p["h_min"],
        frame_every=p["frame_every"], max_steps=p["max_steps"],
    )
    emit_plot_data(traj, config.output_dir)
    return traj, EXIT_SINGULARITY if traj.event is not None else EXIT_OK


def run_collapse(config: RunConfig) -> tuple[CollapseReport, int]:
    report = run_collapse_experiment(_scenario_config(config.params))
    emit_plot_data(report, config.output_dir)
    return report, EXIT_SINGULARITY if report.event is not None else EXIT_OK


RUNNERS = {"certify": run_certify, "snapshot": run_snapshot, "evolve": run_evolve, "collapse": run_collapse}


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2; usage errors use 1
        raise UsageError(message)


def _argument_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sqgpatch", description="Patch evolution and bound certification for the generalized SQG family.")
    parser.add_argument("subcommand", choices=SUBCOMMANDS)
    parser.add_argument("--config", help="key=value configuration file")
    parser.add_argument("--output-dir", help="directory for all outputs")
    parser.add_argument("--seed", help="seed of the random generator")
    parser.add_argument("overrides", nargs="*", metavar="key=value", help="overrides applied after the file")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand and return its exit status."""
    try:
        args = _argument_parser().parse_intermixed_args(argv)
        text = ""
        if args.config:
            try:
                text = Path(args.config).read_text()
            except OSError as exc:
                raise UsageError(f"config: cannot read {args.config}: {exc.strerror or exc}") from exc
        overrides = list(args.overrides)
        if args.output_dir is not None:
            overrides.append(f"output_dir={args.output_dir}")
        if args.seed is not None:
            overrides.append(f"seed={args.seed}")
        config = parse_config(args.subcommand, text, overrides)
        result, code = RUNNERS[config.subcommand](config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AccuracyError as exc:
        print(f"accuracy error: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _report(config, result)
    return code


def _report(config: RunConfig, result: Any) -> None:
    if isinstance(result, list):
        failed = sum(not c.verdict for c in result)
        print(f"{len(result)} certificates, {failed} failed; written to {config.output_dir / 'certificates.txt'}")
    elif isinstance(result, FieldSnapshot):
        print(f"{len(result.points)} points written to {config.output_dir / 'snapshot.csv'}")
    elif isinstance(result, Trajectory):
        print(f"status={result.status} t={result.final.time!r} frames={len(result.frames)}")
    elif isinstance(result, CollapseReport):
        print(f"{result.summary_line()} t={result.frames[-1].t!r} gap={result.frames[-1].gap!r}")
