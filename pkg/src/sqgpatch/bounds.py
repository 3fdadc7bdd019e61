"""Numerical certificates for the velocity estimates of the odd half-plane reduction.

Every check returns a :class:`BoundCertificate`.  A certificate records the
smallest signed slack ``bound - value`` (oriented so that positive means
the inequality holds) over its samples, the sample where it occurs and a
quadrature error budget.  Checks never abort on a failed inequality.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Literal, Sequence

import numpy as np
from numpy.typing import ArrayLike

from .biot_savart import KernelParams, kernel_terms, odd_decomposition
from .errors import DomainError
from .geometry import build_triangle_A

Branch = Literal["a", "b"]
ROUNDOFF = 1e-12
DEFAULT_DELTA_GRID = (0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001, 5e-4, 2e-4, 1e-4)


@dataclass(frozen=True)
class BoundCertificate:
    """Outcome of a numerical inequality check.

    Attributes
    ----------
    name : str
    alpha : float
    sample_count : int
    worst_margin : float
        Smallest slack ``bound - value`` (positive when the inequality holds).
    worst_point : tuple of float
        Evaluation point of the smallest slack.
    quadrature_error_budget : float
        Error allowance at the worst point (quadrature plus truncation).
    skipped : int
        Degenerate samples excluded from the check.
    violations : int
        Samples whose slack is below ``-(budget + 1e-12 * scale)``.
    """

    name: str
    alpha: float
    sample_count: int
    worst_margin: float
    worst_point: tuple[float, float]
    quadrature_error_budget: float = 0.0
    skipped: int = 0
    violations: int = 0

    @property
    def verdict(self) -> bool:
        """Pass when the margin exceeds the budget; an exact zero margin with zero budget also passes."""
        m, b = self.worst_margin, self.quadrature_error_budget
        return bool(m > b or (b == 0.0 and m == 0.0))

    def report_line(self) -> str:
        x1, x2 = self.worst_point
        verdict = "pass" if self.verdict else "fail"
        return f"{self.name} {self.alpha!r} {self.sample_count} {self.worst_margin!r} {x1!r} {x2!r} {verdict}"


def fold_certificates(name: str, certificates: Iterable[BoundCertificate]) -> BoundCertificate:
    """Combine certificates by keeping the one with the smallest ``margin - budget``.

    Ties keep the earliest certificate, so the result is independent of how
    a sweep was partitioned as long as the input order is fixed.
    """
    certs = list(certificates)
    if not certs:
        raise ValueError("nothing to fold")
    worst = certs[0]
    for c in certs[1:]:
        if c.worst_margin - c.quadrature_error_budget < worst.worst_margin - worst.quadrature_error_budget:
            worst = c
    return BoundCertificate(
        name=name,
        alpha=worst.alpha,
        sample_count=sum(c.sample_count for c in certs),
        worst_margin=worst.worst_margin,
        worst_point=worst.worst_point,
        quadrature_error_budget=worst.quadrature_error_budget,
        skipped=sum(c.skipped for c in certs),
        violations=sum(c.violations for c in certs),
    )


def _check_alpha(alpha: float, upper: float = 0.5) -> None:
    if not 0.0 < alpha < upper:
        raise DomainError(f"alpha must lie in (0, {upper}), got {alpha}")


def _point(x: ArrayLike) -> tuple[float, float]:
    x1, x2 = (float(v) for v in np.asarray(x, dtype=float))
    if x1 < 0.0 or x2 < 0.0:
        raise DomainError("point must lie in the closed quadrant")
    return x1, x2


# ---------------------------------------------------------------------------
# constants


def bad_constant(alpha: float) -> float:
    """``(1/alpha) (1/(1 - 2 alpha) - 2^(-alpha))``."""
    return (1.0 / (1.0 - 2.0 * alpha) - 2.0 ** (-alpha)) / alpha


def good_constant_u1(alpha: float) -> float:
    """``1 / (6 * 20^alpha * alpha)``."""
    return 1.0 / (6.0 * 20.0**alpha * alpha)


def good_constant_u2(alpha: float) -> float:
    """``1 / (5 * 8^alpha * alpha)``."""
    return 1.0 / (5.0 * 8.0**alpha * alpha)


def drift_constant_expression(alpha: ArrayLike) -> np.ndarray | float:
    """``-1/(6 * 20^alpha) + 1/(1 - 2 alpha) - 2^(-alpha)``; drift needs this below ``-1/50``."""
    a = np.asarray(alpha, dtype=float)
    return -1.0 / (6.0 * 20.0**a) + 1.0 / (1.0 - 2.0 * a) - 2.0 ** (-a)


def check_drift_constant(alphas: ArrayLike | None = None) -> BoundCertificate:
    """Check ``expression(alpha) < -1/50`` and that the expression increases along the grid.

    The default grid is 100 equispaced values ending at ``1/24``.
    """
    grid = np.linspace(1.0 / 2400.0, 1.0 / 24.0, 100) if alphas is None else np.asarray(alphas, dtype=float)
    values = drift_constant_expression(grid)
    slack = -1.0 / 50.0 - values
    increments = np.diff(values)
    margins = np.concatenate([slack, increments])
    k = int(np.argmin(margins))
    where = grid[k] if k < len(grid) else grid[k - len(grid) + 1]
    violations = int(np.sum(slack <= 0.0) + np.sum(increments <= 0.0))
    return BoundCertificate(
        "drift_constant", float(grid[-1]), len(grid), float(margins[k]), (float(where), 0.0), 0.0, 0, violations
    )


def holder_constant(alpha: float, sup_norm: float, extension_l1: float) -> float:
    """``8 pi / (alpha (1 - 2 alpha)) sup|omega| + ||eta||_1`` for the odd or full extension ``eta``."""
    return 8.0 * np.pi / (alpha * (1.0 - 2.0 * alpha)) * sup_norm + extension_l1


# ---------------------------------------------------------------------------
# sign lemma


def check_sign_lemma(samples: int, alpha: float, rng_seed: int = 0, box: float = 10.0) -> BoundCertificate:
    """Check the four sign properties of the reduced kernels at random pairs.

    For ``x, y`` uniform in ``(0, box)^2``:

    (a) ``K1 >= K11 - K12``;  (b) ``sgn(y2 - x2) (K11 - K12) >= 0``;
    (c) ``K2 >= K21 - K24``;  (d) ``sgn(y1 - x1) (K21 - K24) >= 0``.

    Samples with ``y2 = x2`` (for (b)) or ``y1 = x1`` (for (d)) are skipped
    and counted.
    """
    _check_alpha(alpha)
    if samples < 1:
        raise ValueError("samples must be positive")
    rng = np.random.default_rng(rng_seed)
    x = rng.uniform(0.0, box, size=(samples, 2))
    y = rng.uniform(0.0, box, size=(samples, 2))
    k = kernel_terms(x, y, KernelParams(alpha))
    k11, k12, k13, k14, k21, k22, k23, k24 = k.T
    sign2 = np.sign(y[:, 1] - x[:, 1])
    sign1 = np.sign(y[:, 0] - x[:, 0])
    slack = np.stack(
        [
            (k11 - k12 - k13 + k14) - (k11 - k12),
            np.where(sign2 == 0.0, np.inf, sign2 * (k11 - k12)),
            (k21 + k22 - k23 - k24) - (k21 - k24),
            np.where(sign1 == 0.0, np.inf, sign1 * (k21 - k24)),
        ],
        axis=1,
    )
    scale = np.max(np.abs(k), axis=1)
    violations = int(np.sum(slack < -ROUNDOFF * scale[:, None]))
    skipped = int(np.sum(sign2 == 0.0) + np.sum(sign1 == 0.0))
    per_sample = slack.min(axis=1)
    i = int(np.argmin(per_sample))
    return BoundCertificate(
        "sign_lemma", alpha, samples, float(per_sample[i]), (float(x[i, 0]), float(x[i, 1])), 0.0, skipped, violations
    )


# ---------------------------------------------------------------------------
# bad part


def bad_tail_bound(x: ArrayLike, alpha: float, truncation_R: float, branch: Branch = "a") -> float:
    """Bound on the bad-part integral over the strip beyond ``truncation_R``.

    For branch (a) the integrand of ``u1_bad`` on ``y2 < x2`` is at most
    ``12 x1 x2 y1 (y1 - x1)^(-4 - 2 alpha)`` in absolute value; integrating
    over ``y1 > R >= 2 x1`` gives ``12 x1 x2^2 (R - x1)^(-2 - 2 alpha)``.
    Branch (b) is the same with the coordinates exchanged.
    """
    x1, x2 = _point(x)
    if branch == "b":
        x1, x2 = x2, x1
    if truncation_R < 2.0 * x1:
        return float("inf")
    return 12.0 * x1 * x2 * x2 * (truncation_R - x1) ** (-2.0 - 2.0 * alpha)


def check_bad_bound(
    x: ArrayLike,
    alpha: float,
    truncation_R: float = 10.0,
    branch: Branch = "a",
    tol: float = 1e-12,
) -> BoundCertificate:
    """Check the bad-part bound for the extremal scalar ``omega = 1`` on a strip.

    Branch (a), ``x2 <= x1``: ``u1_bad(x) <= C x1^(1 - 2 alpha)`` for
    ``omega = 1`` on ``(0, R) x (0, x2)``.  Branch (b), ``x1 <= x2``:
    ``u2_bad(x) >= -C x2^(1 - 2 alpha)`` for ``omega = 1`` on
    ``(0, x1) x (0, R)``.  Here ``C = (1/alpha)(1/(1 - 2 alpha) - 2^(-alpha))``.
    The strip beyond ``R`` enters the budget through :func:`bad_tail_bound`.
    """
    _check_alpha(alpha)
    x1, x2 = _point(x)
    R = float(truncation_R)
    c = bad_constant(alpha)
    if branch == "a":
        if x2 > x1:
            raise DomainError("branch (a) needs x2 <= x1")
        strip = np.array([[0.0, 0.0], [R, 0.0], [R, x2], [0.0, x2]])
        empty = x2 == 0.0
        bound = c * x1 ** (1.0 - 2.0 * alpha)
    elif branch == "b":
        if x1 > x2:
            raise DomainError("branch (b) needs x1 <= x2")
        strip = np.array([[0.0, 0.0], [x1, 0.0], [x1, R], [0.0, R]])
        empty = x1 == 0.0
        bound = c * x2 ** (1.0 - 2.0 * alpha)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    tail = bad_tail_bound((x1, x2), alpha, R, branch)
    if empty:
        value, err = 0.0, 0.0
    else:
        d = odd_decomposition([(strip, 1.0)], (x1, x2), alpha, tol)
        value = d.u1_bad if branch == "a" else -d.u2_bad
        err = d.error_estimate
    return BoundCertificate(f"bad_bound_{branch}", alpha, 1, bound - value, (x1, x2), tail + err)


def bad_bound_grid(n: int = 20, upper: float = 1.0) -> list[tuple[float, float]]:
    """``n x n`` points with ``x2 <= x1 <= upper``: ``x1 = upper k/n``, ``x2 = x1 j/(n-1)``."""
    pts = []
    for k in range(1, n + 1):
        x1 = upper * k / n
        for j in range(n):
            pts.append((x1, x1 * (j / (n - 1))))
    return pts


def sweep_bad_bound(alpha: float, n: int = 20, truncation_R: float = 10.0, branch: Branch = "a") -> BoundCertificate:
    """Fold of :func:`check_bad_bound` over :func:`bad_bound_grid` (swapped for branch (b))."""
    pts = bad_bound_grid(n)
    if branch == "b":
        pts = [(b, a) for a, b in pts]
    return fold_certificates(
        f"bad_bound_{branch}_grid", (check_bad_bound(p, alpha, truncation_R, branch) for p in pts)
    )


# ---------------------------------------------------------------------------
# good part and drift


def good_parts(x: ArrayLike, alpha: float, tol: float = 1e-12) -> tuple[float, float, float]:
    """``(u1_good, u2_good, error)`` at ``x`` for ``omega`` the indicator of the triangle ``A(x)``."""
    x1, x2 = _point(x)
    tri = build_triangle_A((x1, x2)).polygon()
    d = odd_decomposition([(tri, 1.0)], (x1, x2), alpha, tol)
    return d.u1_good, d.u2_good, d.error_estimate


def check_good_bound(x: ArrayLike, alpha: float, branch: Branch = "a", tol: float = 1e-12) -> BoundCertificate:
    """Check the good-part bound for ``omega`` the indicator of ``A(x)``.

    Branch (a): ``u1_good(x) <= -x1^(1 - 2 alpha) / (6 * 20^alpha * alpha)``.
    Branch (b): ``u2_good(x) >= x2^(1 - 2 alpha) / (5 * 8^alpha * alpha)``.
    The inequalities are small-``x`` statements; failures at large ``x``
    are reported, not raised.
    """
    _check_alpha(alpha)
    x1, x2 = _point(x)
    u1g, u2g, err = good_parts((x1, x2), alpha, tol)
    if branch == "a":
        margin = -good_constant_u1(alpha) * x1 ** (1.0 - 2.0 * alpha) - u1g
    elif branch == "b":
        margin = u2g - good_constant_u2(alpha) * x2 ** (1.0 - 2.0 * alpha)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    return BoundCertificate(f"good_bound_{branch}", alpha, 1, float(margin), (x1, x2), err)


def check_prop_drift(x: ArrayLike, alpha: float, branch: Branch = "a", tol: float = 1e-12) -> BoundCertificate:
    """Check the combined drift bound with the analytic bad part and the extremal good part.

    Branch (a), ``x2 <= x1``:
    ``C x1^(1 - 2 alpha) + u1_good(x) <= -x1^(1 - 2 alpha) / (50 alpha)``.
    Branch (b), ``x1 <= x2``:
    ``-C x2^(1 - 2 alpha) + u2_good(x) >= x2^(1 - 2 alpha) / (50 alpha)``.
    """
    _check_alpha(alpha, 1.0 / 24.0)
    x1, x2 = _point(x)
    u1g, u2g, err = good_parts((x1, x2), alpha, tol)
    c = bad_constant(alpha)
    if branch == "a":
        if x2 > x1:
            raise DomainError("branch (a) needs x2 <= x1")
        s = x1 ** (1.0 - 2.0 * alpha)
        margin = -s / (50.0 * alpha) - (c * s + u1g)
    elif branch == "b":
        if x1 > x2:
            raise DomainError("branch (b) needs x1 <= x2")
        s = x2 ** (1.0 - 2.0 * alpha)
        margin = (-c * s + u2g) - s / (50.0 * alpha)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    return BoundCertificate(f"prop_drift_{branch}", alpha, 1, float(margin), (x1, x2), err)


def delta_probe_points(g: float) -> list[tuple[Branch, tuple[float, float]]]:
    """Points tested at grid value ``g``: ``(g, g/2)`` and ``(g, g)`` for (a), swapped for (b)."""
    return [("a", (g, 0.5 * g)), ("a", (g, g)), ("b", (0.5 * g, g)), ("b", (g, g))]


def _passes_at(alpha: float, g: float) -> bool:
    for branch, p in delta_probe_points(g):
        if not check_good_bound(p, alpha, branch).verdict:
            return False
        if alpha < 1.0 / 24.0 and not check_prop_drift(p, alpha, branch).verdict:
            return False
    return True


@lru_cache(maxsize=64)
def _search(alpha: float, grid: tuple[float, ...]) -> float:
    ok = [_passes_at(alpha, g) for g in grid]
    # largest g such that every grid value at or below g passes
    best = 0.0
    for g, good in zip(reversed(grid), reversed(ok)):
        if not good:
            break
        best = g
    return best


def search_delta_alpha(alpha: float, grid: Sequence[float] | None = None) -> float:
    """Empirical smallness threshold for the good-part and drift bounds.

    Returns the largest grid value ``delta`` such that the good-part checks
    (and the drift checks when ``alpha < 1/24``) pass at every probe point
    of every grid value ``<= delta``, or 0 when none qualifies.
    """
    _check_alpha(alpha)
    values = tuple(float(g) for g in (DEFAULT_DELTA_GRID if grid is None else grid))
    if any(not 0.0 < g < 1.0 for g in values) or any(a <= b for a, b in zip(values, values[1:])):
        raise ValueError("grid must be strictly decreasing inside (0, 1)")
    return _search(float(alpha), values)


# ---------------------------------------------------------------------------
# uniform bound


def check_uniform_u(system, points: ArrayLike, cap: float | None = None) -> BoundCertificate:
    """Check ``max |u| <= 2 pi / (1 - 2 alpha) sup|omega| + ||eta||_1`` over ``points``.

    ``eta`` is the extension of the scalar over all image copies.  With
    ``cap`` the tighter of the two bounds is used.  The budget allows a
    relative quadrature error of 1e-9 in the velocity.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    bound = system.uniform_velocity_bound()
    if cap is not None:
        bound = min(bound, float(cap))
    if len(pts) == 0:
        raise ValueError("need at least one point")
    speed = np.hypot(*system.velocity(pts).T) if system.patches else np.zeros(len(pts))
    i = int(np.argmax(speed))
    return BoundCertificate(
        "uniform_u", system.params.alpha, len(pts), float(bound - speed[i]),
        (float(pts[i, 0]), float(pts[i, 1])), 1e-9 * float(speed[i]),
    )


def default_certificate_suite(
    samples: int = 100_000, seed: int = 0, grid_n: int = 20, truncation_R: float = 10.0
) -> list[BoundCertificate]:
    """The standard set of certificates emitted by the command-line ``certify`` run."""
    certs = [check_sign_lemma(samples, a, seed + k) for k, a in enumerate((0.01, 0.05, 0.1, 0.2, 0.4))]
    for a in (1.0 / 30.0, 1.0 / 24.0 - 1e-6):
        certs.append(sweep_bad_bound(a, grid_n, truncation_R, "a"))
    certs.append(check_drift_constant())
    for a in (1.0 / 30.0, 0.02):
        for x1 in (1e-3, 1e-4):
            for branch, p in (("a", (x1, 0.5 * x1)), ("b", (0.5 * x1, x1))):
                certs.append(check_good_bound(p, a, branch))
                certs.append(check_prop_drift(p, a, branch))
    return certs
