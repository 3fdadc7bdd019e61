from __future__ import annotations

import math

import numpy as np
import pytest

from helpers import circle_curve
from sqgpatch.biot_savart import KernelParams, kernel_terms
from sqgpatch.bounds import (
    BoundCertificate,
    bad_bound_grid,
    bad_constant,
    bad_tail_bound,
    check_bad_bound,
    check_drift_constant,
    check_good_bound,
    check_prop_drift,
    check_sign_lemma,
    check_uniform_u,
    default_certificate_suite,
    drift_constant_expression,
    fold_certificates,
    good_constant_u1,
    good_parts,
    search_delta_alpha,
)
from sqgpatch.errors import DomainError
from sqgpatch.evolution import PatchSystem
from sqgpatch.geometry import PatchCurve

# closed-form constants evaluated with mpmath at 40 digits
BAD_BOUND_AT_HALF_QUARTER = 1.5177082137088700271  # alpha = 1/24, x1 = 0.5
GOOD_BOUND_ALPHA_30 = -0.0071713734300869540166  # alpha = 1/30, x1 = 1e-3
DRIFT_BOUND_ALPHA_002 = -0.001318256738556407102  # alpha = 0.02, x1 = 1e-3
UNIFORM_BOUND_ALPHA_24 = 38.854383971468639793  # 2 pi / (11/12) + 2 * 16


# ---------------------------------------------------------------------------
# certificates


def test_report_line_format():
    c = BoundCertificate("demo", 0.1, 7, 0.25, (0.5, 0.125), 0.01)
    assert c.report_line() == "demo 0.1 7 0.25 0.5 0.125 pass"
    assert BoundCertificate("demo", 0.1, 7, 0.005, (0.5, 0.125), 0.01).report_line().endswith(" fail")


def test_verdict_rule():
    assert BoundCertificate("c", 0.1, 1, 1e-3, (0, 0), 1e-4).verdict
    assert not BoundCertificate("c", 0.1, 1, 1e-4, (0, 0), 1e-4).verdict
    assert not BoundCertificate("c", 0.1, 1, -1.0, (0, 0)).verdict
    # an exact zero margin with nothing to absorb (empty configuration) passes
    assert BoundCertificate("c", 0.1, 1, 0.0, (0, 0), 0.0).verdict


def test_fold_keeps_worst_and_earliest_tie():
    a = BoundCertificate("a", 0.1, 2, 0.5, (1, 1), 0.0, 1, 0)
    b = BoundCertificate("b", 0.1, 3, 0.2, (2, 2), 0.0, 0, 1)
    c = BoundCertificate("c", 0.1, 4, 0.2, (3, 3), 0.0, 0, 0)
    f = fold_certificates("all", [a, b, c])
    assert f.worst_point == (2, 2) and f.sample_count == 9 and f.skipped == 1 and f.violations == 1
    with pytest.raises(ValueError):
        fold_certificates("none", [])


# ---------------------------------------------------------------------------
# sign lemma


@pytest.mark.parametrize("alpha", [0.01, 0.2, 0.45])
def test_sign_lemma_vertical_pair(alpha):
    for h in (1e-3, 0.5, 4.0):
        k = kernel_terms((1.0, 1.0), (1.0, 1.0 + h), KernelParams(alpha))
        assert k[0] - k[1] >= 0.0


def test_sign_lemma_equal_heights_is_zero():
    k = kernel_terms((1.0, 1.0), (2.5, 1.0), KernelParams(0.3))
    assert k[0] - k[1] == 0.0


def test_sign_lemma_seed_42():
    cert = check_sign_lemma(100_000, 0.1, rng_seed=42)
    assert cert.verdict and cert.violations == 0 and cert.sample_count == 100_000


def test_sign_lemma_reproducible():
    a = check_sign_lemma(5000, 0.05, rng_seed=9)
    b = check_sign_lemma(5000, 0.05, rng_seed=9)
    assert a == b


def test_sign_lemma_rejects_bad_alpha():
    with pytest.raises(DomainError):
        check_sign_lemma(10, 0.5)


# ---------------------------------------------------------------------------
# bad part


def test_bad_bound_closed_form():
    alpha = 1.0 / 24.0
    assert bad_constant(alpha) * 0.5 ** (1 - 2 * alpha) == pytest.approx(BAD_BOUND_AT_HALF_QUARTER, rel=1e-14)
    cert = check_bad_bound((0.5, 0.25), alpha)
    assert cert.verdict and cert.worst_margin < BAD_BOUND_AT_HALF_QUARTER


def test_bad_bound_empty_strip():
    cert = check_bad_bound((0.5, 0.0), 1.0 / 30.0)
    assert cert.worst_margin == pytest.approx(bad_constant(1.0 / 30.0) * 0.5 ** (1 - 1.0 / 15.0), rel=1e-14)
    assert cert.verdict


def test_bad_bound_positive_margin_alpha_01():
    cert = check_bad_bound((0.2, 0.2), 0.1, truncation_R=10.0)
    assert cert.worst_margin > 0.0 and cert.verdict
    assert cert.quadrature_error_budget >= bad_tail_bound((0.2, 0.2), 0.1, 10.0)


def test_bad_tail_bound_validity():
    assert math.isinf(bad_tail_bound((6.0, 1.0), 0.1, 10.0))
    assert bad_tail_bound((1.0, 0.5), 0.1, 10.0) == pytest.approx(12 * 0.25 * 9.0 ** -2.2)


def test_bad_bound_branch_symmetry():
    for x in ((0.3, 0.1), (0.8, 0.8), (0.05, 0.01)):
        a = check_bad_bound(x, 1.0 / 30.0, branch="a")
        b = check_bad_bound(x[::-1], 1.0 / 30.0, branch="b")
        assert a.worst_margin == pytest.approx(b.worst_margin, abs=1e-10)


def test_bad_bound_domain_checks():
    with pytest.raises(DomainError):
        check_bad_bound((0.1, 0.2), 0.03, branch="a")
    with pytest.raises(DomainError):
        check_bad_bound((0.2, 0.1), 0.03, branch="b")


def test_bad_bound_grid_shape():
    pts = np.array(bad_bound_grid(20))
    assert pts.shape == (400, 2)
    assert np.all(pts[:, 1] <= pts[:, 0]) and pts[:, 0].max() == 1.0


# ---------------------------------------------------------------------------
# good part and drift


def test_good_bound_alpha_30_on_wall():
    alpha = 1.0 / 30.0
    bound = -good_constant_u1(alpha) * 1e-3 ** (1 - 2 * alpha)
    assert bound == pytest.approx(GOOD_BOUND_ALPHA_30, rel=1e-14)
    u1g, _, _ = good_parts((1e-3, 0.0), alpha)
    assert u1g <= bound
    assert check_good_bound((1e-3, 0.0), alpha).verdict


def test_good_bound_out_of_range_is_reported():
    cert = check_good_bound((0.5, 0.25), 1.0 / 30.0)
    assert isinstance(cert.verdict, bool)


@pytest.mark.xfail(strict=True, reason="the exact ratio drifts like 1 - x1^(2 alpha); 22% between 1e-3 and 1e-4")
def test_good_part_scaling_probe_twenty_percent():
    alpha = 1.0 / 30.0
    r = [good_parts((x1, 0.0), alpha)[0] / x1 ** (1 - 2 * alpha) for x1 in (1e-3, 1e-4)]
    assert abs(r[0] / r[1] - 1.0) < 0.2


def test_good_part_scaling_with_leading_correction():
    # near-field integral of r^(-1 - 2 alpha) from x1 to 1 gives x1^(1 - 2 alpha) (1 - x1^(2 alpha)) / (2 alpha)
    alpha = 1.0 / 30.0
    r = [good_parts((x1, 0.0), alpha)[0] / (x1 ** (1 - 2 * alpha) * (1 - x1 ** (2 * alpha))) for x1 in (1e-3, 1e-4, 1e-5)]
    assert abs(r[0] / r[1] - 1.0) < 0.05
    assert abs(r[1] / r[2] - 1.0) < abs(r[0] / r[1] - 1.0)


def test_drift_constant_expression():
    alpha = 1.0 / 24.0
    assert drift_constant_expression(alpha) < -1.0 / 50.0
    cert = check_drift_constant()
    assert cert.verdict and cert.violations == 0 and cert.sample_count == 100
    grid = np.linspace(1.0 / 2400.0, 1.0 / 24.0, 100)
    assert np.all(np.diff(drift_constant_expression(grid)) > 0)


def test_prop_drift_alpha_002():
    alpha = 0.02
    assert -(1e-3 ** (1 - 2 * alpha)) / (50 * alpha) == pytest.approx(DRIFT_BOUND_ALPHA_002, rel=1e-14)
    cert = check_prop_drift((1e-3, 5e-4), alpha)
    assert cert.verdict
    with pytest.raises(DomainError):
        check_prop_drift((1e-3, 5e-4), 0.05)


def test_search_delta_alpha():
    grid = (0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005)
    assert search_delta_alpha(1.0 / 30.0, grid) > 0.0
    # the good-part bounds get easier as alpha approaches 1/2
    assert search_delta_alpha(0.45, grid) == 0.5
    # at small alpha the drift bound fails on the whole grid
    assert search_delta_alpha(0.01, grid) == 0.0
    with pytest.raises(ValueError):
        search_delta_alpha(0.03, (0.1, 0.2))


def test_search_delta_alpha_monotonicity_probe(capsys):
    grid = (0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005)
    d1, d4 = search_delta_alpha(0.01, grid), search_delta_alpha(0.04, grid)
    # recorded, not asserted: the threshold need not be monotone in alpha
    print(f"delta(0.01)={d1} delta(0.04)={d4}")
    assert d1 >= 0.0 and d4 >= 0.0


# ---------------------------------------------------------------------------
# uniform bound


def _rectangle_curve(x0, x1, y0, y1, per_edge=40) -> PatchCurve:
    s = np.arange(per_edge) / per_edge
    c = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    return PatchCurve(np.concatenate([c[i] + s[:, None] * (c[(i + 1) % 4] - c[i]) for i in range(4)]))


def test_uniform_bound_constant():
    eps = 0.05
    system = PatchSystem((_rectangle_curve(eps, 4.0, 0.0, 4.0),), KernelParams(1.0 / 24.0), half_plane=True)
    bound = system.uniform_velocity_bound()
    assert bound <= UNIFORM_BOUND_ALPHA_24
    assert bound == pytest.approx(2 * math.pi / (11 / 12) + 2 * 4 * (4 - eps), rel=1e-3)
    pts = np.random.default_rng(0).uniform(0, 5, (200, 2))
    assert check_uniform_u(system, pts).verdict


def test_uniform_bound_empty_system():
    system = PatchSystem((), KernelParams(0.1))
    cert = check_uniform_u(system, [(0.3, 0.4)])
    assert cert.worst_margin == 0.0 and cert.verdict


def test_uniform_bound_disk():
    system = PatchSystem((circle_curve(128),), KernelParams(0.2))
    cert = check_uniform_u(system, circle_curve(64, 1.0).nodes)
    assert cert.verdict


def test_default_suite_composition():
    certs = default_certificate_suite(samples=200, grid_n=3)
    names = [c.name for c in certs]
    assert names.count("sign_lemma") == 5
    assert names.count("bad_bound_a_grid") == 2
    assert names.count("drift_constant") == 1
    assert names.count("good_bound_a") == 4 and names.count("prop_drift_b") == 4
    assert all(c.verdict for c in certs)
