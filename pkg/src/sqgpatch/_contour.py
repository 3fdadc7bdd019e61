"""Compiled panel quadrature for the contour form of the velocity law.

For a closed counter-clockwise curve the velocity induced by a unit patch is

    u(x) = closed integral of phi(|x - z|) dz,

with ``phi(r) = (1 - r**(-2 alpha)) / (2 alpha)`` for ``alpha > 0`` and
``phi(r) = log r`` for ``alpha = 0``.  The constant in ``phi`` integrates to
zero around a closed curve; it is kept so that ``phi`` is continuous in
``alpha``.

Each panel is a cubic in ``t`` in ``[0, 1]``.  Far panels use 2, 4 or 8
point Gauss-Legendre rules depending on distance, nearby panels are bisected
adaptively and panels that contain the target (at an end or in the
interior) use product rules that absorb the kernel singularity: Gauss-Jacobi with weight ``t**(-2 alpha)``
for ``alpha > 0`` and an exact ``log t`` moment for ``alpha = 0``.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

FAR_RATIO = 16.0
MID_RATIO = 4.0
NEAR_RATIO = 1.5
SPLIT_RATIO = 3.0
MAX_DEPTH = 60


@njit(cache=True, inline="always")
def _phi(r2, alpha):
    if alpha == 0.0:
        return 0.5 * math.log(r2)
    return -math.expm1(-alpha * math.log(r2)) / (2.0 * alpha)


@njit(cache=True)
def _gl_piece(x0, x1, c, a, b, alpha, delta2, gt, gw, acc):
    """Gauss-Legendre rule for the panel restricted to ``[a, b]``."""
    h = b - a
    for k in range(gt.shape[0]):
        t = a + h * gt[k]
        zx = c[0, 0] + t * (c[1, 0] + t * (c[2, 0] + t * c[3, 0]))
        zy = c[0, 1] + t * (c[1, 1] + t * (c[2, 1] + t * c[3, 1]))
        dx = c[1, 0] + t * (2.0 * c[2, 0] + 3.0 * t * c[3, 0])
        dy = c[1, 1] + t * (2.0 * c[2, 1] + 3.0 * t * c[3, 1])
        rx = x0 - zx
        ry = x1 - zy
        f = _phi(rx * rx + ry * ry + delta2, alpha) * gw[k] * h
        acc[0] += f * dx
        acc[1] += f * dy


@njit(cache=True)
def _restrict(c, a, b, out):
    """Coefficients of ``s -> z(a + (b - a) s)``."""
    h = b - a
    for d in range(2):
        a0, a1, a2, a3 = c[0, d], c[1, d], c[2, d], c[3, d]
        out[0, d] = a0 + a * (a1 + a * (a2 + a * a3))
        out[1, d] = h * (a1 + a * (2.0 * a2 + 3.0 * a * a3))
        out[2, d] = h * h * (a2 + 3.0 * a * a3)
        out[3, d] = h * h * h * a3


@njit(cache=True)
def _endpoint_singular(c, alpha, gt, gw, jt, jw, acc, sign):
    """Integral over the panel with the target at ``z(0)``."""
    b1x, b1y = c[1, 0], c[1, 1]
    b2x, b2y = c[2, 0], c[2, 1]
    b3x, b3y = c[3, 0], c[3, 1]
    if alpha == 0.0:
        # int_0^1 log(t) z'(t) dt is exact; the remainder log|w| is smooth
        sx = -(b1x + 0.5 * b2x + b3x / 3.0)
        sy = -(b1y + 0.5 * b2y + b3y / 3.0)
        for k in range(gt.shape[0]):
            t = gt[k]
            wx = b1x + t * (b2x + t * b3x)
            wy = b1y + t * (b2y + t * b3y)
            dx = b1x + t * (2.0 * b2x + 3.0 * t * b3x)
            dy = b1y + t * (2.0 * b2y + 3.0 * t * b3y)
            f = 0.5 * math.log(wx * wx + wy * wy) * gw[k]
            sx += f * dx
            sy += f * dy
    else:
        inv = 1.0 / (2.0 * alpha)
        sx = (b1x + b2x + b3x) * inv
        sy = (b1y + b2y + b3y) * inv
        for k in range(jt.shape[0]):
            t = jt[k]
            wx = b1x + t * (b2x + t * b3x)
            wy = b1y + t * (b2y + t * b3y)
            dx = b1x + t * (2.0 * b2x + 3.0 * t * b3x)
            dy = b1y + t * (2.0 * b2y + 3.0 * t * b3y)
            f = math.exp(-alpha * math.log(wx * wx + wy * wy)) * jw[k] * inv
            sx -= f * dx
            sy -= f * dy
    acc[0] += sign * sx
    acc[1] += sign * sy


@njit(cache=True)
def _closest_parameter(x0, x1, c):
    best_t = 0.0
    best_d = 1e300
    for k in range(17):
        t = k / 16.0
        zx = c[0, 0] + t * (c[1, 0] + t * (c[2, 0] + t * c[3, 0]))
        zy = c[0, 1] + t * (c[1, 1] + t * (c[2, 1] + t * c[3, 1]))
        d = (zx - x0) ** 2 + (zy - x1) ** 2
        if d < best_d:
            best_d = d
            best_t = t
    t = best_t
    for _ in range(12):
        zx = c[0, 0] + t * (c[1, 0] + t * (c[2, 0] + t * c[3, 0]))
        zy = c[0, 1] + t * (c[1, 1] + t * (c[2, 1] + t * c[3, 1]))
        dx = c[1, 0] + t * (2.0 * c[2, 0] + 3.0 * t * c[3, 0])
        dy = c[1, 1] + t * (2.0 * c[2, 1] + 3.0 * t * c[3, 1])
        ddx = 2.0 * c[2, 0] + 6.0 * t * c[3, 0]
        ddy = 2.0 * c[2, 1] + 6.0 * t * c[3, 1]
        g = (zx - x0) * dx + (zy - x1) * dy
        gp = dx * dx + dy * dy + (zx - x0) * ddx + (zy - x1) * ddy
        if gp <= 0.0:
            break
        tn = min(1.0, max(0.0, t - g / gp))
        if abs(tn - t) < 1e-16:
            t = tn
            break
        t = tn
    zx = c[0, 0] + t * (c[1, 0] + t * (c[2, 0] + t * c[3, 0]))
    zy = c[0, 1] + t * (c[1, 1] + t * (c[2, 1] + t * c[3, 1]))
    return t, math.sqrt((zx - x0) ** 2 + (zy - x1) ** 2)


@njit(cache=True)
def _near_panel(x0, x1, c, speed, alpha, delta2, tol, gt, gw, jt, jw, acc, work, stack):
    if delta2 == 0.0:
        d0 = math.hypot(x0 - c[0, 0], x1 - c[0, 1])
        if d0 <= tol:
            _endpoint_singular(c, alpha, gt, gw, jt, jw, acc, 1.0)
            return
        ex = c[0, 0] + c[1, 0] + c[2, 0] + c[3, 0]
        ey = c[0, 1] + c[1, 1] + c[2, 1] + c[3, 1]
        if math.hypot(x0 - ex, x1 - ey) <= tol:
            _restrict(c, 1.0, 0.0, work)
            _endpoint_singular(work, alpha, gt, gw, jt, jw, acc, -1.0)
            return
        ts, ds = _closest_parameter(x0, x1, c)
        if ds <= tol and ts > 0.0 and ts < 1.0:
            _restrict(c, ts, 0.0, work)
            _endpoint_singular(work, alpha, gt, gw, jt, jw, acc, -1.0)
            _restrict(c, ts, 1.0, work)
            _endpoint_singular(work, alpha, gt, gw, jt, jw, acc, 1.0)
            return
    top = 0
    stack[0, 0] = 0.0
    stack[0, 1] = 1.0
    stack[0, 2] = 0.0
    top = 1
    while top > 0:
        top -= 1
        a = stack[top, 0]
        b = stack[top, 1]
        depth = stack[top, 2]
        m = 0.5 * (a + b)
        zx = c[0, 0] + m * (c[1, 0] + m * (c[2, 0] + m * c[3, 0]))
        zy = c[0, 1] + m * (c[1, 1] + m * (c[2, 1] + m * c[3, 1]))
        dist = math.sqrt((x0 - zx) ** 2 + (x1 - zy) ** 2 + delta2)
        half = 0.5 * speed * (b - a)
        if dist > SPLIT_RATIO * half or depth >= MAX_DEPTH:
            _gl_piece(x0, x1, c, a, b, alpha, delta2, gt, gw, acc)
        else:
            stack[top, 0] = a
            stack[top, 1] = m
            stack[top, 2] = depth + 1.0
            stack[top + 1, 0] = m
            stack[top + 1, 1] = b
            stack[top + 1, 2] = depth + 1.0
            top += 2


@njit(cache=True)
def contour_velocity(
    targets,
    coef,
    factor,
    center,
    radius,
    length,
    speed,
    far2_z,
    far2_d,
    far4_z,
    far4_d,
    alpha,
    delta2,
    gt,
    gw,
    jt,
    jw,
    out,
):
    """Accumulate the velocity of all panels at all targets into ``out``.

    ``far*_z`` hold the Gauss points of each panel and ``far*_d`` the
    derivative times weight times panel factor, so far panels cost one
    kernel evaluation per point.
    """
    n_panels = coef.shape[0]
    acc = np.zeros(2)
    work = np.zeros((4, 2))
    stack = np.zeros((2 * MAX_DEPTH + 4, 3))
    for i in range(targets.shape[0]):
        x0 = targets[i, 0]
        x1 = targets[i, 1]
        tol = 1e-12 * (1.0 + abs(x0) + abs(x1))
        ux = 0.0
        uy = 0.0
        for p in range(n_panels):
            gx = x0 - center[p, 0]
            gy = x1 - center[p, 1]
            d = math.sqrt(gx * gx + gy * gy) - radius[p]
            if d > FAR_RATIO * length[p]:
                for k in range(2):
                    rx = x0 - far2_z[p, k, 0]
                    ry = x1 - far2_z[p, k, 1]
                    f = _phi(rx * rx + ry * ry + delta2, alpha)
                    ux += f * far2_d[p, k, 0]
                    uy += f * far2_d[p, k, 1]
            elif d > MID_RATIO * length[p]:
                for k in range(4):
                    rx = x0 - far4_z[p, k, 0]
                    ry = x1 - far4_z[p, k, 1]
                    f = _phi(rx * rx + ry * ry + delta2, alpha)
                    ux += f * far4_d[p, k, 0]
                    uy += f * far4_d[p, k, 1]
            elif d > NEAR_RATIO * length[p]:
                acc[0] = 0.0
                acc[1] = 0.0
                _gl_piece(x0, x1, coef[p], 0.0, 1.0, alpha, delta2, gt, gw, acc)
                ux += factor[p] * acc[0]
                uy += factor[p] * acc[1]
            else:
                acc[0] = 0.0
                acc[1] = 0.0
                _near_panel(x0, x1, coef[p], speed[p], alpha, delta2, tol, gt, gw, jt, jw, acc, work, stack)
                ux += factor[p] * acc[0]
                uy += factor[p] * acc[1]
        out[i, 0] += ux
        out[i, 1] += uy
