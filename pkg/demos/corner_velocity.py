"""Velocity split near the corner where the patch meets the wall and the symmetry axis.

    python3 demos/corner_velocity.py [--alpha 0.03]

The patch fills the square (0, 1)^2 next to the corner; its odd mirror
image sits across the axis.  Near the wall the horizontal velocity
points toward the axis and shrinks like x1^(1 - 2 alpha) times the slowly
growing factor (1 - x1^(2 alpha)) / (2 alpha), so the time to reach the
axis stays finite.  The printout shows the part of u1 coming from sources
above the target (good, sign-definite) and the rest (bad).
"""

from __future__ import annotations

import argparse

import numpy as np

from sqgpatch.biot_savart import KernelParams, velocity_odd_system
from sqgpatch.bounds import bad_constant, good_constant_u1
from sqgpatch.evolution import PatchSystem
from sqgpatch.geometry import PatchCurve


def unit_square(per_edge: int = 32) -> PatchCurve:
    s = np.arange(per_edge) / per_edge
    corners = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    return PatchCurve(np.concatenate([corners[i] + s[:, None] * (corners[(i + 1) % 4] - corners[i]) for i in range(4)]))


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--alpha", type=float, default=0.03)
    args = parser.parse_args()
    alpha = args.alpha

    # the square touches the axis, so the odd system is built without placement checks
    system = PatchSystem((unit_square(),), KernelParams(alpha), "odd-x1", half_plane=True, check=False)
    print(f"alpha={alpha}: good-part constant {good_constant_u1(alpha):.4f}, bad-part constant {bad_constant(alpha):.4f}\n")
    print(f"{'x1':>8} {'u1':>12} {'u1 good':>12} {'u1 bad':>12} {'u1 / x1^(1-2a)':>16}")
    for x1 in (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4):
        d = velocity_odd_system(system, (x1, 0.5 * x1))
        print(f"{x1:8.0e} {d.u[0]:12.5e} {d.u1_good:12.5e} {d.u1_bad:12.5e} {d.u[0] / x1 ** (1 - 2 * alpha):16.4f}")


if __name__ == "__main__":
    main()
