from __future__ import annotations

import numpy as np

from sqgpatch.geometry import PatchCurve


def circle_curve(n: int, radius: float = 1.0, center=(0.0, 0.0), strength: float = 1.0, phase: float = 0.0) -> PatchCurve:
    theta = phase + 2.0 * np.pi * np.arange(n) / n
    nodes = np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)])
    return PatchCurve(nodes, strength)


def square_curve(x0: float, y0: float, side: float = 1.0, per_edge: int = 4, ccw: bool = True) -> PatchCurve:
    s = np.arange(per_edge) / per_edge
    corners = np.array([[x0, y0], [x0 + side, y0], [x0 + side, y0 + side], [x0, y0 + side]])
    nodes = np.concatenate([corners[i] + s[:, None] * (corners[(i + 1) % 4] - corners[i]) for i in range(4)])
    return PatchCurve(nodes if ccw else nodes[::-1])
