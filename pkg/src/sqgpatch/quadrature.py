"""Gauss rules mapped to the unit interval."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy.special import roots_jacobi

FloatArray = NDArray[np.float64]


@lru_cache(maxsize=None)
def gauss_legendre_unit(n: int) -> tuple[FloatArray, FloatArray]:
    """Gauss-Legendre nodes and weights on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (x + 1.0)
    t.setflags(write=False)
    w = 0.5 * w
    w.setflags(write=False)
    return t, w


@lru_cache(maxsize=None)
def gauss_jacobi_unit(n: int, exponent: float) -> tuple[FloatArray, FloatArray]:
    """Nodes and weights for ``int_0^1 f(s) s**exponent ds`` with ``exponent > -1``."""
    if exponent <= -1.0:
        raise ValueError("exponent must exceed -1")
    x, w = roots_jacobi(n, 0.0, exponent)
    s = 0.5 * (x + 1.0)
    w = w * 2.0 ** (-exponent - 1.0)
    s.setflags(write=False)
    w.setflags(write=False)
    return s, w
