"""Circular drift of a charge in a uniform magnetic field."""
from __future__ import annotations

import math

import numpy as np

from ..errors import ZeroField


def magnetic_trajectory(m: float, v: float, e: float, H: float, t: float) -> np.ndarray:
    """Position at time ``t`` of a charge ``e`` of mass ``m`` starting at the
    origin with speed ``v`` along x, field ``H`` along z.

    The path is the circle ``(rho sin(wt), rho (1 - cos(wt)), 0)`` with
    ``w = eH/m`` and ``rho = mv/(eH)``.
    """
    if e * H == 0:
        raise ZeroField("e*H must be non-zero; with no field the motion is a straight line")
    w = e * H / m
    rho = m * v / (e * H)
    # 1 - cos(x) = 2 sin(x/2)**2 keeps precision for small t
    return np.array([rho * math.sin(w * t), 2.0 * rho * math.sin(0.5 * w * t) ** 2, 0.0])
