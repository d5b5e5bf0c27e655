"""Potential along a segment and its oscillation between two balls."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import SingularEvaluation
from ..geometry import as_vec3
from ..imagecharge import TwoBallSpec, solve_two_balls
from ..pointcharge import format_float
from .sources import TwoBallSystem


@dataclass
class SegmentProfile:
    a: np.ndarray
    b: np.ndarray
    t: np.ndarray
    U: np.ndarray

    @property
    def samples(self) -> List[Tuple[float, float]]:
        return list(zip(self.t.tolist(), self.U.tolist()))

    def to_csv(self) -> str:
        return _csv(["t", "U"], zip(self.t, self.U))


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_float(v) for v in row])
    return buf.getvalue()


def segment_profile(source, a, b, m: int) -> SegmentProfile:
    """``m`` equally spaced Coulomb potential samples from ``a`` to ``b``.

    Raises
    ------
    SingularEvaluation
        Carrying the offending ``t`` when a sample hits a point charge.
    """
    if m < 2:
        raise ValueError("need at least two samples")
    a, b = as_vec3(a), as_vec3(b)
    t = np.linspace(0.0, 1.0, m)
    X = a + t[:, None] * (b - a)
    U = source._eval(X, "coulomb", False, allow_singular=True)
    bad = ~np.isfinite(U)
    if bad.any():
        t_bad = float(t[np.argmax(bad)])
        raise SingularEvaluation(f"segment passes through a point charge at t={t_bad:g}", t=t_bad)
    return SegmentProfile(a, b, t, U)


def oscillation(profile: SegmentProfile) -> float:
    """Largest potential difference between two samples of the profile."""
    if len(profile.U) == 0:
        raise ValueError("empty profile")
    return float(np.max(profile.U) - np.min(profile.U))


def symmetric_two_balls(R: float, q: float, d: float, eps_tail=1e-12, n_max=200):
    """Equal balls of radius ``R`` and charge ``q`` with surface gap ``d``,
    centres on the x axis."""
    spec = TwoBallSpec((0.0, 0.0, 0.0), R, q, (d + 2 * R, 0.0, 0.0), R, q)
    return solve_two_balls(spec, eps_tail=eps_tail, n_max=n_max)


def gap_profile(system, m: int) -> SegmentProfile:
    """Profile over the gap between the two sphere surfaces, endpoints included."""
    s = system.spec
    u = (s.center2 - s.center1) / s.distance
    return segment_profile(TwoBallSystem(system), s.center1 + s.R * u, s.center2 - s.r * u, m)


def oscillation_curve(R: float, q: float, d_values: Sequence[float], m: int = 201,
                      eps_tail: float = 1e-12, n_max: int = 200) -> List[Tuple[float, float]]:
    """``(d, E(d))`` for symmetric ball pairs at each surface gap ``d``."""
    out = []
    for d in d_values:
        if not d > 0:
            raise ValueError("gaps must be positive")
        system = symmetric_two_balls(R, q, d, eps_tail, n_max)
        out.append((float(d), oscillation(gap_profile(system, m))))
    return out


def curve_to_csv(curve) -> str:
    return _csv(["d", "E"], curve)
