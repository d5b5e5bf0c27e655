"""Closed-form conductor equilibria built from image charges.

Two disjoint charged balls are handled with the alternating Kelvin image
series; concentric floating shells around a charged core are solved as a
small linear system over uniform surface charges.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import BallsOverlap, InsideConductor, SeriesNotConverged, SingularSystem
from .geometry import as_vec3, kelvin_transform
from .pointcharge import ChargeConfiguration, format_float


@dataclass(frozen=True)
class TwoBallSpec:
    """Ball 1 ``B(center1, R)`` carries total charge ``Q``; ball 2
    ``B(center2, r)`` carries ``q``."""

    center1: np.ndarray
    R: float
    Q: float
    center2: np.ndarray
    r: float
    q: float

    def __post_init__(self):
        object.__setattr__(self, "center1", as_vec3(self.center1))
        object.__setattr__(self, "center2", as_vec3(self.center2))
        if not (self.R > 0 and self.r > 0):
            raise ValueError("radii must be positive")
        if self.gap <= 0:
            raise BallsOverlap(
                f"balls must be disjoint: |c2 - c1| = {self.distance:g} <= R + r = {self.R + self.r:g}")

    @property
    def distance(self) -> float:
        return float(np.linalg.norm(self.center2 - self.center1))

    @property
    def gap(self) -> float:
        return self.distance - self.R - self.r


@dataclass
class ImageChargeSystem:
    """Solved two-ball image series.

    ``d_coeffs[n]`` sits at ``x_points[n]`` (inside ball 1) and
    ``c_coeffs[n]`` at ``y_points[n]`` (inside ball 2). The potential is
    ``C / R`` on sphere 1 and ``D / r`` on sphere 2.
    """

    spec: TwoBallSpec
    x_points: np.ndarray
    y_points: np.ndarray
    C: float
    D: float
    c_coeffs: np.ndarray
    d_coeffs: np.ndarray
    A: np.ndarray
    truncation_n: int
    tail_bound: float
    # unit-prefactor chains, kept for cross-checks
    unit_chains: dict = field(default_factory=dict, repr=False)

    @property
    def potential1(self) -> float:
        return self.C / self.spec.R

    @property
    def potential2(self) -> float:
        return self.D / self.spec.r

    def as_config(self) -> ChargeConfiguration:
        pos = np.vstack([self.x_points, self.y_points])
        q = np.concatenate([self.d_coeffs, self.c_coeffs])
        comp = np.concatenate([np.zeros(len(self.d_coeffs), int), np.ones(len(self.c_coeffs), int)])
        # image charges alternate in sign, so no per-component sign rule
        cfg = ChargeConfiguration(pos, q)
        cfg.component_index = comp
        return cfg

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["x", "y", "z", "q", "component"])
        cfg = self.as_config()
        for p, q, c in zip(cfg.positions, cfg.charges, cfg.component_index):
            w.writerow([format_float(v) for v in p] + [format_float(q), str(int(c))])
        return buf.getvalue()


def _image_offsets(spec: TwoBallSpec, n_max: int):
    """Distances ``a_n = |x_n - x0|`` and ``b_n = |y_n - y0|``.

    Every image lies on the line of centres, so the Kelvin recurrences
    ``x_n = K_1(y_{n-1})``, ``y_n = K_2(x_{n-1})`` reduce to
    ``a_n = R**2 / (L - b_{n-1})`` and ``b_n = r**2 / (L - a_{n-1})``.
    """
    L, R, r = spec.distance, spec.R, spec.r
    a = np.zeros(n_max + 1)
    b = np.zeros(n_max + 1)
    for n in range(1, n_max + 1):
        a[n] = R * R / (L - b[n - 1])
        b[n] = r * r / (L - a[n - 1])
    return a, b


def _chain(C, D, a, b, spec):
    """Coefficient recurrences for prefactors ``(C, D)``."""
    dn = np.zeros(len(a))
    cn = np.zeros(len(a))
    dn[0], cn[0] = C, D
    for n in range(1, len(a)):
        dn[n] = -cn[n - 1] * a[n] / spec.R
        cn[n] = -dn[n - 1] * b[n] / spec.r
    return cn, dn


def solve_two_balls(spec: TwoBallSpec, eps_tail: float = 1e-12, n_max: int = 200) -> ImageChargeSystem:
    """Equilibrium of two charged conducting balls by Kelvin images.

    The image chain is grown until the newest unit-prefactor coefficients
    fall below ``eps_tail``; the 2x2 capacitance system
    ``[Q, q] = A @ [C, D]`` is then assembled from the two unit passes and
    solved by Cramer's rule.

    Raises
    ------
    SeriesNotConverged
        When ``n_max`` images are not enough; ``err.system`` still holds
        the truncated solution.
    """
    a, b = _image_offsets(spec, n_max)
    c1, d1 = _chain(1.0, 0.0, a, b, spec)
    c2, d2 = _chain(0.0, 1.0, a, b, spec)
    mag = np.abs(c1) + np.abs(d1) + np.abs(c2) + np.abs(d2)
    below = np.flatnonzero(mag[1:] < eps_tail)
    converged = below.size > 0
    N = int(below[0]) + 1 if converged else n_max
    c1, d1, c2, d2 = c1[:N + 1], d1[:N + 1], c2[:N + 1], d2[:N + 1]

    u = (spec.center2 - spec.center1) / spec.distance
    xs = spec.center1 + a[:N + 1, None] * u
    ys = spec.center2 - b[:N + 1, None] * u

    A = np.array([[d1.sum(), d2.sum()], [c1.sum(), c2.sum()]])
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if det == 0.0:
        raise SingularSystem("capacitance system is singular")
    Q, q = spec.Q, spec.q
    C = (A[1, 1] * Q - A[0, 1] * q) / det
    D = (A[0, 0] * q - A[1, 0] * Q) / det
    cn, dn = C * c1 + D * c2, C * d1 + D * d2

    # geometric tail estimate from the decay of the last terms
    ratio = mag[N] / mag[N - 1] if N >= 1 and mag[N - 1] > 0 else 0.0
    ratio = min(ratio, 0.999999)
    tail = (abs(cn[-1]) + abs(dn[-1])) * ratio / (1.0 - ratio)

    system = ImageChargeSystem(
        spec=spec, x_points=xs, y_points=ys, C=float(C), D=float(D),
        c_coeffs=cn, d_coeffs=dn, A=A, truncation_n=N, tail_bound=float(tail),
        unit_chains={"c1": c1, "d1": d1, "c2": c2, "d2": d2},
    )
    if not converged:
        raise SeriesNotConverged(
            f"image series tail {mag[n_max]:.3e} above {eps_tail:g} after {n_max} terms", system)
    return system


def two_ball_potential(system: ImageChargeSystem, x, tol: float = 1e-12) -> float:
    """Potential of the two-ball equilibrium at a point outside both balls.

    Raises
    ------
    InsideConductor
        If ``x`` is strictly inside either ball (beyond ``tol``).
    """
    x = as_vec3(x)
    s = system.spec
    for c, rad in ((s.center1, s.R), (s.center2, s.r)):
        if np.linalg.norm(x - c) < rad * (1.0 - tol):
            raise InsideConductor("two-ball potential is only defined outside the balls")
    return float(image_potential(system, x[None, :])[0])


def image_potential(system: ImageChargeSystem, X) -> np.ndarray:
    """Superposed image potential at an ``(m, 3)`` array of points (no checks)."""
    X = np.asarray(X, dtype=float).reshape(-1, 3)
    pts = np.vstack([system.x_points, system.y_points])
    q = np.concatenate([system.d_coeffs, system.c_coeffs])
    dist = np.linalg.norm(X[:, None, :] - pts[None, :, :], axis=2)
    return (q / dist).sum(axis=1)


def kelvin_pair_residuals(system: ImageChargeSystem, n: int, Z1, Z2):
    """Potential of the ``n``-th Kelvin pairs on each sphere.

    Pair on sphere 1: ``c_n`` at ``y_n`` with ``-c_n |x_{n+1}-x0| / R`` at
    ``x_{n+1}``; on sphere 2 the mirror pair. Both should vanish
    identically on their sphere; returns the two arrays of values together
    with the magnitude of the first term for scaling.
    """
    s = system.spec
    x0, y0 = s.center1, s.center2
    xn1 = kelvin_transform(x0, s.R, system.y_points[n])
    yn1 = kelvin_transform(y0, s.r, system.x_points[n])
    cn, dn = system.c_coeffs[n], system.d_coeffs[n]
    Z1 = np.asarray(Z1, float)
    Z2 = np.asarray(Z2, float)
    t1 = cn / np.linalg.norm(Z1 - system.y_points[n], axis=1)
    u1 = t1 - cn * (np.linalg.norm(xn1 - x0) / s.R) / np.linalg.norm(Z1 - xn1, axis=1)
    t2 = dn / np.linalg.norm(Z2 - system.x_points[n], axis=1)
    u2 = t2 - dn * (np.linalg.norm(yn1 - y0) / s.r) / np.linalg.norm(Z2 - yn1, axis=1)
    return u1, u2, np.abs(t1), np.abs(t2)


@dataclass
class ShellSolution:
    radii: List[float]
    charges: np.ndarray
    potential_levels: np.ndarray
    with_outer_sphere: bool = True

    def potential(self, x) -> float:
        """Potential of the uniform shells at point ``x``."""
        rho = float(np.linalg.norm(as_vec3(x)))
        return float(sum(qn * _shell_kernel(rn, rho) for qn, rn in zip(self.charges, self._all_radii())))

    def _all_radii(self):
        return list(self.radii) + ([1.0] if self.with_outer_sphere else [])

    def component_radii(self):
        """Representative radial interval of each conductor component."""
        r = list(self.radii)
        comps = [(0.0, r[0])] + [(r[i], r[i + 1]) for i in range(1, len(r), 2)]
        if self.with_outer_sphere:
            comps.append((1.0, 1.0))
        return comps


def _shell_kernel(rn: float, rho: float) -> float:
    # unit charge spread uniformly over the sphere of radius rn
    return 1.0 / rn if rho <= rn else 1.0 / rho


def solve_nested_shells(radii, q1: float, with_outer_sphere: bool = True) -> ShellSolution:
    """Induced charges on concentric floating shells around a charged core.

    The core ``B(0, r_1)`` carries ``q1``; every annulus
    ``r_2k <= |x| <= r_2k+1`` is neutral and must be an equipotential.
    Each component's charge sits uniformly on its bounding spheres, which
    turns both conditions into linear equations in the sphere charges.
    With ``with_outer_sphere`` the neutral unit sphere is included as a
    further component.

    Returns charges ``(q_1, ..., q_M[, q_outer])``.
    """
    radii = [float(r) for r in radii]
    M = len(radii)
    if M == 0 or M % 2 == 0:
        raise ValueError("need an odd number of radii: a core plus inner/outer annulus faces")
    if M > 64:
        raise ValueError("at most 64 shells are supported")
    if radii[0] <= 0 or any(b <= a for a, b in zip(radii, radii[1:])):
        raise ValueError("radii must be positive and strictly increasing")
    if with_outer_sphere and radii[-1] >= 1.0:
        raise ValueError("radii must be < 1 inside the outer unit sphere")

    all_r = radii + ([1.0] if with_outer_sphere else [])
    K = len(all_r)
    A = np.zeros((K, K))
    b = np.zeros(K)
    A[0, 0] = 1.0
    b[0] = q1
    row = 1
    for k in range(1, M, 2):
        lo, hi = all_r[k], all_r[k + 1]
        # equipotential: U(lo) - U(hi) = 0 across the annulus
        A[row] = [_shell_kernel(rn, lo) - _shell_kernel(rn, hi) for rn in all_r]
        # neutrality of the floating annulus
        A[row + 1, k] = A[row + 1, k + 1] = 1.0
        row += 2
    if with_outer_sphere:
        A[row, K - 1] = 1.0
    try:
        charges = np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc

    sol = ShellSolution(radii=radii, charges=charges, potential_levels=np.zeros(0),
                        with_outer_sphere=with_outer_sphere)
    levels = []
    for lo, hi in sol.component_radii():
        levels.append(sol.potential([hi, 0.0, 0.0]))
    sol.potential_levels = np.array(levels)
    return sol
