"""Conductor domains, signed distance, normals, Kelvin inversion and the
ring lattice of charges on a sphere.

All vectors are plain ``(3,)`` float arrays. Functions accept any
3-sequence and return new arrays; nothing is mutated in place.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from .errors import AmbiguousNormal, NotOnBoundary, SingularPoint

BOUNDARY_RTOL = 1e-9

# Guard against n*sin(phi) landing a hair below an integer.
_FLOOR_EPS = 1e-9


def as_vec3(x) -> np.ndarray:
    v = np.asarray(x, dtype=float).reshape(3)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"vector has non-finite components: {v}")
    return v


@dataclass(frozen=True)
class Ball:
    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec3(self.center))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True)
class SphereSurface:
    """The sphere itself (zero thickness), not the solid ball."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", as_vec3(self.center))
        if not self.radius > 0:
            raise ValueError("sphere radius must be positive")
        object.__setattr__(self, "radius", float(self.radius))


@dataclass(frozen=True)
class BallUnion:
    balls: tuple

    def __post_init__(self):
        balls = tuple(b if isinstance(b, Ball) else Ball(*b) for b in self.balls)
        if not balls:
            raise ValueError("BallUnion needs at least one ball")
        for i in range(len(balls)):
            for j in range(i + 1, len(balls)):
                gap = np.linalg.norm(balls[i].center - balls[j].center)
                if gap <= balls[i].radius + balls[j].radius:
                    raise ValueError(f"balls {i} and {j} have intersecting closures")
        object.__setattr__(self, "balls", balls)


@dataclass(frozen=True)
class NestedShells:
    """Solid core ``B(0, r_1)``, annuli ``r_2k <= |x| <= r_2k+1`` and the
    unit sphere ``|x| = 1``, all centred at the origin.

    An odd number of radii is required so every annulus has both faces.
    """

    radii: tuple

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if len(radii) % 2 == 0:
            raise ValueError("NestedShells needs an odd number of radii (core + annuli)")
        if radii[0] <= 0 or radii[-1] >= 1:
            raise ValueError("radii must lie in (0, 1)")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise ValueError("radii must be strictly increasing")
        object.__setattr__(self, "radii", radii)

    def intervals(self):
        """Radial intervals ``(lo, hi)`` making up the conductor."""
        r = self.radii
        out = [(0.0, r[0])]
        out += [(r[i], r[i + 1]) for i in range(1, len(r), 2)]
        out.append((1.0, 1.0))
        return out


@dataclass(frozen=True)
class Segment:
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", as_vec3(self.a))
        object.__setattr__(self, "b", as_vec3(self.b))


ConductorDomain = Union[Ball, SphereSurface, BallUnion, NestedShells, Segment]


def diameter(domain: ConductorDomain) -> float:
    if isinstance(domain, (Ball, SphereSurface)):
        return 2.0 * domain.radius
    if isinstance(domain, BallUnion):
        best = max(2.0 * b.radius for b in domain.balls)
        for i, bi in enumerate(domain.balls):
            for bj in domain.balls[i + 1:]:
                best = max(best, np.linalg.norm(bi.center - bj.center) + bi.radius + bj.radius)
        return float(best)
    if isinstance(domain, NestedShells):
        return 2.0
    if isinstance(domain, Segment):
        return float(np.linalg.norm(domain.b - domain.a))
    raise TypeError(f"unknown domain type {type(domain).__name__}")


def boundary_tolerance(domain: ConductorDomain) -> float:
    return BOUNDARY_RTOL * diameter(domain)


def _radial_signed_distance(intervals, rho: float) -> float:
    for lo, hi in intervals:
        if lo <= rho <= hi:
            if lo == 0.0:
                return -(hi - rho)
            return -min(rho - lo, hi - rho)
    return min(min(abs(rho - lo), abs(rho - hi)) for lo, hi in intervals)


def _closest_on_segment(seg: Segment, x: np.ndarray) -> np.ndarray:
    ab = seg.b - seg.a
    L2 = float(ab @ ab)
    if L2 == 0.0:
        return seg.a.copy()
    t = min(1.0, max(0.0, float((x - seg.a) @ ab) / L2))
    return seg.a + t * ab


def signed_distance(domain: ConductorDomain, x) -> float:
    """Negative inside the conductor, zero on its boundary, positive outside.

    Sets without interior (sphere surfaces, segments) are non-negative
    everywhere and vanish on the set itself.
    """
    x = as_vec3(x)
    if isinstance(domain, Ball):
        return float(np.linalg.norm(x - domain.center) - domain.radius)
    if isinstance(domain, SphereSurface):
        return float(abs(np.linalg.norm(x - domain.center) - domain.radius))
    if isinstance(domain, BallUnion):
        # Exact for disjoint closures: from inside ball i, every other
        # boundary is farther than the boundary of ball i.
        return float(min(np.linalg.norm(x - b.center) - b.radius for b in domain.balls))
    if isinstance(domain, NestedShells):
        return float(_radial_signed_distance(domain.intervals(), float(np.linalg.norm(x))))
    if isinstance(domain, Segment):
        return float(np.linalg.norm(x - _closest_on_segment(domain, x)))
    raise TypeError(f"unknown domain type {type(domain).__name__}")


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise AmbiguousNormal("normal undefined at the centre of a sphere")
    return v / n


def outward_normal(domain: ConductorDomain, x) -> np.ndarray:
    """Unit outer normal at a boundary point ``x``.

    Raises
    ------
    NotOnBoundary
        If ``|signed_distance(domain, x)|`` exceeds the boundary tolerance.
    AmbiguousNormal
        For segments, which carry no normal.
    """
    x = as_vec3(x)
    if isinstance(domain, Segment):
        raise AmbiguousNormal("segment domains have no outward normal")
    phi = signed_distance(domain, x)
    tol = boundary_tolerance(domain)
    if abs(phi) > tol:
        raise NotOnBoundary(f"point is {phi:.3e} from the boundary (tol {tol:.1e})")
    return nearest_normal(domain, x)


def nearest_normal(domain: ConductorDomain, x) -> np.ndarray:
    """Outer normal at the boundary point closest to ``x`` (no tolerance check)."""
    x = as_vec3(x)
    if isinstance(domain, (Ball, SphereSurface)):
        return _unit(x - domain.center)
    if isinstance(domain, BallUnion):
        d = [abs(np.linalg.norm(x - b.center) - b.radius) for b in domain.balls]
        return _unit(x - domain.balls[int(np.argmin(d))].center)
    if isinstance(domain, NestedShells):
        rho = float(np.linalg.norm(x))
        best, sign = math.inf, 1.0
        for lo, hi in domain.intervals():
            if lo > 0.0 and abs(rho - lo) < best and lo != hi:
                best, sign = abs(rho - lo), -1.0
            if abs(rho - hi) < best:
                best, sign = abs(rho - hi), 1.0
        return sign * _unit(x)
    if isinstance(domain, Segment):
        raise AmbiguousNormal("segment domains have no outward normal")
    raise TypeError(f"unknown domain type {type(domain).__name__}")


def _to_sphere(center, radius, x):
    v = x - center
    n = np.linalg.norm(v)
    if n == 0.0:
        # Any boundary point will do; pick +z deterministically.
        return center + np.array([0.0, 0.0, radius])
    return center + radius * v / n


def project_to_domain(domain: ConductorDomain, x) -> np.ndarray:
    """Closest point of the (closed) conductor to ``x``; identity inside."""
    x = as_vec3(x)
    if isinstance(domain, Ball):
        if np.linalg.norm(x - domain.center) <= domain.radius:
            return x
        return _to_sphere(domain.center, domain.radius, x)
    if isinstance(domain, SphereSurface):
        return _to_sphere(domain.center, domain.radius, x)
    if isinstance(domain, BallUnion):
        d = [np.linalg.norm(x - b.center) - b.radius for b in domain.balls]
        b = domain.balls[int(np.argmin(d))]
        if min(d) <= 0.0:
            return x
        return _to_sphere(b.center, b.radius, x)
    if isinstance(domain, NestedShells):
        rho = float(np.linalg.norm(x))
        best, target = math.inf, rho
        for lo, hi in domain.intervals():
            if lo <= rho <= hi:
                return x
            for edge in (lo, hi):
                if abs(rho - edge) < best:
                    best, target = abs(rho - edge), edge
        return _to_sphere(np.zeros(3), target, x)
    if isinstance(domain, Segment):
        return _closest_on_segment(domain, x)
    raise TypeError(f"unknown domain type {type(domain).__name__}")


def boundary_area_weights(domain: ConductorDomain):
    """List of ``(center, radius, area)`` boundary spheres of a ball-type domain."""
    if isinstance(domain, (Ball, SphereSurface)):
        return [(domain.center, domain.radius, domain.radius ** 2)]
    if isinstance(domain, BallUnion):
        return [(b.center, b.radius, b.radius ** 2) for b in domain.balls]
    if isinstance(domain, NestedShells):
        return [(np.zeros(3), r, r * r) for r in domain.radii + (1.0,)]
    raise TypeError(f"{type(domain).__name__} has no spherical boundary")


def sample_boundary(domain: ConductorDomain, m: int, rng: np.random.Generator) -> np.ndarray:
    """``m`` points drawn uniformly (by area) from the domain boundary."""
    if isinstance(domain, Segment):
        t = rng.random(m)
        return domain.a + t[:, None] * (domain.b - domain.a)
    spheres = boundary_area_weights(domain)
    w = np.array([s[2] for s in spheres])
    which = rng.choice(len(spheres), size=m, p=w / w.sum()) if len(spheres) > 1 else np.zeros(m, int)
    g = rng.standard_normal((m, 3))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    centers = np.array([spheres[i][0] for i in which]).reshape(m, 3)
    radii = np.array([spheres[i][1] for i in which])
    return centers + radii[:, None] * g


def kelvin_transform(center, R: float, x) -> np.ndarray:
    """Inversion of ``x`` in the sphere of radius ``R`` about ``center``.

    ``|x - c| * |y - c| == R**2`` and points on the sphere are fixed.
    """
    c = as_vec3(center)
    v = as_vec3(x) - c
    n2 = float(v @ v)
    if n2 == 0.0:
        raise SingularPoint("Kelvin transform is undefined at the sphere centre")
    return c + (R * R / n2) * v


@dataclass(frozen=True)
class SphericalLattice:
    n: int
    r: float
    points: np.ndarray = field(repr=False)
    center: np.ndarray = field(default_factory=lambda: np.zeros(3), repr=False)

    @property
    def N(self) -> int:
        return len(self.points)


def spherical_lattice(n: int, r: float, center=(0.0, 0.0, 0.0)) -> SphericalLattice:
    """Latitude rings of points on the sphere of radius ``r``.

    Ring ``k = -n..n`` sits at polar angle ``pi/2 + pi*k/(2n)`` and carries
    ``floor(n sin(phi_k))`` points at azimuths ``2*pi*j / (n sin(phi_k))``.
    The pole rings are empty, so the exact count ``N`` only approximates
    ``n**2`` and is reported on the result.
    """
    if n < 1:
        raise ValueError("n must be a positive integer")
    if not r > 0:
        raise ValueError("r must be positive")
    c = as_vec3(center)
    pts = []
    for k in range(-n, n + 1):
        phi = math.pi / 2 + math.pi * k / (2 * n)
        s = math.sin(phi)
        count = int(math.floor(n * s + _FLOOR_EPS))
        if count <= 0:
            continue
        j = np.arange(1, count + 1)
        theta = 2 * math.pi * j / (n * s)
        ring = np.column_stack([
            r * s * np.cos(theta),
            r * s * np.sin(theta),
            np.full(count, r * math.cos(phi)),
        ])
        pts.append(ring)
    points = np.vstack(pts) + c
    return SphericalLattice(n=n, r=float(r), points=points, center=c)
