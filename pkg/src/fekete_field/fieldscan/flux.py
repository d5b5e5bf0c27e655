"""Enclosed charge recovered from surface flux (and a volume term for the
screened kernel)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import qmc

from ..errors import SourceOnSurface
from ..geometry import as_vec3
from .sources import Sum, TwoBallSystem, UniformSphere

GOLDEN = (1.0 + 5.0 ** 0.5) / 2.0
SURFACE_CLEARANCE = 1e-6


@dataclass
class FluxResult:
    enclosed_charge: float
    quadrature_points: int
    estimated_error: float


def fibonacci_sphere(n: int) -> np.ndarray:
    """``n`` near-uniform unit vectors on the golden-angle spiral."""
    i = np.arange(n, dtype=float) + 0.5
    polar = np.arccos(1.0 - 2.0 * i / n)
    azim = 2.0 * np.pi * i / GOLDEN
    return np.column_stack([np.cos(azim) * np.sin(polar),
                            np.sin(azim) * np.sin(polar),
                            np.cos(polar)])


def _check_clearance(source, center, radius):
    pts = source.point_locations()
    if len(pts):
        gap = np.abs(np.linalg.norm(pts - center, axis=1) - radius)
        if gap.min() < SURFACE_CLEARANCE:
            raise SourceOnSurface("a point source lies on the integration sphere")
    for sub in getattr(source, "sources", []):
        _check_clearance(sub, center, radius)
    if isinstance(source, UniformSphere):
        sep = np.linalg.norm(source.center - center)
        if abs(source.r0 - radius) <= sep <= source.r0 + radius:
            raise SourceOnSurface("charged shell crosses the integration sphere")


def _surface_term(source, kind, center, radius, n):
    u = fibonacci_sphere(n)
    g = source._eval(center + radius * u, kind, True)
    # -(1/4pi) * surface integral of dU/dn, equal weights 4 pi R^2 / n
    return -radius ** 2 * float(np.mean(np.einsum("ij,ij->i", g, u)))


def gauss_flux(source, sphere_center, sphere_radius: float, n_quad: int = 2048) -> FluxResult:
    """Net charge inside a sphere from the flux of the Coulomb field.

    The error estimate compares ``n_quad`` nodes against ``n_quad // 2``.
    """
    c = as_vec3(sphere_center)
    if not sphere_radius > 0:
        raise ValueError("sphere radius must be positive")
    _check_clearance(source, c, sphere_radius)
    full = _surface_term(source, "coulomb", c, sphere_radius, n_quad)
    half = _surface_term(source, "coulomb", c, sphere_radius, max(1, n_quad // 2))
    return FluxResult(full, n_quad, abs(full - half))


def _ball_nodes(center, radius, n, seed):
    u = qmc.Halton(d=3, scramble=True, seed=seed).random(n)
    rho = radius * np.cbrt(u[:, 0])
    cos_t = 1.0 - 2.0 * u[:, 1]
    sin_t = np.sqrt(np.maximum(0.0, 1.0 - cos_t ** 2))
    phi = 2.0 * np.pi * u[:, 2]
    return center + rho[:, None] * np.column_stack([sin_t * np.cos(phi), sin_t * np.sin(phi), cos_t])


def _volume_term(source, center, radius, n, seed):
    X = _ball_nodes(center, radius, n, seed)
    U = source._eval(X, "yukawa", False, allow_singular=True)
    U = np.where(np.isfinite(U), U, 0.0)
    vol = 4.0 / 3.0 * math.pi * radius ** 3
    return vol * float(U.mean()) / (4.0 * math.pi)


def yukawa_flux(source, region_sphere_center, radius: float, n_quad: int = 4096,
                n_vol: int = 100_000, seed: int = 0) -> FluxResult:
    r"""Net charge inside a ball for the screened kernel ``exp(-s)/s``:

    .. math:: q = \frac{1}{4\pi}\int_B U\,dV - \frac{1}{4\pi}\oint \partial_n U\,dS

    The volume integral uses scrambled Halton nodes (deterministic for a
    given ``seed``); the error estimate compares against half the nodes.
    """
    c = as_vec3(region_sphere_center)
    if not radius > 0:
        raise ValueError("radius must be positive")
    _check_clearance(source, c, radius)
    s_full = _surface_term(source, "yukawa", c, radius, n_quad)
    s_half = _surface_term(source, "yukawa", c, radius, max(1, n_quad // 2))
    v_full = _volume_term(source, c, radius, n_vol, seed)
    v_half = _volume_term(source, c, radius, max(1, n_vol // 2), seed)
    return FluxResult(s_full + v_full, n_quad, abs(s_full - s_half) + abs(v_full - v_half))
