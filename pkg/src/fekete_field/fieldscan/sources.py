"""Potential sources and their Coulomb / Yukawa potentials and gradients.

Every source evaluates on an ``(m, 3)`` array of points. Gradients are
analytic for every variant; large point sets are evaluated in row chunks
spread over a thread pool, each chunk written to its own slice so the
result does not depend on scheduling.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy.spatial.distance import cdist

from .._parallel import worker_count
from ..errors import SingularEvaluation
from ..geometry import as_vec3
from ..imagecharge import ImageChargeSystem
from ..pointcharge import COINCIDENCE_DISTANCE, ChargeConfiguration

_CHUNK_ELEMENTS = 1 << 21


def _as_points(X) -> np.ndarray:
    return np.asarray(X, dtype=float).reshape(-1, 3)


def _chunked(fn, X, n_sources, width):
    """Apply ``fn`` to row blocks of ``X`` and stitch the results."""
    m = len(X)
    rows = max(1, _CHUNK_ELEMENTS // max(1, n_sources))
    bounds = [(i, min(m, i + rows)) for i in range(0, m, rows)]
    out = np.empty((m, width)) if width > 1 else np.empty(m)
    if len(bounds) <= 1:
        if m:
            out[:] = fn(X)
        return out

    def work(b):
        out[b[0]:b[1]] = fn(X[b[0]:b[1]])

    with ThreadPoolExecutor(max_workers=min(worker_count(), len(bounds))) as ex:
        list(ex.map(work, bounds))
    return out


def _point_kernel(P, q, kind, grad, allow_singular):
    def fn(Xc):
        s = cdist(Xc, P)
        hit = s < COINCIDENCE_DISTANCE
        if hit.any():
            if not allow_singular:
                raise SingularEvaluation("potential evaluated at a point-charge location")
            s = np.where(hit, np.nan, s)
        if kind == "coulomb":
            if not grad:
                val = (1.0 / s) @ q
            else:
                w = -(q / s ** 3)
        else:
            e = np.exp(-s)
            if not grad:
                val = (e / s) @ q
            else:
                w = -q * e * (1.0 / s + 1.0 / s ** 2) / s
        if grad:
            # sum_j w_ij (x_i - p_j)
            val = w.sum(axis=1)[:, None] * Xc - w @ P
        if hit.any():
            bad = hit.any(axis=1)
            val[bad] = np.inf if not grad else np.nan
        return val

    return fn


@dataclass
class PointSet:
    config: ChargeConfiguration

    def _eval(self, X, kind, grad, allow_singular=False):
        X = _as_points(X)
        P, q = self.config.positions, self.config.charges
        if len(q) == 0:
            return np.zeros((len(X), 3)) if grad else np.zeros(len(X))
        return _chunked(_point_kernel(P, q, kind, grad, allow_singular), X, len(q), 3 if grad else 1)

    def point_locations(self):
        return self.config.positions


@dataclass
class UniformSphere:
    """Charge ``Q`` spread uniformly over the sphere ``|x - center| = r0``."""

    center: np.ndarray
    r0: float
    Q: float

    def __post_init__(self):
        self.center = as_vec3(self.center)
        if not self.r0 > 0:
            raise ValueError("r0 must be positive")

    def _eval(self, X, kind, grad, allow_singular=False):
        X = _as_points(X)
        v = X - self.center
        rho = np.linalg.norm(v, axis=1)
        a, Q = self.r0, self.Q
        inside = rho < a
        if kind == "coulomb":
            if not grad:
                return Q / np.maximum(rho, a)
            g = np.zeros_like(X)
            out = ~inside
            g[out] = -Q * v[out] / rho[out, None] ** 3
            return g
        # screened shell theorem
        if not grad:
            val = np.empty_like(rho)
            out = ~inside
            val[out] = Q * math.sinh(a) / a * np.exp(-rho[out]) / rho[out]
            ri = rho[inside]
            small = ri < 1e-8
            ratio = np.where(small, 1.0 + ri ** 2 / 6, np.sinh(ri) / np.where(small, 1.0, ri))
            val[inside] = Q * math.exp(-a) / a * ratio
            return val
        g = np.zeros_like(X)
        out = ~inside
        ro = rho[out]
        dU = -Q * math.sinh(a) / a * np.exp(-ro) * (1.0 / ro + 1.0 / ro ** 2)
        g[out] = dU[:, None] * v[out] / ro[:, None]
        ri = rho[inside]
        small = ri < 1e-6
        rs = np.where(small, 1.0, ri)
        dr = np.where(small, ri / 3.0, np.cosh(ri) / rs - np.sinh(ri) / rs ** 2)
        radial = np.where(small[:, None], v[inside] / 3.0, (dr / rs)[:, None] * v[inside])
        g[inside] = Q * math.exp(-a) / a * radial
        return g

    def point_locations(self):
        return np.zeros((0, 3))


@dataclass
class TwoBallSystem:
    """Field of a solved two-ball equilibrium.

    The Coulomb potential is the image series outside the balls and the
    constant conductor level inside them. The Yukawa kernel is applied to
    the image charges as a plain point set.
    """

    system: ImageChargeSystem

    def _points(self):
        return self.system.as_config()

    def _eval(self, X, kind, grad, allow_singular=False):
        X = _as_points(X)
        cfg = self._points()
        val = PointSet(cfg)._eval(X, kind, grad, allow_singular)
        if kind != "coulomb":
            return val
        s = self.system.spec
        for c, rad, level in ((s.center1, s.R, self.system.potential1),
                              (s.center2, s.r, self.system.potential2)):
            inside = np.linalg.norm(X - c, axis=1) < rad
            val[inside] = 0.0 if grad else level
        return val

    def point_locations(self):
        return self._points().positions


@dataclass
class Sum:
    sources: List

    def _eval(self, X, kind, grad, allow_singular=False):
        X = _as_points(X)
        total = np.zeros((len(X), 3)) if grad else np.zeros(len(X))
        for src in self.sources:
            total = total + src._eval(X, kind, grad, allow_singular)
        return total

    def point_locations(self):
        locs = [s.point_locations() for s in self.sources]
        return np.vstack(locs) if locs else np.zeros((0, 3))


def point_source(positions, charges) -> PointSet:
    return PointSet(ChargeConfiguration(positions, charges))


def _maybe_scalar(x, arr):
    x = np.asarray(x, dtype=float)
    return float(arr[0]) if x.ndim == 1 else arr


def _maybe_vector(x, arr):
    x = np.asarray(x, dtype=float)
    return arr[0] if x.ndim == 1 else arr


def coulomb_potential(source, x):
    """Coulomb potential of ``source`` at a point or ``(m, 3)`` array.

    Raises
    ------
    SingularEvaluation
        At a point-charge location.
    """
    return _maybe_scalar(x, source._eval(x, "coulomb", False))


def coulomb_gradient(source, x):
    return _maybe_vector(x, source._eval(x, "coulomb", True))


def yukawa_potential(source, x):
    """Screened potential with kernel ``exp(-s) / s``."""
    return _maybe_scalar(x, source._eval(x, "yukawa", False))


def yukawa_gradient(source, x):
    return _maybe_vector(x, source._eval(x, "yukawa", True))
