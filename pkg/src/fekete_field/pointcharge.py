"""Finite sets of point charges: Coulomb energy, forces, static states.

Units are Gaussian with the Coulomb constant set to one, so two unit
charges a unit distance apart have energy 1.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import ChargeOutsideDomain, CoincidentCharges
from .geometry import (ConductorDomain, Segment, as_vec3, boundary_tolerance,
                       nearest_normal, signed_distance)

COINCIDENCE_DISTANCE = 1e-14


@dataclass
class ChargeConfiguration:
    """Point charges ``charges[i]`` located at ``positions[i]``.

    ``component_index`` optionally tags each charge with the conductor
    component it lives on; charges sharing a component must share a sign.
    """

    positions: np.ndarray
    charges: np.ndarray
    component_index: Optional[np.ndarray] = None

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        self.charges = np.asarray(self.charges, dtype=float).reshape(-1)
        if len(self.positions) != len(self.charges):
            raise ValueError("positions and charges differ in length")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("positions must be finite")
        if self.component_index is not None:
            idx = np.asarray(self.component_index, dtype=int).reshape(-1)
            if len(idx) != len(self.charges):
                raise ValueError("component_index length mismatch")
            for c in np.unique(idx):
                q = self.charges[idx == c]
                if np.any(q > 0) and np.any(q < 0):
                    raise ValueError(f"component {c} carries charges of both signs")
            self.component_index = idx

    def __len__(self):
        return len(self.charges)

    @property
    def total_charge(self) -> float:
        return float(self.charges.sum())

    # -- CSV ---------------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["x", "y", "z", "q"]
        if self.component_index is not None:
            header.append("component")
        w.writerow(header)
        for i in range(len(self)):
            row = [format_float(v) for v in self.positions[i]]
            row.append(format_float(self.charges[i]))
            if self.component_index is not None:
                row.append(str(int(self.component_index[i])))
            w.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ChargeConfiguration":
        rows = list(csv.DictReader(io.StringIO(text)))
        if not rows:
            return cls(np.zeros((0, 3)), np.zeros(0))
        pos = [[float(r["x"]), float(r["y"]), float(r["z"])] for r in rows]
        q = [float(r["q"]) for r in rows]
        comp = None
        if "component" in rows[0] and rows[0]["component"] not in (None, ""):
            comp = [int(r["component"]) for r in rows]
        return cls(pos, q, comp)


def format_float(v: float) -> str:
    """17 significant digits: round-trips any double."""
    return format(float(v), ".17g")


def _pair_geometry(positions: np.ndarray):
    diff = positions[:, None, :] - positions[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    n = len(positions)
    if n > 1:
        off = dist[~np.eye(n, dtype=bool)]
        if off.min() < COINCIDENCE_DISTANCE:
            raise CoincidentCharges(f"two charges closer than {COINCIDENCE_DISTANCE:g}")
    return diff, dist


def total_energy(config: ChargeConfiguration) -> float:
    r"""Coulomb energy :math:`W=\sum_{i<j} q_i q_j / |x_i-x_j|`."""
    if len(config) < 2:
        return 0.0
    _, dist = _pair_geometry(config.positions)
    iu = np.triu_indices(len(config), k=1)
    q = config.charges
    return float(np.sum(q[iu[0]] * q[iu[1]] / dist[iu]))


def forces(config: ChargeConfiguration) -> np.ndarray:
    """Force on every charge from all the others, shape ``(n, 3)``."""
    n = len(config)
    if n < 2:
        return np.zeros((n, 3))
    diff, dist = _pair_geometry(config.positions)
    np.fill_diagonal(dist, np.inf)
    q = config.charges
    w = (q[:, None] * q[None, :]) / dist ** 3
    return np.einsum("ij,ijk->ik", w, diff)


def force_on(config: ChargeConfiguration, k: int) -> np.ndarray:
    """Force acting on charge ``k`` from all the others."""
    n = len(config)
    if not -n <= k < n:
        raise IndexError(f"charge index {k} out of range for {n} charges")
    k %= n
    others = np.arange(n) != k
    diff = config.positions[k] - config.positions[others]
    dist = np.linalg.norm(diff, axis=1)
    if dist.size and dist.min() < COINCIDENCE_DISTANCE:
        raise CoincidentCharges(f"charge {k} coincides with another charge")
    w = config.charges[k] * config.charges[others] / dist ** 3
    return w @ diff


@dataclass
class StaticStateReport:
    interior_residuals: List[Tuple[int, float]] = field(default_factory=list)
    # (index, tangential magnitude, signed normal component)
    boundary_reports: List[Tuple[int, float, float]] = field(default_factory=list)
    is_static: bool = True


def static_state_check(config: ChargeConfiguration, domain: ConductorDomain,
                       tol: float = 1e-9) -> StaticStateReport:
    """Check that interior charges feel no force and boundary charges are
    only pushed outward along the normal.

    Raises
    ------
    ChargeOutsideDomain
        If any charge lies outside the conductor.
    """
    btol = boundary_tolerance(domain)
    F = forces(config)
    report = StaticStateReport()
    ok = True
    for i, x in enumerate(config.positions):
        phi = signed_distance(domain, x)
        if phi > btol:
            raise ChargeOutsideDomain(f"charge {i} lies {phi:.3e} outside the conductor")
        if abs(phi) <= btol and not isinstance(domain, Segment):
            nvec = nearest_normal(domain, x)
            lam = float(F[i] @ nvec)
            tang = float(np.linalg.norm(F[i] - lam * nvec))
            report.boundary_reports.append((i, tang, lam))
            ok &= tang <= tol and lam >= -tol
        else:
            mag = float(np.linalg.norm(F[i]))
            report.interior_residuals.append((i, mag))
            ok &= mag <= tol
    report.is_static = bool(ok)
    return report


def cavendish_bound(Q: float, d: float, q: float, R: float) -> float:
    """Lower bound ``Q/d**2 - q/R**2`` on the field at the centre of a ball of
    radius ``R`` carrying point charges of total ``q``, with an external
    charge ``Q`` at distance ``d``.
    """
    if not d > R > 0:
        raise ValueError("need d > R > 0")
    return Q / d ** 2 - q / R ** 2


def field_at(config: ChargeConfiguration, x) -> np.ndarray:
    """Electric field ``-grad U`` of the configuration at ``x``."""
    x = as_vec3(x)
    diff = x - config.positions
    dist = np.linalg.norm(diff, axis=1)
    if dist.size and dist.min() < COINCIDENCE_DISTANCE:
        raise CoincidentCharges("field evaluated at a charge location")
    return (config.charges / dist ** 3) @ diff
