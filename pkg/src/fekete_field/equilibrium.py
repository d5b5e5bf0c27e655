"""Minimum-energy placement of point charges on conductors.

Projected gradient descent with Armijo backtracking, restarted from
several random boundary configurations; the best restart wins.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist

from ._parallel import worker_count
from .errors import InfeasibleProblem, NonConvexDomain, NotConverged
from .geometry import (Ball, BallUnion, ConductorDomain, NestedShells, Segment,
                       SphereSurface, boundary_tolerance, diameter,
                       nearest_normal, project_to_domain, sample_boundary,
                       signed_distance)
from .pointcharge import COINCIDENCE_DISTANCE, ChargeConfiguration

logger = logging.getLogger(__name__)


@dataclass
class MinimizeOptions:
    max_iterations: int = 20000
    # None means 1e-9 * n * max(q)**2
    gradient_tol: Optional[float] = None
    restarts: int = 8
    rng_seed: int = 0
    step_shrink: float = 0.5
    armijo: float = 1e-4

    def __post_init__(self):
        if self.gradient_tol is not None and not self.gradient_tol > 0:
            raise ValueError("gradient_tol must be positive")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not 0 < self.step_shrink < 1:
            raise ValueError("step_shrink must lie in (0, 1)")


@dataclass
class Component:
    """``count`` charges, each of value ``charge``, confined to ``domain``."""

    domain: ConductorDomain
    count: int
    charge: float | Sequence[float] = 1.0

    def charges(self) -> np.ndarray:
        q = np.broadcast_to(np.asarray(self.charge, dtype=float), (self.count,)).copy()
        return q


@dataclass
class EquilibriumProblem:
    components: List[Component]
    options: MinimizeOptions = field(default_factory=MinimizeOptions)
    # Immobile external charges; they push the free ones but never move.
    fixed: Optional[ChargeConfiguration] = None

    def __post_init__(self):
        comps = []
        for c in self.components:
            if not isinstance(c, Component):
                c = Component(*c)
            comps.append(c)
        self.components = comps
        for j, c in enumerate(self.components):
            q = np.asarray(c.charge, dtype=float)
            if c.count == 0:
                if np.any(q != 0):
                    raise InfeasibleProblem(f"component {j} has charge but no carriers")
                continue
            qs = c.charges()
            if np.any(qs > 0) and np.any(qs < 0):
                raise InfeasibleProblem(f"component {j} mixes charge signs")

    def flat(self):
        q = np.concatenate([c.charges() for c in self.components]) if self.components else np.zeros(0)
        comp = np.concatenate([np.full(c.count, j) for j, c in enumerate(self.components)]).astype(int)
        return q, comp

    def resolved_tol(self) -> float:
        if self.options.gradient_tol is not None:
            return self.options.gradient_tol
        q, _ = self.flat()
        if q.size == 0:
            return 1e-9
        return 1e-9 * q.size * float(np.max(np.abs(q))) ** 2


@dataclass
class EquilibriumResult:
    config: ChargeConfiguration
    energy: float
    projected_gradient_norm: float
    lagrange_multipliers: np.ndarray
    boundary_max_distance: float
    converged: bool
    iterations: int = 0
    restart: int = 0
    seed: int = 0

    def summary(self) -> dict:
        lam = self.lagrange_multipliers
        return {
            "energy": self.energy,
            "converged": self.converged,
            "lambda_min": float(lam.min()) if lam.size else 0.0,
            "boundary_max_distance": self.boundary_max_distance,
            "projected_gradient_norm": self.projected_gradient_norm,
            "seed": self.seed,
        }


class _Objective:
    """Energy and forces for the mobile charges, including fixed ones."""

    def __init__(self, q, fixed: Optional[ChargeConfiguration]):
        self.q = q
        self.qq = np.triu(np.outer(q, q), k=1)
        if fixed is not None and len(fixed):
            self.fpos, self.fq = fixed.positions, fixed.charges
        else:
            self.fpos, self.fq = np.zeros((0, 3)), np.zeros(0)

    def energy(self, P) -> float:
        n = len(P)
        W = 0.0
        if n > 1:
            d = pdist(P)
            if d.min() < COINCIDENCE_DISTANCE:
                return np.inf
            iu = np.triu_indices(n, k=1)
            W = float(np.sum(self.qq[iu] / d))
        if len(self.fq):
            diff = P[:, None, :] - self.fpos[None, :, :]
            dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            if dist.min() < COINCIDENCE_DISTANCE:
                return np.inf
            W += float(np.sum(self.q[:, None] * self.fq[None, :] / dist))
        return W

    def energy_change(self, P, S) -> float:
        """``energy(P + S) - energy(P)`` without catastrophic cancellation.

        Per pair ``e - d = dv.(2v + dv) / (d + e)`` with ``dv`` taken from
        the step itself, so tiny steps keep full relative accuracy.
        """
        dW = 0.0
        n = len(P)
        if n > 1:
            i, j = np.triu_indices(n, k=1)
            v, dv = P[i] - P[j], S[i] - S[j]
            w = v + dv
            d = np.sqrt(np.einsum("ij,ij->i", v, v))
            e = np.sqrt(np.einsum("ij,ij->i", w, w))
            if e.min() < COINCIDENCE_DISTANCE:
                return np.inf
            de = np.einsum("ij,ij->i", dv, v + w) / (d + e)
            dW += float(np.sum(-self.qq[i, j] * de / (d * e)))
        if len(self.fq):
            v = P[:, None, :] - self.fpos[None, :, :]
            dv = np.broadcast_to(S[:, None, :], v.shape)
            w = v + dv
            d = np.sqrt(np.einsum("ijk,ijk->ij", v, v))
            e = np.sqrt(np.einsum("ijk,ijk->ij", w, w))
            if e.min() < COINCIDENCE_DISTANCE:
                return np.inf
            de = np.einsum("ijk,ijk->ij", dv, v + w) / (d + e)
            dW += float(np.sum(-(self.q[:, None] * self.fq[None, :]) * de / (d * e)))
        return dW

    def forces(self, P) -> np.ndarray:
        n = len(P)
        F = np.zeros((n, 3))
        if n > 1:
            diff = P[:, None, :] - P[None, :, :]
            dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            np.fill_diagonal(dist, np.inf)
            w = (self.q[:, None] * self.q[None, :]) / dist ** 3
            F += np.einsum("ij,ijk->ik", w, diff)
        if len(self.fq):
            diff = P[:, None, :] - self.fpos[None, :, :]
            dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
            w = (self.q[:, None] * self.fq[None, :]) / dist ** 3
            F += np.einsum("ij,ijk->ik", w, diff)
        return F


class _Constraints:
    """Per-charge domain bookkeeping with vectorised paths for balls/spheres."""

    def __init__(self, domains, comp):
        self.domains = domains
        self.comp = comp
        self.groups = [(np.flatnonzero(comp == j), d) for j, d in enumerate(domains)]
        self.btol = [boundary_tolerance(d) for d in domains]

    def project(self, P):
        out = P.copy()
        for idx, dom in self.groups:
            if idx.size == 0:
                continue
            if isinstance(dom, (Ball, SphereSurface)):
                v = P[idx] - dom.center
                r = np.linalg.norm(v, axis=1)
                move = r > dom.radius if isinstance(dom, Ball) else np.ones(len(idx), bool)
                move &= r > 0
                out[idx[move]] = dom.center + dom.radius * v[move] / r[move, None]
            else:
                for i in idx:
                    out[i] = project_to_domain(dom, P[i])
        return out

    def signed_distances(self, P):
        out = np.empty(len(P))
        for idx, dom in self.groups:
            if isinstance(dom, Ball):
                out[idx] = np.linalg.norm(P[idx] - dom.center, axis=1) - dom.radius
            elif isinstance(dom, SphereSurface):
                out[idx] = np.abs(np.linalg.norm(P[idx] - dom.center, axis=1) - dom.radius)
            else:
                out[idx] = [signed_distance(dom, P[i]) for i in idx]
        return out

    def residual(self, P, F):
        """Component of the force that a feasible move could still exploit."""
        R = F.copy()
        lam = np.zeros(len(P))
        phi = self.signed_distances(P)
        for j, (idx, dom) in enumerate(self.groups):
            if idx.size == 0:
                continue
            if isinstance(dom, Segment):
                ab = dom.b - dom.a
                L = np.linalg.norm(ab)
                u = ab / L if L > 0 else np.zeros(3)
                for i in idx:
                    along = float(F[i] @ u)
                    t = float((P[i] - dom.a) @ u)
                    if (t <= 0 and along < 0) or (t >= L and along > 0):
                        along = 0.0
                    R[i] = along * u
                continue
            on = np.abs(phi[idx]) <= self.btol[j]
            if isinstance(dom, (Ball, SphereSurface)):
                act = idx[on]
                nv = P[act] - dom.center
                nv /= np.linalg.norm(nv, axis=1, keepdims=True)
                fn = np.einsum("ij,ij->i", F[act], nv)
                lam[act] = fn
                keep = fn if isinstance(dom, SphereSurface) else np.maximum(fn, 0.0)
                R[act] = F[act] - keep[:, None] * nv
                continue
            for i in idx[on]:
                nvec = nearest_normal(dom, P[i])
                fn = float(F[i] @ nvec)
                lam[i] = fn
                if isinstance(dom, SphereSurface):
                    R[i] = F[i] - fn * nvec
                else:
                    R[i] = F[i] - max(fn, 0.0) * nvec
        return R, lam


def _descend(obj: _Objective, cons: _Constraints, P0, opts: MinimizeOptions,
             tol: float, scale: float):
    P = cons.project(P0)
    W = obj.energy(P)
    F = obj.forces(P)
    fmax = float(np.max(np.linalg.norm(F, axis=1))) if len(F) else 0.0
    alpha = 0.1 * scale / fmax if fmax > 0 else 1.0
    alpha_min = 1e-14 * alpha
    R, _ = cons.residual(P, F)
    gnorm = float(np.linalg.norm(R))
    it = 0
    while it < opts.max_iterations and gnorm > tol:
        it += 1
        a = alpha
        # Re-normalising boundary points perturbs them radially by an ulp,
        # which moves the energy by about this much; below it the energy
        # test is blind and only the residual carries information.
        noise = 64 * np.finfo(float).eps * float(
            np.sum(np.linalg.norm(F, axis=1) * np.linalg.norm(P, axis=1)))
        while True:
            # Step along the reduced force: its normal part on an active
            # boundary would only be undone by the projection.
            Y = cons.project(P + a * R)
            S = Y - P
            ss = float(np.sum(S * S))
            dW = obj.energy_change(P, S)
            if ss > 0 and dW <= -opts.armijo * ss / a + noise:
                break
            a *= opts.step_shrink
            if a < alpha_min:
                return P, W, gnorm, it
        Fy = obj.forces(Y)
        Ry, _ = cons.residual(Y, Fy)
        sy = float(np.sum(S * (R - Ry)))
        # Barzilai-Borwein guess for the next trial step; backtracking keeps
        # the energy monotone regardless.
        alpha = ss / sy if sy > 0 else 2.0 * a
        alpha = min(max(alpha, 1e-3 * a), 1e3 * a)
        P, W, F, R = Y, W + dW, Fy, Ry
        gnorm = float(np.linalg.norm(R))
    return P, W, gnorm, it


def minimize_energy(problem: EquilibriumProblem, initial=None,
                    strict: bool = False) -> EquilibriumResult:
    """Find the lowest-energy placement over all restarts.

    Parameters
    ----------
    problem : EquilibriumProblem
    initial : (n, 3) array, optional
        Starting positions for restart 0; other restarts start from random
        boundary samples.
    strict : bool
        Raise :class:`NotConverged` instead of returning an unconverged
        best iterate.
    """
    opts = problem.options
    q, comp = problem.flat()
    n = q.size
    domains = [c.domain for c in problem.components]
    obj = _Objective(q, problem.fixed)
    cons = _Constraints(domains, comp)
    tol = problem.resolved_tol()
    scale = max(diameter(d) for d in domains) if domains else 1.0

    seeds = np.random.SeedSequence(opts.rng_seed).spawn(opts.restarts)

    def run(i):
        rng = np.random.default_rng(seeds[i])
        if i == 0 and initial is not None:
            P0 = np.asarray(initial, dtype=float).reshape(n, 3)
        else:
            P0 = np.zeros((n, 3))
            for idx, dom in cons.groups:
                if idx.size:
                    P0[idx] = sample_boundary(dom, idx.size, rng)
        return _descend(obj, cons, P0, opts, tol, scale)

    workers = min(worker_count(), opts.restarts)
    if workers > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            runs = list(ex.map(run, range(opts.restarts)))
    else:
        runs = [run(i) for i in range(opts.restarts)]

    # index-ordered reduction keeps the choice deterministic
    best = min(range(len(runs)), key=lambda i: (runs[i][1], i))
    P, _, gnorm, it = runs[best]
    W = obj.energy(P)
    F = obj.forces(P)
    _, lam = cons.residual(P, F)
    phi = cons.signed_distances(P)
    result = EquilibriumResult(
        config=ChargeConfiguration(P, q, comp),
        energy=float(W),
        projected_gradient_norm=gnorm,
        lagrange_multipliers=lam,
        boundary_max_distance=float(np.max(np.abs(phi))) if n else 0.0,
        converged=bool(gnorm <= tol),
        iterations=it,
        restart=best,
        seed=opts.rng_seed,
    )
    if not result.converged:
        logger.warning("minimisation stopped at gradient %.3e > tol %.3e", gnorm, tol)
        if strict:
            raise NotConverged("projected gradient above tolerance", result)
    return result


def total_forces(result: EquilibriumResult, problem: EquilibriumProblem) -> np.ndarray:
    q, _ = problem.flat()
    return _Objective(q, problem.fixed).forces(result.config.positions)


def verify_boundary(result: EquilibriumResult, problem: EquilibriumProblem) -> float:
    """Largest distance from any charge to the boundary of its conductor."""
    _, comp = problem.flat()
    cons = _Constraints([c.domain for c in problem.components], comp)
    phi = cons.signed_distances(result.config.positions)
    return float(np.max(np.abs(phi))) if phi.size else 0.0


class LagrangeEntry(NamedTuple):
    multiplier: float
    residual: float
    force_norm: float

    def ok(self, tol: float) -> bool:
        return self.multiplier >= -tol and self.residual <= tol * max(1.0, self.force_norm)


def _is_convex(domain: ConductorDomain) -> bool:
    if isinstance(domain, BallUnion):
        return len(domain.balls) == 1
    return isinstance(domain, (Ball, SphereSurface))


def lagrange_check(result: EquilibriumResult, problem: EquilibriumProblem,
                   tol: float = 1e-6) -> List[LagrangeEntry]:
    """Multiplier and parallelism residual for every charge.

    On the boundary the force should equal ``lambda * n`` with
    ``lambda >= 0``. A charge off the boundary has an inactive constraint,
    so its multiplier is zero and its residual is the whole force.

    Raises
    ------
    NonConvexDomain
        For multi-ball unions, nested shells and segments.
    """
    for c in problem.components:
        if not _is_convex(c.domain):
            raise NonConvexDomain(f"{type(c.domain).__name__} is not a convex smooth domain")
    q, comp = problem.flat()
    F = _Objective(q, problem.fixed).forces(result.config.positions)
    out = []
    for i, x in enumerate(result.config.positions):
        dom = problem.components[comp[i]].domain
        fnorm = float(np.linalg.norm(F[i]))
        if abs(signed_distance(dom, x)) <= boundary_tolerance(dom):
            nvec = nearest_normal(dom, x)
            lam = float(F[i] @ nvec)
            out.append(LagrangeEntry(lam, float(np.linalg.norm(F[i] - lam * nvec)), fnorm))
        else:
            out.append(LagrangeEntry(0.0, fnorm, fnorm))
    return out


def distance_signature(positions) -> np.ndarray:
    """Sorted pairwise distances; identifies a configuration up to isometry."""
    return np.sort(pdist(np.asarray(positions, dtype=float).reshape(-1, 3)))
