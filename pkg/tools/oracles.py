"""Independent reference values frozen into ``tests/fixtures/oracles.json``.

* Thomson energies for n = 6 and 12 from a multi-start L-BFGS search in
  spherical angles (scipy only, no package code involved).
* Oscillation E(d) of two unit balls carrying unit charge each, from a
  surface-charge relaxation: both spheres are discretised with the ring
  lattice, relaxed by the equilibrium minimiser, and E is taken as the
  potential at a ball centre (the conductor level) minus the potential at
  the midpoint of the gap.

Run once; the tests only read the JSON.
"""
import json
import time
from pathlib import Path

import numpy as np
from scipy.optimize import minimize
from scipy.spatial.distance import pdist

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "oracles.json"


def _points(angles):
    th, ph = angles[0::2], angles[1::2]
    return np.column_stack([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])


def _energy(angles):
    return float(np.sum(1.0 / pdist(_points(angles))))


def thomson_bruteforce(n, starts=200, seed=12345):
    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(starts):
        x0 = np.column_stack([np.arccos(rng.uniform(-1, 1, n)), rng.uniform(0, 2 * np.pi, n)]).ravel()
        res = minimize(_energy, x0, method="L-BFGS-B", options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 10000})
        best = min(best, res.fun)
    return best


def relaxation_oscillation(d, n_lattice=12, R=1.0, Q=1.0):
    from fekete_field.equilibrium import Component, EquilibriumProblem, MinimizeOptions, minimize_energy
    from fekete_field.fieldscan import PointSet, coulomb_potential
    from fekete_field.geometry import Ball, spherical_lattice

    lat = spherical_lattice(n_lattice, R)
    N = lat.N
    c2 = np.array([d + 2 * R, 0.0, 0.0])
    problem = EquilibriumProblem(
        [Component(Ball((0, 0, 0), R), N, Q / N), Component(Ball(c2, R), N, Q / N)],
        MinimizeOptions(restarts=1, gradient_tol=1e-7),
    )
    res = minimize_energy(problem, initial=np.vstack([lat.points, lat.points + c2]))
    src = PointSet(res.config)
    E = coulomb_potential(src, (0, 0, 0)) - coulomb_potential(src, c2 / 2)
    return {"d": d, "E": E, "N_per_ball": N, "converged": res.converged}


def main():
    t0 = time.time()
    out = {"thomson": {}, "oscillation_relaxation": {"R": 1.0, "Q": 1.0, "n_lattice": 12, "points": []}}
    for n in (6, 12):
        out["thomson"][str(n)] = thomson_bruteforce(n)
        print("thomson", n, repr(out["thomson"][str(n)]), flush=True)
    for d in (2.0, 3.0, 4.0):
        row = relaxation_oscillation(d)
        out["oscillation_relaxation"]["points"].append(row)
        print("relaxation", row, flush=True)
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps(out, indent=2) + "\n")
    print(f"done in {time.time() - t0:.0f} s")


if __name__ == "__main__":
    main()
