"""Batch front-end: ``fekete-field <command> [flags] [--config file.json]``.

Every command writes its artifacts under ``--output-dir`` together with a
``run.json`` manifest. Exit codes: 0 success, 2 invalid configuration,
3 numerical failure (partial results are still written and flagged).
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .equilibrium import Component, EquilibriumProblem, MinimizeOptions, minimize_energy
from .errors import FeketeFieldError, NotConverged, SeriesNotConverged
from .fieldscan import (PointSet, TwoBallSystem, UniformSphere, coulomb_gradient, curve_to_csv,
                        gauss_flux, jagged_source, label_grid, magnetic_trajectory,
                        oscillation_curve, sample_grid, yukawa_flux)
from .geometry import Ball, Segment, SphereSurface
from .imagecharge import TwoBallSpec, solve_nested_shells, solve_two_balls
from .pointcharge import ChargeConfiguration, cavendish_bound, format_float, static_state_check

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

SEED_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class Diagnostic:
    field: str
    constraint: str

    def __str__(self):
        return f"{self.field}: {self.constraint}"


@dataclass
class ScenarioConfig:
    command: str
    parameters: Dict[str, Any]
    output_dir: str = "."
    seed: int = 0


# -- parameter types -----------------------------------------------------------
# Each converter accepts the flag string or the native JSON value.

def _float(v):
    if isinstance(v, bool):
        raise ValueError("expected a number")
    x = float(v)
    if not math.isfinite(x):
        raise ValueError("must be finite")
    return x


def _int(v):
    if isinstance(v, bool):
        raise ValueError("expected an integer")
    if isinstance(v, str):
        return int(v.strip())
    if isinstance(v, float) and not v.is_integer():
        raise ValueError("expected an integer")
    return int(v)


def _floats(v):
    items = [s for s in v.split(",") if s.strip()] if isinstance(v, str) else list(v)
    return [_float(x) for x in items]


def _vec3(v):
    x = _floats(v)
    if len(x) != 3:
        raise ValueError("expected three comma-separated numbers")
    return x


def _points(v):
    # "x,y,z;x,y,z" or a list of triples
    rows = [s for s in v.split(";") if s.strip()] if isinstance(v, str) else list(v)
    return [_vec3(r) for r in rows]


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError("expected true or false")


def _str(v):
    return str(v)


@dataclass(frozen=True)
class Param:
    convert: Callable
    required: bool = False
    default: Any = None
    check: Optional[Callable[[Any], Optional[str]]] = None
    help: str = ""


def _positive(x):
    return None if x > 0 else "must be > 0"


def _at_least(k):
    return lambda x: None if x >= k else f"must be >= {k}"


def _one_of(*opts):
    return lambda x: None if x in opts else f"must be one of {', '.join(opts)}"


def _nonzero(x):
    return None if x != 0 else "must be non-zero"


def _all_positive(xs):
    return None if xs and all(x > 0 for x in xs) else "must be a non-empty list of values > 0"


_POINT_SOURCE = {
    "positions": Param(_points, help="charge positions 'x,y,z;x,y,z;...'"),
    "charges": Param(_floats, help="charge values 'q1,q2,...'"),
    "charges_file": Param(_str, help="CSV with header x,y,z,q"),
}

_GRID_SOURCE = {
    "source": Param(_str, default="jagged", check=_one_of("jagged", "points")),
    "n": Param(_int, default=12, check=_at_least(1), help="lattice parameter (jagged source)"),
    "r": Param(_float, default=1.0, check=_positive, help="lattice radius (jagged source)"),
    "d": Param(_float, default=6.0, check=_positive, help="lattice centre distance (jagged source)"),
    "q": Param(_float, help="charge per lattice point, default r/sqrt(N)"),
    **_POINT_SOURCE,
    "resolution": Param(_int, default=64, check=lambda x: None if 8 <= x <= 512 else "must lie in [8, 512]"),
    "margin": Param(_float, help="bbox clearance around the sources, default 2x source extent"),
}

COMMANDS: Dict[str, Dict[str, Param]] = {
    "equilibrium": {
        "domain": Param(_str, default="sphere", check=_one_of("sphere", "ball")),
        "radius": Param(_float, required=True, check=_positive),
        "center": Param(_vec3, default=[0.0, 0.0, 0.0]),
        "n": Param(_int, required=True, check=_at_least(1)),
        "q": Param(_float, default=1.0, check=_nonzero, help="value of every charge"),
        "restarts": Param(_int, default=8, check=_at_least(1)),
        "max_iterations": Param(_int, default=20000, check=_at_least(1)),
    },
    "two-balls": {
        "center1": Param(_vec3, default=[0.0, 0.0, 0.0]),
        "R": Param(_float, required=True, check=_positive),
        "Q": Param(_float, required=True),
        "center2": Param(_vec3, required=True),
        "r": Param(_float, required=True, check=_positive),
        "q": Param(_float, required=True),
        "eps_tail": Param(_float, default=1e-12, check=_positive),
        "n_max": Param(_int, default=200, check=_at_least(1)),
    },
    "oscillation": {
        "R": Param(_float, default=1.0, check=_positive),
        "q": Param(_float, default=1.0),
        "d_values": Param(_floats, check=_all_positive, help="explicit gaps; overrides d_min/d_max/count"),
        "d_min": Param(_float, default=0.1, check=_positive),
        "d_max": Param(_float, default=5.0, check=_positive),
        "count": Param(_int, default=20, check=_at_least(1)),
        "m": Param(_int, default=201, check=_at_least(2)),
        "eps_tail": Param(_float, default=1e-12, check=_positive),
        "n_max": Param(_int, default=200, check=_at_least(1)),
    },
    "shells": {
        "radii": Param(_floats, required=True),
        "q1": Param(_float, required=True),
        "with_outer_sphere": Param(_bool, default=False),
    },
    "flux": {
        "kind": Param(_str, default="gauss", check=_one_of("gauss", "yukawa")),
        "source": Param(_str, default="points", check=_one_of("points", "uniform-sphere", "two-balls")),
        **_POINT_SOURCE,
        "source_center": Param(_vec3, default=[0.0, 0.0, 0.0], help="uniform-sphere centre"),
        "r0": Param(_float, default=1.0, check=_positive, help="uniform-sphere radius"),
        "Q": Param(_float, default=1.0, help="uniform-sphere or ball-1 charge"),
        "center1": Param(_vec3, default=[0.0, 0.0, 0.0]),
        "R": Param(_float, default=1.0, check=_positive),
        "center2": Param(_vec3, default=[3.0, 0.0, 0.0]),
        "r": Param(_float, default=1.0, check=_positive),
        "q": Param(_float, default=1.0),
        "center": Param(_vec3, default=[0.0, 0.0, 0.0], help="quadrature sphere centre"),
        "radius": Param(_float, required=True, check=_positive, help="quadrature sphere radius"),
        "n_quad": Param(_int, default=2048, check=_at_least(2)),
        "n_vol": Param(_int, default=100000, check=_at_least(1)),
    },
    "levelset": {
        **_GRID_SOURCE,
        "threshold": Param(_float, help="default sqrt(N) for the jagged source"),
        "mode": Param(_str, default="partition", check=_one_of("above", "below", "partition")),
    },
    "grid": dict(_GRID_SOURCE),
    "trajectory": {
        "m": Param(_float, required=True, check=_positive),
        "v": Param(_float, required=True),
        "e": Param(_float, required=True),
        "H": Param(_float, required=True),
        "t": Param(_floats, required=True, help="time or comma-separated times"),
    },
    "static-check": {
        **_POINT_SOURCE,
        "domain": Param(_str, required=True, check=_one_of("ball", "sphere", "segment")),
        "center": Param(_vec3, default=[0.0, 0.0, 0.0]),
        "radius": Param(_float, check=_positive),
        "a": Param(_vec3, help="segment start"),
        "b": Param(_vec3, help="segment end"),
        "tol": Param(_float, default=1e-9, check=_positive),
    },
    "cavendish": {
        "n": Param(_int, default=50, check=_at_least(1)),
        "q": Param(_float, default=1.0, check=_nonzero, help="total charge on the ball"),
        "R": Param(_float, default=1.0, check=_positive),
        "Q": Param(_float, default=100.0),
        "d": Param(_float, default=2.0, check=_positive, help="distance of the external charge from the centre"),
        "restarts": Param(_int, default=4, check=_at_least(1)),
        "max_iterations": Param(_int, default=20000, check=_at_least(1)),
    },
}

OUTPUTS = {
    "equilibrium": ["points.csv"],
    "two-balls": ["charges.csv"],
    "oscillation": ["curve.csv"],
    "shells": ["charges.csv"],
    "flux": [],
    "levelset": ["grid.json", "grid.bin", "labels.bin", "components.json"],
    "grid": ["grid.json", "grid.bin"],
    "trajectory": ["points.csv"],
    "static-check": [],
    "cavendish": ["points.csv"],
}


# -- validation ----------------------------------------------------------------

def _normalise(config: ScenarioConfig):
    """Converted parameters with defaults filled in, plus diagnostics."""
    diags: List[Diagnostic] = []
    spec = COMMANDS.get(config.command)
    if spec is None:
        return {}, [Diagnostic("command", f"must be one of {', '.join(COMMANDS)}")]
    params: Dict[str, Any] = {}
    for key in config.parameters:
        if key not in spec:
            diags.append(Diagnostic(key, f"unknown parameter for {config.command}"))
    for key, p in spec.items():
        raw = config.parameters.get(key)
        if raw is None:
            if p.required:
                diags.append(Diagnostic(key, "required parameter is missing"))
            params[key] = p.default
            continue
        try:
            val = p.convert(raw)
        except (TypeError, ValueError) as exc:
            diags.append(Diagnostic(key, f"invalid value {raw!r}: {exc}"))
            continue
        msg = p.check(val) if p.check else None
        if msg:
            diags.append(Diagnostic(key, msg))
        params[key] = val
    if not isinstance(config.seed, int) or isinstance(config.seed, bool) or not 0 <= config.seed <= SEED_MAX:
        diags.append(Diagnostic("seed", "must be an integer in [0, 2**64 - 1]"))
    if not diags:
        diags += _cross_checks(config.command, params)
    return params, diags


def _config_points(params, field="positions") -> Optional[ChargeConfiguration]:
    if params.get("charges_file"):
        return ChargeConfiguration.from_csv(Path(params["charges_file"]).read_text())
    if params.get("positions") is None:
        return None
    return ChargeConfiguration(params["positions"], params["charges"])


def _check_points(params, diags):
    if params.get("charges_file"):
        path = Path(params["charges_file"])
        if not path.is_file():
            diags.append(Diagnostic("charges_file", "file does not exist"))
            return
        try:
            ChargeConfiguration.from_csv(path.read_text())
        except (KeyError, ValueError) as exc:
            diags.append(Diagnostic("charges_file", f"not a readable x,y,z,q CSV: {exc}"))
        return
    if params.get("positions") is None:
        diags.append(Diagnostic("positions", "point charges required (positions + charges, or charges_file)"))
        return
    if params.get("charges") is None or len(params["charges"]) != len(params["positions"]):
        diags.append(Diagnostic("charges", "must list one value per position"))


def _source_extent(params) -> float:
    if params["source"] == "jagged":
        return params["r"]
    P = _config_points(params).positions
    return float(max(np.max(np.ptp(P, axis=0)) / 2.0, 0.0)) if len(P) else 0.0


def _cross_checks(command, p) -> List[Diagnostic]:
    diags: List[Diagnostic] = []
    if command == "two-balls":
        dist = float(np.linalg.norm(np.subtract(p["center2"], p["center1"])))
        if dist <= p["R"] + p["r"]:
            diags.append(Diagnostic("center2", "balls must be disjoint: |center2 - center1| > R + r"))
    elif command == "oscillation":
        if p["d_values"] is None and not p["d_max"] >= p["d_min"]:
            diags.append(Diagnostic("d_max", "must be >= d_min"))
    elif command == "shells":
        r = p["radii"]
        if len(r) % 2 == 0 or len(r) > 64:
            diags.append(Diagnostic("radii", "need an odd count of at most 64 radii"))
        if not all(x > 0 for x in r) or any(b <= a for a, b in zip(r, r[1:])):
            diags.append(Diagnostic("radii", "must be positive and strictly increasing"))
        if r and p["with_outer_sphere"] and r[-1] >= 1:
            diags.append(Diagnostic("radii", "must all be < 1 with the outer sphere"))
    elif command == "flux":
        if p["source"] == "points":
            _check_points(p, diags)
        if p["source"] == "two-balls":
            dist = float(np.linalg.norm(np.subtract(p["center2"], p["center1"])))
            if dist <= p["R"] + p["r"]:
                diags.append(Diagnostic("center2", "balls must be disjoint: |center2 - center1| > R + r"))
    elif command in ("levelset", "grid"):
        if p["source"] == "jagged":
            if not p["d"] > 2 * p["r"]:
                diags.append(Diagnostic("d", "lattices must be separated: d > 2r"))
        else:
            _check_points(p, diags)
            if command == "levelset" and p["threshold"] is None:
                diags.append(Diagnostic("threshold", "required for a point-charge source"))
        if not diags and p["margin"] is not None and p["margin"] < 2 * _source_extent(p):
            diags.append(Diagnostic("margin", "bbox margin must be >= 2x the source extent"))
    elif command == "static-check":
        _check_points(p, diags)
        if p["domain"] in ("ball", "sphere") and p["radius"] is None:
            diags.append(Diagnostic("radius", "required for a ball or sphere domain"))
        if p["domain"] == "segment":
            for key in ("a", "b"):
                if p[key] is None:
                    diags.append(Diagnostic(key, "required for a segment domain"))
            if p["a"] is not None and p["a"] == p["b"]:
                diags.append(Diagnostic("b", "segment endpoints must differ"))
    elif command == "cavendish":
        if not p["d"] > p["R"]:
            diags.append(Diagnostic("d", "external charge must lie outside the ball: d > R"))
    return diags


def validate(config: ScenarioConfig) -> List[Diagnostic]:
    """Diagnostics for ``config``; empty exactly when :func:`run` would start."""
    return _normalise(config)[1]


# -- commands ------------------------------------------------------------------

class _Failed(Exception):
    """Numerical failure after partial results were written."""

    def __init__(self, message, summary):
        super().__init__(message)
        self.summary = summary


def _write(out: Path, name: str, text: str):
    with open(out / name, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _cmd_equilibrium(p, seed, out):
    domain = (SphereSurface if p["domain"] == "sphere" else Ball)(p["center"], p["radius"])
    opts = MinimizeOptions(max_iterations=p["max_iterations"], restarts=p["restarts"], rng_seed=seed)
    res = minimize_energy(EquilibriumProblem([Component(domain, p["n"], p["q"])], opts))
    _write(out, "points.csv", res.config.to_csv())
    summary = res.summary()
    if not res.converged:
        raise _Failed("minimisation did not reach the gradient tolerance", summary)
    return summary


def _two_ball_summary(system):
    return {
        "C": system.C,
        "D": system.D,
        "potential1": system.potential1,
        "potential2": system.potential2,
        "truncation_n": system.truncation_n,
        "tail_bound": system.tail_bound,
    }


def _cmd_two_balls(p, seed, out):
    spec = TwoBallSpec(p["center1"], p["R"], p["Q"], p["center2"], p["r"], p["q"])
    try:
        system = solve_two_balls(spec, eps_tail=p["eps_tail"], n_max=p["n_max"])
    except SeriesNotConverged as exc:
        if exc.system is not None:
            _write(out, "charges.csv", exc.system.to_csv())
            raise _Failed(str(exc), {**_two_ball_summary(exc.system), "converged": False}) from exc
        raise
    _write(out, "charges.csv", system.to_csv())
    return {**_two_ball_summary(system), "converged": True}


def _gaps(p):
    if p["d_values"] is not None:
        return list(p["d_values"])
    if p["count"] == 1:
        return [p["d_min"]]
    return [float(x) for x in np.linspace(p["d_min"], p["d_max"], p["count"])]


def _cmd_oscillation(p, seed, out):
    curve = []
    failure = None
    for d in _gaps(p):
        try:
            curve += oscillation_curve(p["R"], p["q"], [d], m=p["m"], eps_tail=p["eps_tail"], n_max=p["n_max"])
        except SeriesNotConverged as exc:
            failure = f"gap {format_float(d)}: {exc}"
            break
    _write(out, "curve.csv", curve_to_csv(curve))
    summary = {"points": len(curve), "E_min": min((e for _, e in curve), default=None),
               "E_max": max((e for _, e in curve), default=None), "converged": failure is None}
    if failure:
        raise _Failed(failure, summary)
    return summary


def _cmd_shells(p, seed, out):
    sol = solve_nested_shells(p["radii"], p["q1"], with_outer_sphere=p["with_outer_sphere"])
    radii = list(sol.radii) + ([1.0] if sol.with_outer_sphere else [])
    lines = ["radius,q"] + [f"{format_float(r)},{format_float(q)}" for r, q in zip(radii, sol.charges)]
    _write(out, "charges.csv", "\n".join(lines) + "\n")
    return {"charges": [float(q) for q in sol.charges],
            "potential_levels": [float(u) for u in sol.potential_levels]}


def _flux_source(p):
    if p["source"] == "points":
        return PointSet(_config_points(p))
    if p["source"] == "uniform-sphere":
        return UniformSphere(p["source_center"], p["r0"], p["Q"])
    spec = TwoBallSpec(p["center1"], p["R"], p["Q"], p["center2"], p["r"], p["q"])
    return TwoBallSystem(solve_two_balls(spec))


def _cmd_flux(p, seed, out):
    src = _flux_source(p)
    if p["kind"] == "gauss":
        res = gauss_flux(src, p["center"], p["radius"], n_quad=p["n_quad"])
    else:
        res = yukawa_flux(src, p["center"], p["radius"], n_quad=p["n_quad"], n_vol=p["n_vol"], seed=seed)
    return {"enclosed_charge": res.enclosed_charge, "quadrature_points": res.quadrature_points,
            "estimated_error": res.estimated_error}


def _grid_setup(p):
    """Source, bbox and default threshold for the grid commands."""
    if p["source"] == "jagged":
        src, N, thr = jagged_source(p["n"], p["r"], p["d"], p["q"])
        lo = np.array([0.0, 0.0, 0.0]) - p["r"]
        hi = np.array([p["d"], 0.0, 0.0]) + p["r"]
        extent = p["r"]
    else:
        cfg = _config_points(p)
        src, N, thr = PointSet(cfg), len(cfg), None
        lo, hi = cfg.positions.min(axis=0), cfg.positions.max(axis=0)
        extent = _source_extent(p)
    margin = p["margin"] if p["margin"] is not None else 2.0 * extent
    margin = margin if margin > 0 else 1.0
    return src, (lo - margin, hi + margin), thr, N


def _grid_summary(grid, N):
    return {"resolution": list(grid.resolution), "bbox": [grid.bbox_min.tolist(), grid.bbox_max.tolist()],
            "N": N, "value_min": float(np.min(grid.values)), "value_max": float(np.max(grid.values[np.isfinite(grid.values)]))}


def _cmd_levelset(p, seed, out):
    src, bbox, thr, N = _grid_setup(p)
    threshold = p["threshold"] if p["threshold"] is not None else thr
    grid = label_grid(sample_grid(src, bbox, p["resolution"]), threshold, p["mode"])
    grid.write(out, with_labels=True)
    return {**_grid_summary(grid, N), "threshold": threshold, "mode": p["mode"],
            "n_components": grid.n_components, "unbounded": len(grid.unbounded)}


def _cmd_grid(p, seed, out):
    src, bbox, _, N = _grid_setup(p)
    grid = sample_grid(src, bbox, p["resolution"])
    grid.write(out, with_labels=False)
    return _grid_summary(grid, N)


def _cmd_trajectory(p, seed, out):
    lines = ["t,x,y,z"]
    for t in p["t"]:
        x = magnetic_trajectory(p["m"], p["v"], p["e"], p["H"], t)
        lines.append(",".join(format_float(v) for v in (t, *x)))
    _write(out, "points.csv", "\n".join(lines) + "\n")
    return {"samples": len(p["t"])}


def _cmd_static_check(p, seed, out):
    cfg = _config_points(p)
    if p["domain"] == "segment":
        domain = Segment(p["a"], p["b"])
    else:
        domain = (SphereSurface if p["domain"] == "sphere" else Ball)(p["center"], p["radius"])
    rep = static_state_check(cfg, domain, tol=p["tol"])
    return {"is_static": rep.is_static,
            "interior": [{"index": i, "force": f} for i, f in rep.interior_residuals],
            "boundary": [{"index": i, "tangential": t, "normal": lam} for i, t, lam in rep.boundary_reports]}


def _cmd_cavendish(p, seed, out):
    R, d = p["R"], p["d"]
    fixed = ChargeConfiguration([[d, 0.0, 0.0]], [p["Q"]])
    opts = MinimizeOptions(max_iterations=p["max_iterations"], restarts=p["restarts"], rng_seed=seed)
    comp = Component(Ball((0, 0, 0), R), p["n"], p["q"] / p["n"])
    res = minimize_energy(EquilibriumProblem([comp], opts, fixed=fixed))
    _write(out, "points.csv", res.config.to_csv())
    both = ChargeConfiguration(np.vstack([res.config.positions, fixed.positions]),
                               np.concatenate([res.config.charges, fixed.charges]))
    g = float(np.linalg.norm(coulomb_gradient(PointSet(both), np.zeros(3))))
    bound = cavendish_bound(p["Q"], d, p["q"], R)
    summary = {**res.summary(), "field_at_centre": g, "bound": bound, "bound_holds": g >= bound}
    if not res.converged:
        raise _Failed("minimisation did not reach the gradient tolerance", summary)
    return summary


_HANDLERS = {
    "equilibrium": _cmd_equilibrium,
    "two-balls": _cmd_two_balls,
    "oscillation": _cmd_oscillation,
    "shells": _cmd_shells,
    "flux": _cmd_flux,
    "levelset": _cmd_levelset,
    "grid": _cmd_grid,
    "trajectory": _cmd_trajectory,
    "static-check": _cmd_static_check,
    "cavendish": _cmd_cavendish,
}


def _manifest(config, params, wall, summary, converged, error=None):
    doc = {
        "command": config.command,
        "parameters": params,
        "seed": config.seed,
        "version": __version__,
        "outputs": OUTPUTS[config.command] + ["run.json"],
        "converged": converged,
        "summary": summary,
        "wall_time": wall,
    }
    if error:
        doc["error"] = error
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def _finite(obj):
    """Replace non-finite floats so the manifest stays strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def run(config: ScenarioConfig, stderr=None) -> int:
    """Execute ``config``, write its artifacts and return the exit status."""
    stderr = stderr or sys.stderr
    params, diags = _normalise(config)
    if diags:
        for dg in diags:
            print(f"config error: {dg}", file=stderr)
        return EXIT_INVALID
    out = Path(config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    status, error = EXIT_OK, None
    try:
        summary = _HANDLERS[config.command](params, config.seed, out)
        converged = bool(summary.get("converged", True))
    except _Failed as exc:
        summary, converged, status, error = exc.summary, False, EXIT_NUMERICAL, str(exc)
    except (NotConverged, SeriesNotConverged) as exc:
        summary, converged, status, error = {}, False, EXIT_NUMERICAL, str(exc)
    except FeketeFieldError as exc:
        summary, converged, status, error = {}, False, EXIT_NUMERICAL, f"{type(exc).__name__}: {exc}"
    wall = time.perf_counter() - t0
    _write(out, "run.json", _manifest(config, _finite(params), wall, _finite(summary), converged, error))
    if error:
        print(f"numerical failure: {error}", file=stderr)
    return status


# -- argument parsing ----------------------------------------------------------

def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fekete-field", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", metavar="command")
    for name, spec in COMMANDS.items():
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON scenario file; flags override its values")
        sp.add_argument("--output-dir", dest="output_dir")
        sp.add_argument("--seed")
        for key, prm in spec.items():
            flag = "--" + key.replace("_", "-")
            sp.add_argument(flag, dest="p_" + key, metavar=key.upper(),
                            help=prm.help or None, default=None)
    return ap


def config_from_args(argv=None):
    """Parse argv into a :class:`ScenarioConfig`, or return diagnostics."""
    ns = _parser().parse_args(argv)
    if ns.command is None:
        return None, [Diagnostic("command", f"missing; choose one of {', '.join(COMMANDS)}")]
    params: Dict[str, Any] = {}
    output_dir, seed = ".", 0
    if ns.config:
        try:
            doc = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            return None, [Diagnostic("config", f"cannot read JSON file: {exc}")]
        if not isinstance(doc, dict):
            return None, [Diagnostic("config", "top level must be a JSON object")]
        if doc.get("command", ns.command) != ns.command:
            return None, [Diagnostic("command", f"file is for {doc['command']!r}, not {ns.command!r}")]
        params.update(doc.get("parameters", {}))
        params.update({k: v for k, v in doc.items() if k not in ("command", "parameters", "output_dir", "seed")})
        output_dir = doc.get("output_dir", output_dir)
        seed = doc.get("seed", seed)
    for key, val in vars(ns).items():
        if key.startswith("p_") and val is not None:
            params[key[2:]] = val
    if ns.output_dir is not None:
        output_dir = ns.output_dir
    if ns.seed is not None:
        try:
            seed = int(ns.seed)
        except ValueError:
            return None, [Diagnostic("seed", "must be an integer in [0, 2**64 - 1]")]
    return ScenarioConfig(ns.command, params, str(output_dir), seed), []


def main(argv=None) -> int:
    config, diags = config_from_args(argv)
    if diags:
        for dg in diags:
            print(f"config error: {dg}", file=sys.stderr)
        return EXIT_INVALID
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
