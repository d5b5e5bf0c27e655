"""Small, fast CLI scenarios shared by the CLI and acceptance tests."""
import json

# one small, fast scenario per command
SCENARIOS = {
    "equilibrium": {"domain": "sphere", "radius": 1, "n": 5, "restarts": 2},
    "two-balls": {"R": 1, "Q": 1, "center2": [3, 0, 0], "r": 0.5, "q": -0.5},
    "oscillation": {"d_values": [0.5, 1, 2], "m": 21},
    "shells": {"radii": [0.2, 0.4, 0.6], "q1": 1},
    "flux": {"kind": "yukawa", "positions": [[0, 0, 0]], "charges": [1], "radius": 1, "n_vol": 5000},
    "levelset": {"n": 4, "d": 5, "resolution": 24},
    "grid": {"n": 3, "d": 4, "resolution": 16},
    "trajectory": {"m": 1, "v": 1, "e": 1, "H": 1, "t": [0, 0.5, 1]},
    "static-check": {"positions": "-1,0,0;0,0,0;1,0,0", "charges": "4,-1,4", "domain": "ball", "radius": 2},
    "cavendish": {"n": 12, "restarts": 1},
}


def artifacts(directory):
    """File name -> bytes; ``run.json`` is compared without its wall time."""
    out = {}
    for p in sorted(directory.iterdir()):
        data = p.read_bytes()
        if p.name == "run.json":
            doc = json.loads(data)
            doc.pop("wall_time")
            data = json.dumps(doc, sort_keys=True).encode()
        out[p.name] = data
    return out
