"""Voxel sampling of a potential and connected components of its level sets.

Components use 6-neighbour connectivity and are numbered in raster
(C, x-major) order of their first voxel, so ids are reproducible.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import numpy as np
from scipy import ndimage

from ..errors import ResolutionOutOfRange
from ..geometry import spherical_lattice
from ..pointcharge import ChargeConfiguration
from .sources import PointSet

MIN_RESOLUTION = 8
MAX_RESOLUTION = 512
MODES = ("above", "below", "partition")

_SIX = ndimage.generate_binary_structure(3, 1)


@dataclass
class ScalarFieldGrid:
    bbox_min: np.ndarray
    bbox_max: np.ndarray
    resolution: tuple
    values: np.ndarray
    labels: np.ndarray
    threshold: float = math.nan
    mode: str = ""
    components: List[dict] = field(default_factory=list)

    def axes(self):
        return [np.linspace(lo, hi, n) for lo, hi, n in zip(self.bbox_min, self.bbox_max, self.resolution)]

    def node(self, index) -> np.ndarray:
        return np.array([ax[i] for ax, i in zip(self.axes(), index)])

    def nearest_index(self, x):
        return tuple(int(np.argmin(np.abs(ax - xi))) for ax, xi in zip(self.axes(), x))

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def unbounded(self) -> List[dict]:
        return [c for c in self.components if c["touches_boundary"]]

    def header(self) -> dict:
        return {
            "bbox": [self.bbox_min.tolist(), self.bbox_max.tolist()],
            "resolution": list(self.resolution),
            "threshold": self.threshold,
            "mode": self.mode,
            "values": {"file": "grid.bin", "dtype": "<f8", "order": "C", "axes": ["x", "y", "z"]},
            "labels": {"file": "labels.bin", "dtype": "<i4", "order": "C", "background": -1},
        }

    def write(self, directory, with_labels: bool = True) -> None:
        """Header JSON + little-endian binary arrays (+ component summary)."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        (d / "grid.json").write_text(json.dumps(self.header(), indent=2) + "\n")
        self.values.astype("<f8").tofile(d / "grid.bin")
        if with_labels:
            self.labels.astype("<i4").tofile(d / "labels.bin")
            (d / "components.json").write_text(json.dumps(self.components, indent=2) + "\n")

    @classmethod
    def read(cls, directory) -> "ScalarFieldGrid":
        d = Path(directory)
        head = json.loads((d / "grid.json").read_text())
        res = tuple(head["resolution"])
        values = np.fromfile(d / "grid.bin", dtype="<f8").reshape(res)
        lab_path = d / "labels.bin"
        labels = np.fromfile(lab_path, dtype="<i4").reshape(res) if lab_path.exists() else np.full(res, -1, np.int32)
        comps = json.loads((d / "components.json").read_text()) if (d / "components.json").exists() else []
        return cls(np.array(head["bbox"][0]), np.array(head["bbox"][1]), res, values, labels,
                   head["threshold"], head["mode"], comps)


def _resolution(resolution) -> tuple:
    res = (int(resolution),) * 3 if np.isscalar(resolution) else tuple(int(r) for r in resolution)
    if len(res) != 3 or any(not MIN_RESOLUTION <= r <= MAX_RESOLUTION for r in res):
        raise ResolutionOutOfRange(f"resolution per axis must lie in [{MIN_RESOLUTION}, {MAX_RESOLUTION}]")
    return res


def sample_grid(source, bbox, resolution) -> ScalarFieldGrid:
    """Coulomb potential at the nodes of a regular grid spanning ``bbox``.

    Nodes that coincide with a point charge get ``+inf``.
    """
    res = _resolution(resolution)
    lo, hi = (np.asarray(b, dtype=float).reshape(3) for b in bbox)
    if np.any(hi <= lo):
        raise ValueError("bbox max must exceed bbox min on every axis")
    axes = [np.linspace(a, b, n) for a, b, n in zip(lo, hi, res)]
    X = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, 3)
    values = source._eval(X, "coulomb", False, allow_singular=True).reshape(res)
    return ScalarFieldGrid(lo, hi, res, values, np.full(res, -1, np.int32))


def _touches_boundary(mask: np.ndarray) -> bool:
    return bool(mask[0].any() or mask[-1].any() or mask[:, 0].any() or mask[:, -1].any()
                or mask[:, :, 0].any() or mask[:, :, -1].any())


def _label(masks_sides):
    """Label several disjoint masks into one raster-ordered id space."""
    shape = masks_sides[0][0].shape
    raw = np.full(shape, -1, np.int64)
    side_of = []
    offset = 0
    for mask, side in masks_sides:
        lab, k = ndimage.label(mask, structure=_SIX)
        sel = lab > 0
        raw[sel] = lab[sel] - 1 + offset
        side_of += [side] * k
        offset += k
    flat = raw.ravel()
    present = flat >= 0
    # renumber by first occurrence in raster order
    ids, first = np.unique(flat[present], return_index=True)
    order = ids[np.argsort(first)]
    remap = np.full(offset, -1, np.int64)
    remap[order] = np.arange(len(order))
    labels = np.full(flat.shape, -1, np.int32)
    labels[present] = remap[flat[present]]
    labels = labels.reshape(shape)
    counts = np.bincount(labels[labels >= 0].ravel(), minlength=len(order))
    comps = []
    for new_id, old_id in enumerate(order):
        mask = labels == new_id
        comps.append({
            "id": new_id,
            "voxel_count": int(counts[new_id]),
            "touches_boundary": _touches_boundary(mask),
            "side": side_of[old_id],
        })
    return labels, comps


def label_grid(grid: ScalarFieldGrid, threshold: float, mode: str = "above") -> ScalarFieldGrid:
    """Label threshold components of an already sampled grid (returns a new grid)."""
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    above = grid.values >= threshold
    if mode == "above":
        parts = [(above, "above")]
    elif mode == "below":
        parts = [(~above, "below")]
    else:
        parts = [(above, "above"), (~above, "below")]
    labels, comps = _label(parts)
    return ScalarFieldGrid(grid.bbox_min, grid.bbox_max, grid.resolution, grid.values,
                           labels, float(threshold), mode, comps)


def level_components(grid_source, bbox, resolution, threshold: float,
                     mode: str = "above") -> ScalarFieldGrid:
    """Connected components of ``{U >= threshold}`` (``above``),
    ``{U < threshold}`` (``below``) or both at once (``partition``).

    A component touching the bounding box is reported as unbounded
    (``touches_boundary``); the box should leave a generous margin around
    the sources for that to be meaningful.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    return label_grid(sample_grid(grid_source, bbox, resolution), threshold, mode)


def jagged_source(n: int, r: float, d: float, q: Optional[float] = None):
    """Two ring lattices of radius ``r`` centred at the origin and at
    ``(d, 0, 0)``, every point carrying ``q``.

    ``q`` defaults to ``r / sqrt(N)`` so that a uniform shell with the same
    total charge sits exactly at potential ``sqrt(N)``. Returns
    ``(source, N, threshold)`` with threshold ``sqrt(N)``.
    """
    lat = spherical_lattice(n, r)
    N = lat.N
    if q is None:
        q = r / math.sqrt(N)
    pts = np.vstack([lat.points, lat.points + np.array([d, 0.0, 0.0])])
    cfg = ChargeConfiguration(pts, np.full(len(pts), q))
    return PointSet(cfg), N, math.sqrt(N)


def jagged_bbox(r: float, d: float, margin: Optional[float] = None):
    """Box around both lattices with ``margin`` (default ``2r``) clearance."""
    m = 2.0 * r if margin is None else margin
    return (np.array([-r - m, -r - m, -r - m]), np.array([d + r + m, r + m, r + m]))


def jagged_sandwich_check(n: int, r: float, d: float, eps: float, q: Optional[float] = None,
                          resolution: int = 64) -> bool:
    """Whether the superlevel set around the first lattice is pinched between
    ``B(0, r - eps)`` and ``B(0, r + eps)`` on the voxel grid.

    The set tested is the union of the ``U >= sqrt(N)`` components that
    reach the closed ball ``B(0, r)``; an empty set counts as failure.

    Only a box around the first lattice is sampled, wide enough that a
    component leaking past ``r + eps`` is seen.
    """
    if not d > 2 * r:
        raise ValueError("need d > 2r")
    source, N, threshold = jagged_source(n, r, d, q)
    w = r + eps + max(eps, 0.1 * r)
    grid = level_components(source, (np.full(3, -w), np.full(3, w)), resolution, threshold, "above")
    X = np.stack(np.meshgrid(*grid.axes(), indexing="ij"), axis=-1)
    rho = np.linalg.norm(X, axis=-1)
    # E: every superlevel component reaching the closed ball B(0, r)
    ids = np.unique(grid.labels[(rho <= r) & (grid.labels >= 0)])
    if ids.size == 0:
        return False
    comp = np.isin(grid.labels, ids)
    if np.any((rho <= r - eps) & ~comp):
        return False
    return not np.any(comp & (rho > r + eps))
