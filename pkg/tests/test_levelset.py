import json
import math

import numpy as np
import pytest

from fekete_field.errors import ResolutionOutOfRange
from fekete_field.fieldscan import (PointSet, ScalarFieldGrid, jagged_bbox, jagged_sandwich_check,
                                    jagged_source, label_grid, level_components, point_source, sample_grid)
from fekete_field.fieldscan.levelset import _label

UNIT = point_source([[0, 0, 0]], [1.0])
BOX = (np.full(3, -2.0), np.full(3, 2.0))


def test_single_charge_superlevel_is_unit_ball():
    g = level_components(UNIT, BOX, 64, 1.0, "above")
    assert g.n_components == 1
    comp = g.components[0]
    assert not comp["touches_boundary"]
    h = 4.0 / 63
    assert comp["voxel_count"] * h ** 3 == pytest.approx(4 / 3 * math.pi, rel=0.05)


def test_infinite_threshold_and_below_mode():
    assert level_components(UNIT, BOX, 16, math.inf, "above").n_components == 0
    g = level_components(UNIT, BOX, 32, 1.0, "below")
    assert g.n_components == 1 and len(g.unbounded) == 1


def test_resolution_range():
    for res in (7, 513, (16, 16, 4)):
        with pytest.raises(ResolutionOutOfRange):
            level_components(UNIT, BOX, res, 1.0)
    with pytest.raises(ValueError):
        level_components(UNIT, BOX, 16, 1.0, "sideways")


def test_six_connectivity_and_raster_order():
    m = np.zeros((4, 4, 4), bool)
    m[0, 0, 0] = m[1, 1, 0] = True     # diagonal neighbours stay apart
    m[3, 3, 2] = m[3, 3, 3] = True     # face neighbours join
    labels, comps = _label([(m, "above")])
    assert len(comps) == 3
    assert labels[0, 0, 0] == 0 and labels[1, 1, 0] == 1 and labels[3, 3, 2] == labels[3, 3, 3] == 2
    assert [c["voxel_count"] for c in comps] == [1, 1, 2]


def test_ids_follow_scanline_order_in_partition():
    g = level_components(point_source([[-1, 0, 0], [1, 0, 0]], [1, 1]), BOX, 40, 2.5, "partition")
    flat = g.labels.ravel()
    firsts = [int(np.flatnonzero(flat == c["id"])[0]) for c in g.components]
    assert firsts == sorted(firsts)
    assert np.all(flat >= 0)
    assert {c["side"] for c in g.components} == {"above", "below"}


def test_labels_deterministic():
    src, _, th = jagged_source(4, 1.0, 5.0)
    a = level_components(src, jagged_bbox(1.0, 5.0), 32, th, "partition")
    b = level_components(src, jagged_bbox(1.0, 5.0), 32, th, "partition")
    np.testing.assert_array_equal(a.labels, b.labels)
    assert a.components == b.components


def test_label_grid_reuses_samples():
    grid = sample_grid(UNIT, BOX, 24)
    assert np.all(grid.labels == -1)
    direct = level_components(UNIT, BOX, 24, 0.7, "above")
    again = label_grid(grid, 0.7, "above")
    np.testing.assert_array_equal(direct.labels, again.labels)


def test_charge_on_node_is_infinite():
    src = point_source([[0, 0, 0]], [1.0])
    grid = sample_grid(src, (np.full(3, -1.0), np.full(3, 1.0)), 9)
    assert grid.values[4, 4, 4] == math.inf


def test_write_read_round_trip(tmp_path):
    g = level_components(UNIT, BOX, 12, 1.0, "partition")
    g.write(tmp_path)
    head = json.loads((tmp_path / "grid.json").read_text())
    assert head["values"]["dtype"] == "<f8" and head["labels"]["dtype"] == "<i4"
    assert (tmp_path / "grid.bin").stat().st_size == 12 ** 3 * 8
    assert (tmp_path / "labels.bin").stat().st_size == 12 ** 3 * 4
    back = ScalarFieldGrid.read(tmp_path)
    np.testing.assert_array_equal(back.values, g.values)
    np.testing.assert_array_equal(back.labels, g.labels)
    assert back.components == g.components and back.mode == "partition"
    summary = json.loads((tmp_path / "components.json").read_text())
    assert set(summary[0]) >= {"id", "voxel_count", "touches_boundary"}


def test_fixture_regime_three_components(jagged_regime):
    reg = jagged_regime["three_component_regime"]
    src, N, th = jagged_source(reg["n"], reg["r"], reg["d"], reg["q"])
    assert N == reg["N"]
    g = level_components(src, jagged_bbox(reg["r"], reg["d"]), 64, th, "partition")
    assert g.n_components == 3
    assert len(g.unbounded) == 1 and g.unbounded[0]["side"] == "below"
    bounded = [c for c in g.components if not c["touches_boundary"]]
    assert all(c["side"] == "above" for c in bounded)
    # E around the origin lattice, F around the shifted one
    ids = {int(g.labels[g.nearest_index(p)]) for p in ([reg["r"], 0, 0], [reg["d"] + reg["r"], 0, 0])}
    assert ids == {c["id"] for c in bounded}


def test_sandwich_small_n_fails():
    assert not jagged_sandwich_check(2, 1.0, 20.0, 0.01)


@pytest.mark.slow
def test_sandwich_large_n_passes():
    assert jagged_sandwich_check(32, 1.0, 20.0, 0.1)


@pytest.mark.parametrize("n", [2, 4])
def test_sandwich_trivial_for_eps_at_least_r(n):
    assert jagged_sandwich_check(n, 1.0, 20.0, 1.0)


def test_sandwich_requires_separation():
    with pytest.raises(ValueError):
        jagged_sandwich_check(4, 1.0, 2.0, 0.1)
