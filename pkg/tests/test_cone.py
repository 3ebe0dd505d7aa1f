import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from passivegrasp.cone import (SectorAtMaxDepth, active_sector, edge_length, init_cone,
                               refine_many, refine_sector, sectors_to_refine, target_depth,
                               uniform_cone)

gammas = st.sampled_from([math.pi / 2, 2 * math.pi / 3, math.pi / 3, math.pi / 4])


def test_edge_length_values():
    assert edge_length(1, math.pi / 2, 0) == pytest.approx(math.sqrt(2), abs=1e-12)
    assert edge_length(1, math.pi / 2, 3) == pytest.approx(1.5682742, abs=1e-7)
    assert edge_length(5, math.pi / 2, 3) == 1.0


@given(gammas, st.integers(0, 12))
def test_edge_length_recurrence(gamma, q):
    for p in range(1, q + 2):
        ratio = edge_length(p, gamma, q) / edge_length(p + 1, gamma, q)
        assert ratio == pytest.approx(1 / math.cos(gamma / 2 ** p), abs=1e-12)


def test_edge_length_range():
    with pytest.raises(ValueError):
        edge_length(0, math.pi / 2, 3)
    with pytest.raises(ValueError):
        edge_length(6, math.pi / 2, 3)


@pytest.mark.parametrize("j", range(8))
def test_target_depth(j):
    assert target_depth(math.pi / 2 / 2 ** j, math.pi / 2) == j + 2
    with pytest.raises(ValueError):
        target_depth(0.3, math.pi / 2)


def test_init_cone():
    c = init_cone(math.pi / 2, 9)
    assert c.num_edges == 4
    np.testing.assert_allclose(np.degrees(c.angles), [0, 90, 180, 270])
    np.testing.assert_allclose(c.lengths, edge_length(1, math.pi / 2, 9))
    with pytest.raises(ValueError):
        init_cone(1.0, 3)
    with pytest.raises(ValueError):
        init_cone(math.pi, 3)


def test_dump_format():
    lines = init_cone(math.pi / 2, 0).dump().splitlines()
    assert lines[1] == f"90.000000 {math.sqrt(2):.9f} 1"


def _random_refinement(gamma, q, picks):
    cone = init_cone(gamma, q)
    history = [cone]
    for k in picks:
        open_ = [j for j in range(cone.num_sectors) if cone.depths[j] <= q]
        if not open_:
            break
        cone = refine_sector(cone, open_[k % len(open_)])
        history.append(cone)
    return history


def _sector_triangles(cone):
    tips = cone.directions * cone.lengths[:, None]
    out = []
    for j in range(cone.num_sectors):
        e1, e2 = cone.sector_edges(j)
        lo = cone.boundaries[j] * cone.unit_angle
        out.append((lo, lo + cone.sector_angle(j), tips[e1], tips[e2]))
    return out


def _in_parent(point, parent, tol=1e-12):
    ang = math.atan2(point[1], point[0]) % (2 * math.pi)
    for lo, hi, a, b in _sector_triangles(parent):
        if any(lo - 1e-12 <= t <= hi + 1e-12 for t in (ang, ang + 2 * math.pi)):
            edge, rel = b - a, point - a
            if edge[0] * rel[1] - edge[1] * rel[0] >= -tol:
                return True
    return False


@given(gammas, st.integers(1, 6), st.lists(st.integers(0, 1000), max_size=25))
def test_refinement_invariants(gamma, q, picks):
    history = _random_refinement(gamma, q, picks)
    for prev, cone in zip(history, history[1:]):
        # angular order and full coverage
        assert all(np.diff(cone.boundaries) > 0)
        assert sum(cone.sector_span(j) for j in range(cone.num_sectors)) == cone.units
        # the unit circle stays inside and each cone nests in its parent
        assert cone.containment_margin() >= -1e-12
        tips = cone.directions * cone.lengths[:, None]
        assert all(_in_parent(t, prev) for t in tips)
        # every sector's edges carry that sector's own depth
        for j in range(cone.num_sectors):
            e1, e2 = cone.sector_edges(j)
            assert cone.edge_depths[e1] == cone.edge_depths[e2] == cone.depths[j]


@given(gammas, st.integers(0, 5))
def test_uniform_cone_lengths(gamma, q):
    for depth in range(1, q + 2):
        c = uniform_cone(gamma, q, depth)
        assert c.num_edges == round(2 * math.pi / gamma) * 2 ** (depth - 1)
        np.testing.assert_allclose(c.lengths, edge_length(depth, gamma, q))
    assert uniform_cone(gamma, q, q + 1).containment_margin() == pytest.approx(0, abs=1e-12)


def test_split_edges_carry_both_lengths():
    c = refine_sector(init_cone(math.pi / 2, 4), 0)
    assert c.depths == (2, 2, 1, 1, 1)
    np.testing.assert_allclose(np.degrees(c.angles), [0, 0, 45, 90, 90, 180, 270])
    assert c.edge_depths.tolist() == [1, 2, 2, 2, 1, 1, 1]
    assert c.lengths[0] == edge_length(1, math.pi / 2, 4)
    assert c.lengths[1] == edge_length(2, math.pi / 2, 4)
    assert [c.sector_edges(j) for j in range(5)] == [(1, 2), (2, 3), (4, 5), (5, 6), (6, 0)]
    assert c.owners(0) == [4] and c.owners(2) == [0, 1]


def test_refine_past_max_depth():
    c = init_cone(math.pi / 2, 0)
    with pytest.raises(SectorAtMaxDepth):
        refine_sector(c, 0)


def test_active_sector_rules():
    c = refine_sector(init_cone(math.pi / 2, 4), 0)
    w = np.zeros(c.num_edges)

    def pick(*idx):
        v = w.copy()
        v[list(idx)] = 1.0
        return active_sector(c, v)[0]

    assert pick(1, 2) == 0
    assert pick(2, 3) == 1
    assert pick(6, 0) == 4
    # one direction: the coarsest owner
    assert pick(0) == 4
    assert pick(0, 1) == 4
    assert pick(2) == 0
    assert active_sector(c, w) is None
    with pytest.raises(ValueError):
        pick(1, 3)
    with pytest.raises(ValueError):
        pick(1, 2, 3)


def test_sectors_to_refine():
    c = init_cone(math.pi / 2, 1)
    assert sectors_to_refine(c, [0, 1]) == [0]
    assert sectors_to_refine(c, [2]) == [1, 2]
    assert sectors_to_refine(c, []) == []
    c = refine_sector(c, 0)
    # split edge at 0 degrees: long copy 0 closes sector 4, short copy 1 opens sector 0
    assert sectors_to_refine(c, [0, 1]) == [4]
    assert sectors_to_refine(c, [1, 2]) == []
    c = refine_many(init_cone(math.pi / 2, 1), [0, 1, 2, 3])
    assert sectors_to_refine(c, [0, 1]) == []
