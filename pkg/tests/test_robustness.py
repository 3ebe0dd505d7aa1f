import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from passivegrasp.cone import init_cone, refine_sector
from passivegrasp.robustness import (RobustnessConfig, effective_normal_gap,
                                     effective_normal_gap_rows, tangential_motion_estimate)


def _random_cone(rng, q=9, steps=12):
    cone = init_cone(math.pi / 2, q)
    for _ in range(steps):
        open_ = [j for j in range(cone.num_sectors) if cone.depths[j] <= q]
        cone = refine_sector(cone, open_[rng.integers(len(open_))])
    return cone


def _weights(cone, j, theta):
    """Unit-edge weights reproducing the unit motion at angle ``theta`` in sector ``j``."""
    e1, e2 = cone.sector_edges(j)
    U = cone.directions[[e1, e2]].T
    alpha = np.zeros(cone.num_edges)
    alpha[[e1, e2]] = np.linalg.solve(U, [math.cos(theta), math.sin(theta)])
    return alpha


def test_estimate_exact_at_midpoints():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(200):
        cone = _random_cone(rng)
        for j in rng.integers(cone.num_sectors, size=50):
            mid = (cone.boundaries[j] + cone.sector_span(j) / 2) * cone.unit_angle
            est = tangential_motion_estimate(cone, _weights(cone, j, mid))
            worst = max(worst, abs(est - 1.0))
    assert worst <= 1e-12


@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 1), st.floats(0.01, 10))
def test_estimate_never_exceeds_true_motion(seed, frac, mag):
    rng = np.random.default_rng(seed)
    cone = _random_cone(rng, q=6, steps=int(rng.integers(0, 20)))
    j = int(rng.integers(cone.num_sectors))
    theta = (cone.boundaries[j] + frac * cone.sector_span(j)) * cone.unit_angle
    est = tangential_motion_estimate(cone, mag * _weights(cone, j, theta))
    assert est <= mag * (1 + 1e-12)
    # and never below cos(delta / 2) of it
    assert est >= mag * math.cos(cone.sector_angle(j) / 2) * (1 - 1e-12)


def test_zero_margin_is_nominal_gap():
    cone = init_cone(math.pi / 2, 3)
    a, b = effective_normal_gap_rows(None, cone, 0.0)
    assert a == 1.0 and not b.any()
    assert effective_normal_gap(-0.3, np.ones(4), cone, 0.0) == -0.3


def test_margin_unloads_sliding_contact():
    cone = init_cone(math.pi / 2, 3)
    eta = math.radians(2.5)
    alpha = np.array([1.0, 0, 0, 0])
    gap = effective_normal_gap(-0.01, alpha, cone, eta)
    kappa = math.cos(math.pi / 4)
    assert gap == pytest.approx(-0.01 * math.cos(eta) + math.sin(eta) * kappa)
    assert gap > -0.01


def test_margin_range():
    RobustnessConfig(0.0)
    for bad in (-0.1, math.pi / 2):
        with pytest.raises(ValueError):
            RobustnessConfig(bad)
