import numpy as np
import pytest

from passivegrasp.fixtures import two_finger
from passivegrasp.queries import (ablation_no_mdp, check_stability, force_map, force_map_csv,
                                  max_disturbance, optimal_torques, plane_basis)

Y = np.array([0, 1.0, 0, 0, 0, 0])


def test_check_summaries():
    res = check_stability(two_finger(0.0), wrench=Y)
    assert res.status == "unstable"
    assert res.summary().startswith("UNSTABLE (proven at round 1)\nrounds 1,")
    res = check_stability(two_finger(0.1), wrench=1.5 * Y, q_max=5)
    assert res.status == "stable" and res.witness is not None
    assert res.summary().startswith("STABLE\n")


def test_max_disturbance_statuses():
    res = max_disturbance(two_finger(0.1), Y, q_max=6)
    assert res.status == "answered"
    assert res.value == pytest.approx(0.2 / 0.09, rel=2e-3)
    assert res.summary().startswith("s* = 2.22")
    res = max_disturbance(two_finger(0.0), -Y)
    assert res.status == "exceeds-cap" and res.value == 100 and res.rounds == 1
    res = max_disturbance(two_finger(0.0), Y, s_cap=5)
    assert res.status == "answered" and res.value == pytest.approx(0, abs=1e-9)


def test_optimal_torques_resist_the_wrench():
    g = two_finger(0.0)
    res = optimal_torques(g, 2 * Y, q_max=6)
    assert res.status == "answered"
    tc = res.value
    assert max(tc) == pytest.approx(2 * 0.09 / 2, rel=2e-3)
    assert check_stability(g, tc * (1 + 1e-6), 2 * Y, q_max=6).status == "stable"
    res = optimal_torques(g, 2 * Y, q_max=4, torque_limits=np.zeros(4))
    assert res.status == "infeasible"


def test_ablation_is_single_round():
    res = ablation_no_mdp(two_finger(0.1), wrench=1.5 * Y)
    assert res.status == "stable" and res.rounds == 1


def test_force_map_rows_and_jobs():
    g = two_finger(0.1)
    u, v = plane_basis("xy")
    a = force_map(g, u, v, resolution_deg=90, q_max=3)
    b = force_map(g, u, v, resolution_deg=90, q_max=3, jobs=2)
    assert a.entries == b.entries
    csv = force_map_csv(a).splitlines()
    assert csv[0] == "theta_deg,s_star,status" and len(csv) == 5
    assert csv[1] == "0,100,exceeds-cap"
    assert csv[2].startswith("90,2.2")


def test_force_map_validation():
    g = two_finger(0.1)
    u, v = plane_basis("yz")
    with pytest.raises(ValueError):
        force_map(g, u, u, resolution_deg=90)
    with pytest.raises(ValueError):
        force_map(g, u, v, resolution_deg=7)
    for bad in ("xx", "xw", "xyz"):
        with pytest.raises(ValueError):
            plane_basis(bad)
