import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from passivegrasp.cone import init_cone
from passivegrasp.encoding import QueryConfig, normalize_direction
from passivegrasp.fixtures import random_planar_grasp, two_finger
from passivegrasp.refinement import analyze, round_bound

Y = np.array([0, 1.0, 0, 0, 0, 0])


def test_round_bound():
    assert round_bound(math.pi / 2, 9, 4) == 4 * 4 * 10 * 4 + 1


def test_objective_sequence_and_trace():
    g = two_finger(0.1)
    out = analyze(g, QueryConfig(direction=Y, torques=g.commanded_torques), q_max=6)
    assert out.status == "feasible"
    objs = [r.objective for r in out.rounds]
    assert all(b <= a + 1e-9 for a, b in zip(objs, objs[1:]))
    assert out.objective == objs[-1]
    edges = [r.edges for r in out.rounds]
    assert edges == sorted(edges) and edges[0] == 16
    lines = out.trace().splitlines()
    assert lines[0] == "round,objective,max_delta_deg,nodes,ms"
    assert len(lines) == len(out.rounds) + 1
    idx, obj, delta, nodes, ms = lines[-1].split(",")
    assert int(idx) == len(out.rounds) and float(obj) == pytest.approx(objs[-1])
    # converged: the final active sectors are at full depth
    assert float(delta) == pytest.approx(90 / 2 ** 6, rel=1e-5)


def test_infeasible_round_is_final_and_has_no_witness():
    g = two_finger(0.0)
    seen = []
    out = analyze(g, QueryConfig(wrench=Y, torques=g.commanded_torques), on_round=seen.append)
    assert out.status == "infeasible" and out.infeasible_round == 1
    assert out.solution is None and len(seen) == 1


def test_limits_make_runs_inconclusive():
    g = two_finger(0.1)
    cfg = QueryConfig(wrench=2.2 * Y, torques=g.commanded_torques)
    out = analyze(g, cfg, time_limit=0.0)
    assert out.status == "inconclusive" and out.reason == "time limit"
    out = analyze(g, cfg, node_limit=1)
    assert out.status == "inconclusive" and "cap-reached" in out.reason
    out = analyze(g, cfg, max_rounds=1)
    assert out.status == "inconclusive" and out.reason == "round limit"


def test_single_round_mode():
    g = two_finger(0.1)
    out = analyze(g, QueryConfig(wrench=2.2 * Y, torques=g.commanded_torques), refine=False)
    assert out.status == "feasible" and len(out.rounds) == 1
    assert all(c == init_cone(math.pi / 2, 9) for c in out.cones)


@settings(max_examples=12)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0, 2 * math.pi))
def test_random_grasp_objectives_never_increase(seed, theta):
    g = random_planar_grasp(np.random.default_rng(seed), 3)
    u = normalize_direction([math.cos(theta), math.sin(theta), 0, 0, 0, 0])
    out = analyze(g, QueryConfig(direction=u, torques=g.commanded_torques), q_max=4)
    assert out.status in ("feasible", "infeasible")
    objs = [r.objective for r in out.rounds if r.objective is not None]
    assert all(b <= a + 1e-7 * (1 + abs(a)) for a, b in zip(objs, objs[1:]))
