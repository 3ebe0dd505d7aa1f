import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from passivegrasp.fixtures import FIXTURES, load_fixture, two_finger
from passivegrasp.model import (Contact, GraspFileError, GraspModel, Wrench,
                                assemble_grasp_map, default_tangent, load_grasp,
                                relative_contact_motion, residuals, save_grasp)

unit = st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(
    lambda v: np.linalg.norm(v) > 0.1).map(lambda v: np.array(v) / np.linalg.norm(v))


@given(unit)
def test_contact_frame_is_right_handed_orthonormal(n):
    ct = Contact([0.1, 0.2, 0.3], n, 0.5)
    F = ct.frame
    np.testing.assert_allclose(F.T @ F, np.eye(3), atol=1e-12)
    assert np.linalg.det(F) == pytest.approx(1.0)
    np.testing.assert_allclose(F[:, 2], n, atol=1e-12)
    assert abs(default_tangent(n) @ n) < 1e-12


@given(unit, st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_grasp_map_gives_force_and_moment(n, f):
    p = np.array([0.02, -0.01, 0.05])
    ct = Contact(p, n, 1.0)
    G = assemble_grasp_map([ct])
    c = np.asarray(f)
    world = ct.frame @ c
    np.testing.assert_allclose(G @ c, np.concatenate([world, np.cross(p, world)]), atol=1e-12)


@given(st.lists(st.floats(-1, 1), min_size=6, max_size=6),
       st.lists(st.floats(0, 1), min_size=4, max_size=4))
def test_virtual_work_duality(r, q):
    # c . d = (G c) . r - (J^T c) . q for any contact forces
    g = two_finger(0.1)
    r, q = np.asarray(r), np.asarray(q)
    c = np.linspace(-1, 1, 12)
    d = relative_contact_motion(r, q, g.grasp_map, g.jacobian)
    assert c @ d == pytest.approx((g.grasp_map @ c) @ r - (g.jacobian.T @ c) @ q, abs=1e-12)


def test_residual_signs():
    g = two_finger(0.1)
    c = np.zeros(12)
    c[2] = c[8] = 1.0  # both hooks push up
    obj, joint = residuals(c, np.array([0, -2.0, 0, 0, 0, 0]), g.jacobian.T @ c,
                           g.grasp_map, g.jacobian)
    np.testing.assert_allclose(obj, 0, atol=1e-12)
    np.testing.assert_allclose(joint, 0, atol=1e-12)


def test_side_pad_squeeze_matches_arm():
    # a unit proximal torque presses the side pad with 1 / 0.09 N
    g = two_finger()
    assert g.jacobian[5, 0] == pytest.approx(0.09)
    assert g.jacobian[11, 2] == pytest.approx(0.09)


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_fixture_files_match_constructors(name):
    a, b = FIXTURES[name](), load_fixture(name)
    np.testing.assert_allclose(a.jacobian, b.jacobian)
    np.testing.assert_allclose(a.grasp_map, b.grasp_map)
    np.testing.assert_allclose(a.commanded_torques, b.commanded_torques)


def test_save_load_round_trip(tmp_path):
    g = two_finger(0.1).with_wrench([0, 1, 0, 0, 0, 0])
    save_grasp(g, tmp_path / "g.json")
    h = load_grasp(tmp_path / "g.json")
    np.testing.assert_array_equal(g.jacobian, h.jacobian)
    np.testing.assert_array_equal(g.wrench, h.wrench)
    assert [c.mu for c in h.contacts] == [c.mu for c in g.contacts]


def _doc():
    return two_finger(0.1).to_document()


@pytest.mark.parametrize("edit, msg", [
    (lambda d: d["contacts"][0].update(normal=[0, 2, 0]), "unit"),
    (lambda d: d["contacts"][1].update(mu=-0.1), "mu"),
    (lambda d: d.update(commanded_torques=[-1, 0, 0, 0]), "nonnegative"),
    (lambda d: d.update(num_joints=3), "shape"),
    (lambda d: d["contacts"][0].pop("position"), "position"),
    (lambda d: d.pop("jacobian"), "jacobian"),
    (lambda d: d.update(wrench=[1, 2]), "6"),
])
def test_malformed_documents(edit, msg):
    d = _doc()
    edit(d)
    with pytest.raises(GraspFileError, match=msg):
        load_grasp(d)


def test_not_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{contacts:")
    with pytest.raises(GraspFileError):
        load_grasp(p)


def test_tangent1_must_be_orthogonal():
    with pytest.raises((GraspFileError, ValueError)):
        Contact([0, 0, 0], [0, 0, 1], 0.5, tangent1=[0, 1, 1])


def test_wrench_vector():
    w = Wrench.from_vector([1, 2, 3, 4, 5, 6])
    np.testing.assert_array_equal(w.as_vector(), np.arange(1, 7))


def test_witness_check_rejects_bad_equilibrium():
    from passivegrasp.queries import max_disturbance
    g = two_finger(0.1)
    res = max_disturbance(g, [0, 1, 0, 0, 0, 0], q_max=3)
    sol = res.witness
    sol.check(g)
    sol.contact_forces = sol.contact_forces * 1.5
    with pytest.raises(AssertionError):
        sol.check(g)
    json.dumps(g.to_document())
