"""Reference grasps used by the demos and tests.

Every fixture is planar-looking hardware (revolute joints, point contacts)
described directly by contact frames and a hand Jacobian.  The JSON copies
in ``data/`` are produced by :func:`write_data_files` and load back to the
same models.
"""
from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

from .model import Contact, GraspModel, load_grasp, save_grasp

DATA_DIR = Path(__file__).with_name("data")


def revolute_jacobian(contacts: Sequence[Contact], joints) -> np.ndarray:
    """Contact-frame Jacobian of a hand made of revolute joints.

    ``joints`` is a sequence of ``(pivot, axis, contact_indices)``: a unit
    rate about ``axis`` through ``pivot`` moves each listed contact point
    with velocity ``axis x (p - pivot)``.
    """
    m = len(contacts)
    J = np.zeros((3 * m, len(joints)))
    for j, (pivot, axis, idx) in enumerate(joints):
        pivot = np.asarray(pivot, dtype=float)
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        for i in idx:
            v = np.cross(axis, contacts[i].position - pivot)
            J[3 * i:3 * i + 3, j] = contacts[i].frame.T @ v
    return J


HALF_WIDTH = 0.03
HOOK_Y = -0.04
ARM = 0.09


def _two_finger_contacts(mu: float, side_z=(0.0, 0.0)):
    a = HALF_WIDTH
    return [
        Contact([-a, HOOK_Y, 0.0], [0.0, 1.0, 0.0], mu),
        Contact([-a, 0.0, side_z[0]], [1.0, 0.0, 0.0], mu),
        Contact([a, HOOK_Y, 0.0], [0.0, 1.0, 0.0], mu),
        Contact([a, 0.0, side_z[1]], [-1.0, 0.0, 0.0], mu),
    ]


def _two_finger_joints():
    a = HALF_WIDTH
    return [
        ([-a, ARM, 0.0], [0, 0, 1], (0, 1)),      # left proximal
        ([-a - 0.02, HOOK_Y, 0.0], [0, 0, 1], (0,)),  # left distal
        ([a, ARM, 0.0], [0, 0, -1], (2, 3)),      # right proximal
        ([a + 0.02, HOOK_Y, 0.0], [0, 0, -1], (2,)),  # right distal
    ]


def two_finger(preload: float = 0.0, mu: float = 1.0) -> GraspModel:
    """Box held by two two-link fingers, each with a side pad and a hook.

    The hooks sit under the box (normals +y) on the distal links; the side
    pads sit 0.09 m straight below the proximal pivots, so a proximal
    torque ``tau`` squeezes with normal force ``tau / 0.09``.  Joint order:
    left proximal, left distal, right proximal, right distal.
    """
    contacts = _two_finger_contacts(mu)
    J = revolute_jacobian(contacts, _two_finger_joints())
    return GraspModel(contacts, J, [preload, 0.0, preload, 0.0], name="two_finger")


def offset_two_finger(preload: float = 0.0, mu: float = 1.0, offset: float = 0.005) -> GraspModel:
    """Two-finger grasp with the side pads shifted to ``z = +offset`` and ``-offset``.

    The pads no longer face each other along one line, so a pulled box can
    jam between them if friction is free to point anywhere.
    """
    contacts = _two_finger_contacts(mu, (offset, -offset))
    J = revolute_jacobian(contacts, _two_finger_joints())
    return GraspModel(contacts, J, [preload, 0.0, preload, 0.0], name="offset_two_finger")


def three_finger(preload3: float = 0.0, preload: float = 0.1, mu: float = 0.45) -> GraspModel:
    """Two opposed side fingers plus a third finger pushing up from below.

    Side pads at ``x = -/+0.03`` squeeze along x with normal force
    ``preload / 0.1``.  The third pad at ``z = -0.04`` pushes along +z, so
    loading it eats into the side friction that resists a +z force but
    adds friction that resists a moment about x.
    """
    a, c, L = 0.03, 0.04, 0.1
    contacts = [
        Contact([-a, 0.0, 0.0], [1.0, 0.0, 0.0], mu),
        Contact([a, 0.0, 0.0], [-1.0, 0.0, 0.0], mu),
        Contact([0.0, 0.0, -c], [0.0, 0.0, 1.0], mu),
    ]
    joints = [
        ([-a, 0.0, L], [0, -1, 0], (0,)),
        ([a, 0.0, L], [0, 1, 0], (1,)),
        ([L, 0.0, -c], [0, 1, 0], (2,)),
    ]
    J = revolute_jacobian(contacts, joints)
    return GraspModel(contacts, J, [preload, preload, preload3], name="three_finger")


SPHERE_RADIUS = 0.04


def sphere_four(preload: float = 0.1, mu: float = 0.5) -> GraspModel:
    """Ball held at four points that do not share a plane.

    Finger A touches at two points through two joints; fingers B and C
    have one joint and one contact each.  Joint order: A proximal, A
    distal, B, C.
    """
    dirs = np.array([[-1.0, -0.3, -0.4], [-1.0, 0.2, 0.5], [0.8, 0.6, 0.1], [0.7, -0.7, -0.2]])
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    contacts = [Contact(SPHERE_RADIUS * u, -u, mu) for u in dirs]
    joints = [
        ([-0.09, 0.0, -0.06], [0, 1, 0], (0, 1)),
        ([-0.05, 0.02, 0.06], [0, 1, 0], (1,)),
        ([0.05, 0.05, 0.08], [-1, 1, 0], (2,)),
        ([0.05, -0.05, -0.08], [1, 1, 0], (3,)),
    ]
    joints = [(p, _closing_axis(contacts, p, ax, idx), idx) for p, ax, idx in joints]
    J = revolute_jacobian(contacts, joints)
    return GraspModel(contacts, J, [preload] * 4, name="sphere_four")


def _closing_axis(contacts, pivot, axis, idx):
    """Flip ``axis`` so the joint pushes its last contact into the object."""
    axis = np.asarray(axis, dtype=float)
    ct = contacts[idx[-1]]
    if np.cross(axis, ct.position - np.asarray(pivot, dtype=float)) @ ct.normal < 0:
        axis = -axis
    return axis


def write_data_files(directory: Path | str = DATA_DIR) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for name, grasp in FIXTURES.items():
        path = directory / f"{name}.json"
        save_grasp(grasp(), path)
        out.append(path)
    return out


def load_fixture(name: str) -> GraspModel:
    return load_grasp(DATA_DIR / f"{name}.json")


FIXTURES = {
    "two_finger": lambda: two_finger(0.1),
    "offset_two_finger": lambda: offset_two_finger(0.0),
    "three_finger": lambda: three_finger(0.0),
    "sphere_four": lambda: sphere_four(0.1),
}


def random_planar_grasp(rng: np.random.Generator, num_contacts: int = 3) -> GraspModel:
    """Random grasp in the xy plane for cross-checking against the oracle.

    Contacts sit roughly on a 5 cm circle with normals tilted up to about
    23 degrees from the centre direction.  Each contact rides on its own
    one-joint finger (or, with probability 0.2, on a fixed palm), with the
    joint axis oriented so closing the finger pushes into the object.
    Commanded torques and the stored wrench are random as well.
    """
    contacts, joints = [], []
    phis = np.sort(rng.uniform(0, 2 * np.pi, num_contacts))
    for i, phi in enumerate(phis):
        radius = 0.05 * rng.uniform(0.7, 1.3)
        psi = phi + rng.uniform(-0.4, 0.4)
        pos = radius * np.array([np.cos(phi), np.sin(phi), 0.0])
        normal = -np.array([np.cos(psi), np.sin(psi), 0.0])
        contacts.append(Contact(pos, normal, float(rng.uniform(0.2, 1.0))))
        if rng.uniform() < 0.8:
            tp = np.cross([0.0, 0.0, 1.0], normal)
            lever = rng.uniform(0.04, 0.1) * (tp * rng.choice([-1, 1]) + normal * rng.uniform(-0.5, 0.5))
            pivot = pos - lever
            axis = np.array([0.0, 0.0, 1.0])
            if np.cross(axis, pos - pivot) @ normal < 0:
                axis = -axis
            joints.append((pivot, axis, (i,)))
    J = revolute_jacobian(contacts, joints) if joints else np.zeros((3 * num_contacts, 0))
    torques = rng.uniform(0.02, 0.3, len(joints))
    direction = rng.normal(size=3)
    direction /= np.linalg.norm(direction)
    w = np.zeros(6)
    w[[0, 1]] = direction[:2]
    w[5] = 0.05 * direction[2]
    w *= rng.uniform(0, 1.5)
    return GraspModel(contacts, J, torques, wrench=w, name="random_planar")
