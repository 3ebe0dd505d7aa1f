"""Grasp geometry and the linear maps between contact forces, object
wrenches and joint torques.

Conventions
-----------
* Contact forces ``c`` are forces applied *to the object*, stacked per
  contact in the contact frame order ``(t1, t2, n)``.
* The contact normal points into the object, i.e. along the push a
  positive normal force exerts on the object.
* ``d = G^T r - J q`` is the virtual motion of the object relative to the
  hand at each contact; ``d_n < 0`` means the virtual springs compress.
* Joint axes are oriented so that commanded torques are nonnegative and a
  positive joint motion drives the finger into the object.  With this
  orientation the torque a joint transmits is ``tau = J^T c``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from os import PathLike
from typing import Any, Sequence

import numpy as np

FEAS_TOL = 1e-7
UNIT_TOL = 1e-9


class GraspFileError(ValueError):
    """Raised when a grasp description cannot be turned into a model."""


def default_tangent(normal: np.ndarray) -> np.ndarray:
    """First tangent of the deterministic contact frame.

    Uses the global axis least aligned with the normal; ties go to the
    lowest axis index.
    """
    normal = np.asarray(normal, dtype=float)
    align = np.abs(normal)
    axis = int(np.flatnonzero(align <= align.min() + 1e-12)[0])
    e = np.zeros(3)
    e[axis] = 1.0
    t1 = np.cross(normal, e)
    return t1 / np.linalg.norm(t1)


@dataclass(frozen=True)
class Contact:
    """Point contact with friction.

    Parameters
    ----------
    position : array_like, shape (3,)
        Contact location in the object frame [m].
    normal : array_like, shape (3,)
        Unit normal pointing into the object.
    mu : float
        Coulomb friction coefficient.
    tangent1 : array_like, optional
        First tangent.  Defaults to :func:`default_tangent`.
    """

    position: np.ndarray
    normal: np.ndarray
    mu: float
    tangent1: np.ndarray | None = None
    tangent2: np.ndarray = field(init=False)

    def __post_init__(self):
        p = np.asarray(self.position, dtype=float).reshape(-1)
        n = np.asarray(self.normal, dtype=float).reshape(-1)
        if p.shape != (3,) or n.shape != (3,):
            raise GraspFileError("contact position and normal must have 3 components")
        if not np.all(np.isfinite(p)) or not np.all(np.isfinite(n)):
            raise GraspFileError("contact geometry must be finite")
        if abs(np.linalg.norm(n) - 1.0) > UNIT_TOL:
            raise GraspFileError(f"contact normal {n.tolist()} is not a unit vector")
        if not self.mu >= 0:
            raise GraspFileError(f"friction coefficient must be >= 0, got {self.mu}")
        if self.tangent1 is None:
            t1 = default_tangent(n)
        else:
            t1 = np.asarray(self.tangent1, dtype=float).reshape(-1)
            if t1.shape != (3,):
                raise GraspFileError("tangent1 must have 3 components")
            if abs(np.linalg.norm(t1) - 1.0) > UNIT_TOL or abs(t1 @ n) > UNIT_TOL:
                raise GraspFileError("tangent1 must be a unit vector orthogonal to the normal")
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "tangent1", t1)
        object.__setattr__(self, "tangent2", np.cross(n, t1))
        object.__setattr__(self, "mu", float(self.mu))

    @property
    def frame(self) -> np.ndarray:
        """3x3 matrix whose columns are ``(t1, t2, n)``."""
        return np.column_stack([self.tangent1, self.tangent2, self.normal])


@dataclass(frozen=True)
class Wrench:
    force: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.force, dtype=float).reshape(3)
        t = np.asarray(self.torque, dtype=float).reshape(3)
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(t))):
            raise ValueError("wrench entries must be finite")
        object.__setattr__(self, "force", f)
        object.__setattr__(self, "torque", t)

    @classmethod
    def from_vector(cls, w: Sequence[float]) -> "Wrench":
        w = np.asarray(w, dtype=float).reshape(6)
        return cls(w[:3], w[3:])

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])


def contact_wrench_basis(contact: Contact) -> np.ndarray:
    """Object wrenches produced by unit forces along ``(t1, t2, n)``.

    Returns a 6x3 matrix: force rows are the frame vectors and torque rows
    are ``position x frame vector`` (moments about the object origin).
    """
    frame = contact.frame
    moments = np.cross(contact.position, frame.T).T
    return np.vstack([frame, moments])


def assemble_grasp_map(contacts: Sequence[Contact]) -> np.ndarray:
    """Stack the per-contact wrench bases into the 6 x 3m grasp map."""
    if len(contacts) == 0:
        raise ValueError("a grasp needs at least one contact")
    return np.hstack([contact_wrench_basis(c) for c in contacts])


def _check_dims(G, J, **vectors):
    if G.shape[0] != 6:
        raise ValueError(f"grasp map must have 6 rows, got {G.shape}")
    if J.shape[0] != G.shape[1]:
        raise ValueError(f"jacobian rows {J.shape[0]} != 3m = {G.shape[1]}")
    sizes = {"r": 6, "w": 6, "c": G.shape[1], "q": J.shape[1], "tau": J.shape[1]}
    for name, v in vectors.items():
        if v.shape != (sizes[name],):
            raise ValueError(f"{name} has shape {v.shape}, expected ({sizes[name]},)")


def relative_contact_motion(r, q, G, J) -> np.ndarray:
    """Virtual motion of the object relative to the hand, ``G^T r - J q``."""
    r = np.asarray(r, dtype=float)
    q = np.asarray(q, dtype=float)
    G = np.asarray(G, dtype=float)
    J = np.asarray(J, dtype=float)
    _check_dims(G, J, r=r, q=q)
    return G.T @ r - J @ q


def residuals(c, w, tau, G, J) -> tuple[np.ndarray, np.ndarray]:
    """Object and joint equilibrium residuals ``(G c + w, J^T c - tau)``."""
    c = np.asarray(c, dtype=float)
    w = np.asarray(w, dtype=float)
    tau = np.asarray(tau, dtype=float)
    G = np.asarray(G, dtype=float)
    J = np.asarray(J, dtype=float)
    _check_dims(G, J, c=c, w=w, tau=tau)
    return G @ c + w, J.T @ c - tau


@dataclass(frozen=True)
class GraspModel:
    """Contacts, hand Jacobian and actuator commands of one grasp.

    The grasp map is assembled from the contacts; the Jacobian is an input
    (rows ``t1, t2, n`` per contact, one column per joint).
    """

    contacts: tuple[Contact, ...]
    jacobian: np.ndarray
    commanded_torques: np.ndarray
    wrench: np.ndarray | None = None
    name: str = ""
    grasp_map: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        contacts = tuple(self.contacts)
        G = assemble_grasp_map(contacts)
        J = np.asarray(self.jacobian, dtype=float)
        if J.ndim != 2 or J.shape[0] != 3 * len(contacts):
            raise GraspFileError(
                f"jacobian must be {3 * len(contacts)} x l, got shape {J.shape}")
        tau = np.asarray(self.commanded_torques, dtype=float).reshape(-1)
        if tau.shape != (J.shape[1],):
            raise GraspFileError(
                f"expected {J.shape[1]} commanded torques, got {tau.shape[0]}")
        if np.any(tau < 0):
            raise GraspFileError(
                "commanded torques must be nonnegative; orient the joint axes instead")
        w = None
        if self.wrench is not None:
            w = np.asarray(self.wrench, dtype=float).reshape(-1)
            if w.shape != (6,):
                raise GraspFileError("wrench must have 6 components")
        object.__setattr__(self, "contacts", contacts)
        object.__setattr__(self, "jacobian", J)
        object.__setattr__(self, "commanded_torques", tau)
        object.__setattr__(self, "wrench", w)
        object.__setattr__(self, "grasp_map", G)

    @property
    def num_contacts(self) -> int:
        return len(self.contacts)

    @property
    def num_joints(self) -> int:
        return self.jacobian.shape[1]

    @property
    def mu(self) -> np.ndarray:
        return np.array([c.mu for c in self.contacts])

    def with_torques(self, torques) -> "GraspModel":
        return GraspModel(self.contacts, self.jacobian, torques, self.wrench, self.name)

    def with_wrench(self, wrench) -> "GraspModel":
        return GraspModel(self.contacts, self.jacobian, self.commanded_torques,
                          wrench, self.name)

    def to_document(self) -> dict[str, Any]:
        doc = {
            "name": self.name,
            "contacts": [
                {"position": c.position.tolist(), "normal": c.normal.tolist(),
                 "tangent1": c.tangent1.tolist(), "mu": c.mu}
                for c in self.contacts
            ],
            "num_joints": self.num_joints,
            "jacobian": self.jacobian.tolist(),
            "commanded_torques": self.commanded_torques.tolist(),
        }
        if self.wrench is not None:
            doc["wrench"] = self.wrench.tolist()
        return doc


@dataclass
class EquilibriumSolution:
    """Witness of a (relaxed) equilibrium.

    Per-contact arrays ``beta``, ``alpha`` and ``z`` are indexed by the
    friction edges of that contact's cone at solve time.
    """

    contact_forces: np.ndarray
    object_motion: np.ndarray
    joint_motions: np.ndarray
    joint_torques: np.ndarray
    contact_motion: np.ndarray
    wrench: np.ndarray
    commanded_torques: np.ndarray
    beta: list[np.ndarray]
    alpha: list[np.ndarray]
    z: list[np.ndarray]
    scale: float | None = None

    def normal_forces(self) -> np.ndarray:
        return self.contact_forces[2::3]

    def tangential_forces(self) -> np.ndarray:
        return self.contact_forces.reshape(-1, 3)[:, :2]

    def tangential_motions(self) -> np.ndarray:
        return self.contact_motion.reshape(-1, 3)[:, :2]

    def check(self, grasp: GraspModel, feas_tol: float = FEAS_TOL) -> None:
        """Raise ``AssertionError`` if the equilibrium invariants fail."""
        obj, joint = residuals(self.contact_forces, self.wrench, self.joint_torques,
                               grasp.grasp_map, grasp.jacobian)
        scale = 1.0 + max(np.abs(self.contact_forces).max(initial=0.0),
                          np.abs(self.wrench).max(initial=0.0))
        if np.abs(obj).max() > feas_tol * scale:
            raise AssertionError(f"object equilibrium residual {np.abs(obj).max():.3g}")
        if joint.size and np.abs(joint).max() > feas_tol * scale:
            raise AssertionError(f"joint equilibrium residual {np.abs(joint).max():.3g}")
        if np.any(self.joint_motions < -feas_tol):
            raise AssertionError("negative joint motion")


def load_grasp(document: dict[str, Any] | str | PathLike) -> GraspModel:
    """Build a validated :class:`GraspModel` from a grasp description.

    ``document`` is either the parsed mapping or a path to a JSON file.
    See ``docs/grasp_schema.md`` for the fields.
    """
    if not isinstance(document, dict):
        with open(document) as fh:
            try:
                document = json.load(fh)
            except json.JSONDecodeError as exc:
                raise GraspFileError(f"not a valid grasp file: {exc}") from exc
    try:
        raw_contacts = document["contacts"]
        num_joints = int(document["num_joints"])
        jacobian = document["jacobian"]
        torques = document["commanded_torques"]
    except (KeyError, TypeError) as exc:
        raise GraspFileError(f"missing grasp field {exc}") from exc
    if not isinstance(raw_contacts, list) or not raw_contacts:
        raise GraspFileError("contacts must be a non-empty list")

    contacts = []
    for i, entry in enumerate(raw_contacts):
        try:
            contacts.append(Contact(entry["position"], entry["normal"], entry["mu"],
                                    entry.get("tangent1")))
        except KeyError as exc:
            raise GraspFileError(f"contact {i}: missing field {exc}") from exc
        except (GraspFileError, ValueError, TypeError) as exc:
            raise GraspFileError(f"contact {i}: {exc}") from exc

    try:
        J = np.asarray(jacobian, dtype=float)
    except ValueError as exc:
        raise GraspFileError(f"jacobian is not a rectangular matrix: {exc}") from exc
    if J.size == 0 and num_joints == 0:
        J = np.zeros((3 * len(contacts), 0))
    if J.shape != (3 * len(contacts), num_joints):
        raise GraspFileError(
            f"jacobian shape {J.shape} != ({3 * len(contacts)}, {num_joints})")
    return GraspModel(tuple(contacts), J, torques, document.get("wrench"),
                      document.get("name", ""))


def save_grasp(grasp: GraspModel, path: str | PathLike) -> None:
    with open(path, "w") as fh:
        json.dump(grasp.to_document(), fh, indent=2)
        fh.write("\n")
