"""Stability queries built on the refinement loop."""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .encoding import QueryConfig, normalize_direction
from .model import EquilibriumSolution, GraspModel
from .refinement import RefinementOutcome, analyze

CAP_RTOL = 1e-9


@dataclass
class QueryResult:
    """Outcome of one query.

    ``status`` is one of ``stable``, ``unstable``, ``inconclusive`` for
    stability checks; ``answered``, ``exceeds-cap``, ``unstable`` or
    ``inconclusive`` for disturbance scales; ``answered``, ``infeasible`` or
    ``inconclusive`` for torques.  ``value`` holds ``s*`` or the torque
    vector.  ``outcome`` keeps the per-round provenance.
    """

    kind: str
    status: str
    value: Any = None
    outcome: RefinementOutcome | None = None
    entries: list = field(default_factory=list)

    @property
    def witness(self) -> EquilibriumSolution | None:
        return None if self.outcome is None else self.outcome.solution

    @property
    def rounds(self) -> int:
        return 0 if self.outcome is None else len(self.outcome.rounds)

    def summary(self) -> str:
        o = self.outcome
        if self.kind == "stability":
            head = self.status.upper()
            if self.status == "unstable" and o is not None:
                head += f" (proven at round {o.infeasible_round})"
        elif self.kind == "max_disturbance":
            if self.status == "answered":
                head = f"s* = {self.value:.6g}"
            elif self.status == "exceeds-cap":
                head = f"s* exceeds cap ({self.value:g})"
            else:
                head = self.status.upper()
        elif self.kind == "optimal_torques":
            if self.status == "answered":
                head = "tau_c* = " + " ".join(f"{t:.6g}" for t in self.value)
            else:
                head = self.status.upper()
        else:
            head = self.status
        if o is None or not o.rounds:
            return head
        last = o.rounds[-1]
        md = last.max_delta
        tail = (f"rounds {len(o.rounds)}, final max delta "
                f"{'-' if md is None else f'{math.degrees(md):.4g} deg'}, "
                f"nodes {o.nodes}, edges {last.edges}")
        return f"{head}\n{tail}"


def _torques(grasp, torques):
    return grasp.commanded_torques if torques is None else np.asarray(torques, dtype=float)


def _wrench(grasp, wrench):
    return grasp.wrench if wrench is None else np.asarray(wrench, dtype=float)


def check_stability(grasp: GraspModel, torques=None, wrench=None, eta: float = 0.0,
                    mdp: bool = True, gamma: float = math.pi / 2, q_max: int = 9,
                    **solver) -> QueryResult:
    """Stable iff the refined relaxation stays feasible.

    Without the dissipation constraints friction is free to point
    anywhere, so the relaxation does not depend on the cone resolution
    beyond its outer polygon and a single round at the initial cones is
    solved.
    """
    config = QueryConfig(wrench=_wrench(grasp, wrench), torques=_torques(grasp, torques),
                         eta=eta, mdp=mdp)
    out = analyze(grasp, config, gamma, q_max, refine=mdp, **solver)
    status = {"feasible": "stable", "infeasible": "unstable"}.get(out.status, "inconclusive")
    return QueryResult("stability", status, status, out)


def ablation_no_mdp(grasp: GraspModel, torques=None, wrench=None,
                    gamma: float = math.pi / 2, q_max: int = 9, **solver) -> QueryResult:
    return check_stability(grasp, torques, wrench, 0.0, False, gamma, q_max, **solver)


def max_disturbance(grasp: GraspModel, direction, torques=None, eta: float = 0.0,
                    s_cap: float = 100.0, gamma: float = math.pi / 2, q_max: int = 9,
                    char_length: float = 1.0, **solver) -> QueryResult:
    """Largest ``s <= s_cap`` with ``w = s * u`` resisted, ``u`` the unit direction.

    Returns the final-round optimum.  ``exceeds-cap`` means the cap itself
    is resisted; nothing is claimed beyond it.
    """
    u = normalize_direction(direction, char_length)
    config = QueryConfig(direction=u, torques=_torques(grasp, torques), eta=eta, s_cap=s_cap)
    out = analyze(grasp, config, gamma, q_max, **solver)
    if out.status == "infeasible":
        return QueryResult("max_disturbance", "unstable", None, out)
    if out.status != "feasible":
        return QueryResult("max_disturbance", "inconclusive", out.objective, out)
    s = float(out.objective)
    if s >= s_cap * (1 - CAP_RTOL):
        return QueryResult("max_disturbance", "exceeds-cap", s_cap, out)
    return QueryResult("max_disturbance", "answered", max(s, 0.0), out)


def optimal_torques(grasp: GraspModel, wrench=None, eta: float = 0.0,
                    gamma: float = math.pi / 2, q_max: int = 9, torque_limits=None,
                    **solver) -> QueryResult:
    """Commanded torques minimizing the largest one while resisting ``wrench``."""
    config = QueryConfig(wrench=_wrench(grasp, wrench), torques=None, eta=eta,
                         torque_limits=torque_limits)
    out = analyze(grasp, config, gamma, q_max, minmax=True, **solver)
    if out.status == "infeasible":
        return QueryResult("optimal_torques", "infeasible", None, out)
    if out.status != "feasible":
        return QueryResult("optimal_torques", "inconclusive", None, out)
    tc = np.maximum(out.solution.commanded_torques, 0.0)
    return QueryResult("optimal_torques", "answered", tc, out)


def plane_basis(name: str) -> tuple[np.ndarray, np.ndarray]:
    """Wrench-space basis for a named force plane (``xy``, ``yz``, ``xz``)."""
    axes = {"x": 0, "y": 1, "z": 2}
    if len(name) != 2 or any(a not in axes for a in name) or name[0] == name[1]:
        raise ValueError(f"unknown plane {name!r}")
    u, v = np.zeros(6), np.zeros(6)
    u[axes[name[0]]] = 1.0
    v[axes[name[1]]] = 1.0
    return u, v


def _map_entry(args):
    grasp, theta, u, v, kw = args
    direction = math.cos(theta) * u + math.sin(theta) * v
    res = max_disturbance(grasp, direction, **kw)
    return math.degrees(theta), res.value, res.status


def force_map(grasp: GraspModel, u, v, resolution_deg: float = 1.0, torques=None,
              eta: float = 0.0, s_cap: float = 100.0, gamma: float = math.pi / 2,
              q_max: int = 9, jobs: int = 1, **solver) -> QueryResult:
    """``max_disturbance`` along ``cos(theta) u + sin(theta) v`` for theta on a grid.

    Entries are ``(theta_deg, s_star, status)`` in increasing theta; the
    result does not depend on ``jobs``.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if abs(np.linalg.norm(u) - 1) > 1e-9 or abs(np.linalg.norm(v) - 1) > 1e-9 or abs(u @ v) > 1e-9:
        raise ValueError("plane basis must be orthonormal")
    if not resolution_deg > 0:
        raise ValueError("resolution must be positive")
    n = int(round(360.0 / resolution_deg))
    if abs(n * resolution_deg - 360.0) > 1e-9:
        raise ValueError("resolution must divide 360 degrees")
    kw = dict(torques=_torques(grasp, torques), eta=eta, s_cap=s_cap, gamma=gamma,
              q_max=q_max, **solver)
    tasks = [(grasp, math.radians(i * resolution_deg), u, v, kw) for i in range(n)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            entries = list(pool.map(_map_entry, tasks))
    else:
        entries = [_map_entry(t) for t in tasks]
    entries = [(i * resolution_deg, s, st) for i, (_, s, st) in enumerate(entries)]
    bad = sum(st == "inconclusive" for _, _, st in entries)
    return QueryResult("force_map", "inconclusive" if bad else "answered", None, None, entries)


def force_map_csv(result: QueryResult) -> str:
    lines = ["theta_deg,s_star,status"]
    for theta, s, st in result.entries:
        lines.append(f"{theta:g},{'' if s is None else f'{s:.9g}'},{st}")
    return "\n".join(lines) + "\n"
