"""Successive local refinement of the friction cones.

Each round solves the program at the current cone resolution.  An
infeasible round is final: every cone contains the finer ones, so the
exact model has no solution either.  Otherwise the sector holding the
friction force and the negated slip of each loaded contact is bisected,
and the loop stops once no such sector can be refined further.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bnb import SolveOutcome, solve_mip
from .cone import (FrictionConeState, active_sector, init_cone, refine_many,
                   sectors_to_refine, support_edges)
from .encoding import QueryConfig, encode, encode_minmax_torque, extract_solution
from .model import EquilibriumSolution, GraspModel

LOAD_TOL = 1e-9
SUPPORT_TOL = 1e-7


@dataclass
class RoundRecord:
    index: int
    status: str
    objective: float | None
    deltas: list[float | None]
    edges: int
    nodes: int
    seconds: float

    @property
    def max_delta(self) -> float | None:
        vals = [d for d in self.deltas if d is not None]
        return max(vals) if vals else None

    def trace_line(self) -> str:
        obj = "" if self.objective is None else f"{self.objective:.9g}"
        md = self.max_delta
        mds = "" if md is None else f"{math.degrees(md):.6g}"
        return f"{self.index},{obj},{mds},{self.nodes},{self.seconds * 1e3:.1f}"


@dataclass
class RefinementOutcome:
    """``status`` is ``feasible``, ``infeasible`` or ``inconclusive``."""

    status: str
    rounds: list[RoundRecord] = field(default_factory=list)
    solution: EquilibriumSolution | None = None
    cones: tuple[FrictionConeState, ...] = ()
    objective: float | None = None
    reason: str = ""

    @property
    def infeasible_round(self) -> int | None:
        return self.rounds[-1].index if self.status == "infeasible" else None

    @property
    def nodes(self) -> int:
        return sum(r.nodes for r in self.rounds)

    @property
    def seconds(self) -> float:
        return sum(r.seconds for r in self.rounds)

    def trace(self) -> str:
        return "\n".join(["round,objective,max_delta_deg,nodes,ms"]
                         + [r.trace_line() for r in self.rounds])


def round_bound(gamma: float, q_max: int, num_contacts: int) -> int:
    """Generous cap on the number of rounds, used as a termination guard."""
    return 4 * round(2 * math.pi / gamma) * (q_max + 1) * max(num_contacts, 1) + 1


def contact_support(solution: EquilibriumSolution, i: int, tol: float = LOAD_TOL) -> list[int]:
    """Friction edges used by contact ``i`` (union of force and slip supports)."""
    if solution.normal_forces()[i] <= tol * max(1.0, np.abs(solution.contact_forces).max()):
        return []
    # same test the branch and bound applies to SOS2 members
    w = np.maximum(solution.beta[i], solution.alpha[i])
    return support_edges(w, SUPPORT_TOL)


def solve_round(grasp: GraspModel, cones, config: QueryConfig, minmax: bool = False,
                node_limit: int = 200_000, time_limit: float | None = None,
                log=None) -> tuple[SolveOutcome, object]:
    program = encode(grasp, cones, config)
    if minmax:
        program = encode_minmax_torque(program, grasp.num_joints)
    return solve_mip(program, node_limit=node_limit, time_limit=time_limit, log=log), program


def analyze(grasp: GraspModel, config: QueryConfig, gamma: float = math.pi / 2, q_max: int = 9,
            minmax: bool = False, cones: Sequence[FrictionConeState] | None = None,
            node_limit: int = 200_000, time_limit: float | None = None,
            max_rounds: int | None = None, refine: bool = True,
            on_round: Callable[[RoundRecord], None] | None = None) -> RefinementOutcome:
    """Run the refinement loop for one query.

    Parameters
    ----------
    grasp, config
        Model and query.  ``minmax`` turns a torque-decision config into
        the min-max commanded torque problem.
    gamma, q_max
        Initial sector angle and maximum depth.
    cones
        Starting cones (default: uniform at ``gamma``).
    node_limit, time_limit
        Per-round node limit and overall wall-clock limit in seconds.
    refine
        ``False`` solves a single round at the starting cones.
    """
    t0 = time.perf_counter()
    m = grasp.num_contacts
    cones = tuple(cones) if cones is not None else tuple(init_cone(gamma, q_max) for _ in range(m))
    limit = max_rounds or round_bound(gamma, q_max, m)
    out = RefinementOutcome("inconclusive", cones=cones)
    for index in range(1, limit + 1):
        remaining = None if time_limit is None else time_limit - (time.perf_counter() - t0)
        if remaining is not None and remaining <= 0:
            out.reason = "time limit"
            return out
        r0 = time.perf_counter()
        res, program = solve_round(grasp, cones, config, minmax, node_limit, remaining)
        rec = RoundRecord(index, res.status, res.objective, [None] * m,
                          sum(c.num_edges for c in cones), res.nodes, time.perf_counter() - r0)
        out.rounds.append(rec)
        out.cones = cones
        if res.status == "infeasible":
            # earlier witnesses belonged to coarser, now refuted relaxations
            out.status, out.solution, out.objective = "infeasible", None, None
            if on_round:
                on_round(rec)
            return out
        if res.status != "optimal":
            out.reason = f"solver status {res.status}"
            if on_round:
                on_round(rec)
            return out
        sol = extract_solution(program, res.x, grasp)
        out.solution, out.objective = sol, res.objective
        new = list(cones)
        changed = False
        for i in range(m):
            support = contact_support(sol, i)
            if not support:
                continue
            found = active_sector(cones[i], np.isin(np.arange(cones[i].num_edges),
                                                    support).astype(float))
            rec.deltas[i] = found[1]
            if refine:
                todo = sectors_to_refine(cones[i], support)
                if todo:
                    new[i] = refine_many(cones[i], todo)
                    changed = True
        if on_round:
            on_round(rec)
        if not changed:
            out.status = "feasible"
            return out
        cones = tuple(new)
    out.reason = "round limit"
    return out
