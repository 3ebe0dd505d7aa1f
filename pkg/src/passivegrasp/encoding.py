"""Encoding of the quasi-static grasp model as a disjunctive program.

Variable blocks (names used in ``MixedIntegerProgram.blocks``)::

    c        3m   contact forces (t1, t2, n per contact), c_n >= 0
    d        3m   relative contact motion
    r        6    virtual object twist
    q        l    virtual joint motion, >= 0
    tau      l    joint torques
    beta/i   k_i  friction weights of contact i, >= 0
    alpha/i  k_i  motion weights of contact i, >= 0 (with MDP only)
    s        1    disturbance scale in [0, s_cap] (scaled wrench only)
    tau_c    l    commanded torques, >= 0 (torque decision only)

Complementarity and the joint model are disjunctions; friction edges are
coupled by one cyclic SOS2 group per contact whose members are the pairs
``(beta_s, alpha_s)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .bnb import MixedIntegerProgram, ProgramBuilder
from .cone import FrictionConeState
from .model import FEAS_TOL, EquilibriumSolution, GraspModel
from .robustness import effective_normal_gap_rows

MOTION_TOL = 1e-8
# Contact stiffness k in c_n = -k d_n.  Any k > 0 gives the same forces
# (motions simply scale by 1/k); 1000 N per virtual unit keeps motions
# near unit size for forces of a few newtons.
STIFFNESS = 1000.0
# Box on the virtual twist and joint motions.  Motions scale like
# force / k, so this only removes far-out points of unbounded directions
# (e.g. a ball spinning in place) that wreck LP accuracy.
MOTION_BOUND = 1e4


class WitnessError(RuntimeError):
    """A solver assignment failed the model's own consistency checks."""


def normalize_direction(direction, char_length: float = 1.0) -> np.ndarray:
    """Scale a wrench direction to unit norm, torques divided by ``char_length``."""
    u = np.asarray(direction, dtype=float).reshape(-1)
    if u.shape != (6,):
        raise ValueError("direction must have 6 components")
    if not np.all(np.isfinite(u)):
        raise ValueError("direction must be finite")
    nrm = np.linalg.norm(np.concatenate([u[:3], u[3:] / char_length]))
    if nrm == 0:
        raise ValueError("direction must be nonzero")
    return u / nrm


@dataclass(frozen=True)
class QueryConfig:
    """What the program asks.

    ``direction`` set: ``w = s * direction`` and ``s`` is maximized up to
    ``s_cap``.  Otherwise ``wrench`` is fixed (default: the grasp's own).
    ``torques=None`` makes the commanded torques decision variables.
    ``stiffness`` and ``motion_bound`` fix the units of the virtual
    motions; see the module constants.
    """

    wrench: np.ndarray | None = None
    direction: np.ndarray | None = None
    torques: np.ndarray | None = None
    eta: float = 0.0
    mdp: bool = True
    s_cap: float = 100.0
    torque_limits: np.ndarray | None = None
    stiffness: float = STIFFNESS
    motion_bound: float = MOTION_BOUND

    def __post_init__(self):
        if not 0.0 <= self.eta < np.pi / 2:
            raise ValueError("eta must lie in [0, pi/2)")
        if not self.s_cap > 0:
            raise ValueError("s_cap must be positive")
        if not (self.stiffness > 0 and self.motion_bound > 0):
            raise ValueError("stiffness and motion_bound must be positive")
        if self.wrench is not None and self.direction is not None:
            raise ValueError("give either a fixed wrench or a direction, not both")

    @property
    def scaled(self) -> bool:
        return self.direction is not None

    @property
    def torque_decision(self) -> bool:
        return self.torques is None


def _contact_rows(i):
    return 3 * i, 3 * i + 1, 3 * i + 2


def encode(grasp: GraspModel, cones: Sequence[FrictionConeState],
           config: QueryConfig) -> MixedIntegerProgram:
    """Build the disjunctive program for ``grasp`` at the given cone resolution."""
    m, l = grasp.num_contacts, grasp.num_joints
    if len(cones) != m:
        raise ValueError(f"{len(cones)} cones for {m} contacts")
    G, J = grasp.grasp_map, grasp.jacobian
    b = ProgramBuilder()
    lab = [f"{i}.{a}" for i in range(m) for a in ("t1", "t2", "n")]
    c = b.add_block("c", 3 * m, labels=lab)
    for i in range(m):
        b.lb[c[3 * i + 2]] = 0.0
    d = b.add_block("d", 3 * m, labels=lab)
    B = config.motion_bound
    r = b.add_block("r", 6, -B, B, labels=["vx", "vy", "vz", "wx", "wy", "wz"])
    q = b.add_block("q", l, 0.0, B)
    tau = b.add_block("tau", l)

    # object equilibrium G c + w = 0
    s = None
    if config.scaled:
        u = np.asarray(config.direction, dtype=float)
        s = b.add_var("s", 0.0, config.s_cap)
        b.blocks["s"] = np.array([s])
        for k in range(6):
            row = {c[j]: G[k, j] for j in range(3 * m)}
            row[s] = u[k]
            b.add_row(row, 0.0, 0.0, name=f"wrench[{k}]")
    else:
        w = grasp.wrench if config.wrench is None else np.asarray(config.wrench, dtype=float)
        if w.shape != (6,):
            raise ValueError("wrench must have 6 components")
        for k in range(6):
            b.add_row({c[j]: G[k, j] for j in range(3 * m)}, -w[k], -w[k], name=f"wrench[{k}]")

    # joint equilibrium: tau = J^T c
    for j in range(l):
        row = {c[k]: -J[k, j] for k in range(3 * m)}
        row[tau[j]] = 1.0
        b.add_row(row, 0.0, 0.0, name=f"joint[{j}]")

    # virtual motion d = G^T r - J q
    for k in range(3 * m):
        row = {d[k]: 1.0}
        for a in range(6):
            row[r[a]] = row.get(r[a], 0.0) - G[a, k]
        for j in range(l):
            row[q[j]] = J[k, j]
        b.add_row(row, 0.0, 0.0, name=f"motion[{k}]")

    # commanded torques
    if config.torque_decision:
        tc = b.add_block("tau_c", l, lb=0.0)
        lim = config.torque_limits
        if lim is not None:
            for j in range(l):
                b.ub[tc[j]] = float(lim[j])
        tc_term = lambda j: ({tau[j]: 1.0, tc[j]: -1.0}, 0.0)
    else:
        tcv = np.asarray(config.torques, dtype=float)
        if tcv.shape != (l,):
            raise ValueError(f"expected {l} commanded torques")
        if np.any(tcv < 0):
            raise ValueError("commanded torques must be nonnegative")
        tc_term = lambda j: ({tau[j]: 1.0}, float(tcv[j]))

    for i in range(m):
        cone = cones[i]
        mu = grasp.contacts[i].mu
        k = cone.num_edges
        it1, it2, inn = _contact_rows(i)
        beta = b.add_block(f"beta/{i}", k, lb=0.0)
        dirs = cone.directions
        L = cone.lengths
        for ax, ci in ((0, it1), (1, it2)):
            row = {c[ci]: 1.0}
            for e in range(k):
                row[beta[e]] = -L[e] * dirs[e, ax]
            b.add_row(row, 0.0, 0.0, name=f"friction/{i}[{ax}]")
        stick_row = {beta[e]: 1.0 for e in range(k)}
        stick_row[c[inn]] = -mu
        b.add_row(stick_row, hi=0.0, name=f"cone/{i}")

        if config.mdp:
            alpha = b.add_block(f"alpha/{i}", k, lb=0.0)
            for ax, di in ((0, it1), (1, it2)):
                row = {d[di]: 1.0}
                for e in range(k):
                    row[alpha[e]] = dirs[e, ax]
                b.add_row(row, 0.0, 0.0, name=f"slip/{i}[{ax}]")
            a_dn, a_alpha = effective_normal_gap_rows(grasp.contacts[i], cone, config.eta)
            dhat = {d[inn]: a_dn}
            for e in range(k):
                if a_alpha[e]:
                    dhat[alpha[e]] = a_alpha[e]
            b.add_sos2(f"sos/{i}", [(beta[e], alpha[e]) for e in range(k)])
        else:
            alpha = None
            dhat = {d[inn]: float(np.cos(config.eta))}
            b.add_sos2(f"sos/{i}", [(beta[e],) for e in range(k)])

        # c_n >= -k d_hat_n in every mode
        touch = {v: config.stiffness * a for v, a in dhat.items()}
        touch[c[inn]] = touch.get(c[inn], 0.0) + 1.0
        b.add_row(dict(touch), lo=0.0, name=f"gap/{i}")
        b.add_disjunction(f"normal/{i}",
                          [dict(coeffs=dhat, hi=0.0), dict(coeffs=touch, lo=0.0, hi=0.0)],
                          [dict(coeffs=dhat, lo=0.0), dict(coeffs={c[inn]: 1.0}, hi=0.0)])
        if config.mdp:
            slide = {beta[e]: L[e] for e in range(k)}
            slide[c[inn]] = -mu
            b.add_disjunction(f"friction/{i}",
                              [dict(coeffs={alpha[e]: 1.0 for e in range(k)}, hi=0.0)],
                              [dict(coeffs=slide, lo=0.0)])

    for j in range(l):
        coeffs, rhs = tc_term(j)
        b.add_row(coeffs, lo=rhs, name=f"torque/{j}")
        b.add_disjunction(f"joint/{j}",
                          [dict(coeffs={q[j]: 1.0}, hi=0.0)],
                          [dict(coeffs=coeffs, hi=rhs)])

    obj, sense = None, "min"
    if s is not None:
        obj, sense = {s: 1.0}, "max"
    meta = dict(cones=tuple(cones), config=config, num_contacts=m, num_joints=l)
    return b.build(c=obj, sense=sense, meta=meta)


def encode_minmax_torque(program: MixedIntegerProgram, l: int) -> MixedIntegerProgram:
    """Add ``t >= tau_c[j]`` for every joint and minimize ``t``."""
    if "tau_c" not in program.blocks:
        raise ValueError("program has fixed commanded torques")
    tc = program.blocks["tau_c"]
    if len(tc) != l:
        raise ValueError(f"program has {len(tc)} joints, not {l}")
    n = program.num_vars
    t = n
    A = sp.hstack([program.A, sp.csr_matrix((program.num_rows, 1))]).tocsr()
    extra = sp.lil_matrix((l, n + 1))
    for j in range(l):
        extra[j, t] = 1.0
        extra[j, tc[j]] = -1.0
    A = sp.vstack([A, extra.tocsr()]).tocsr()
    cvec = np.zeros(n + 1)
    cvec[t] = 1.0
    blocks = dict(program.blocks)
    blocks["t"] = np.array([t])
    return MixedIntegerProgram(
        program.names + ("t",), np.append(program.lb, 0.0), np.append(program.ub, np.inf),
        A, np.concatenate([program.row_lower, np.zeros(l)]),
        np.concatenate([program.row_upper, np.full(l, np.inf)]),
        np.concatenate([program.active, np.ones(l, dtype=bool)]),
        program.row_names + tuple(f"minmax[{j}]" for j in range(l)),
        program.disjunctions, program.sos2, cvec, "min", blocks, dict(program.meta))


def check_assignment(program: MixedIntegerProgram, x, feas_tol: float = FEAS_TOL) -> list[str]:
    """Names of violated requirements (empty when ``x`` satisfies the program)."""
    x = np.asarray(x, dtype=float)
    bad = []
    scale = 1.0 + np.abs(x).max(initial=0.0)
    lo_v = np.flatnonzero(program.lb - x > feas_tol * scale)
    hi_v = np.flatnonzero(x - program.ub > feas_tol * scale)
    bad += [f"bound {program.names[j]}" for j in np.concatenate([lo_v, hi_v])]
    rows = np.flatnonzero(program.active)
    v = program.row_violation(x, rows)
    bad += [f"row {program.row_names[rows[k]]}" for k in np.flatnonzero(v > feas_tol)]
    for dj in program.disjunctions:
        ok = [program.row_violation(x, br).max(initial=0.0) <= feas_tol for br in dj.branches]
        if not any(ok):
            bad.append(f"disjunction {dj.name}")
    for g in program.sos2:
        vals = np.array([max(x[v] for v in mem) for mem in g.members])
        nz = np.flatnonzero(vals > feas_tol * max(1.0, vals.max(initial=0.0)))
        k = len(g.members)
        if len(nz) > 2 or (len(nz) == 2 and not (nz[1] - nz[0] == 1
                                                   or (g.cyclic and nz[0] == 0 and nz[1] == k - 1))):
            bad.append(f"sos2 {g.name}")
    return bad


def _normalized(v):
    tot = float(np.sum(v))
    return v / tot if tot > 0 else np.zeros_like(v)


def extract_solution(program: MixedIntegerProgram, x, grasp: GraspModel,
                     feas_tol: float = FEAS_TOL) -> EquilibriumSolution:
    """Named witness from a raw assignment, with ``d`` recomputed from ``r, q``.

    Raises ``ValueError`` when ``x`` does not satisfy the program and
    :class:`WitnessError` when the recovered solution breaks an invariant.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (program.num_vars,):
        raise ValueError("assignment has the wrong length")
    bad = check_assignment(program, x, feas_tol)
    if bad:
        raise ValueError("assignment violates " + ", ".join(bad[:5]))
    bl = program.blocks
    m = program.meta["num_contacts"]
    config: QueryConfig = program.meta["config"]
    c = x[bl["c"]]
    r = x[bl["r"]]
    q = x[bl["q"]]
    tau = x[bl["tau"]]
    d = grasp.grasp_map.T @ r - grasp.jacobian @ q
    scale = float(x[bl["s"][0]]) if "s" in bl else None
    if config.scaled:
        w = scale * np.asarray(config.direction, dtype=float)
    else:
        w = grasp.wrench if config.wrench is None else np.asarray(config.wrench, dtype=float)
    tc = x[bl["tau_c"]] if "tau_c" in bl else np.asarray(config.torques, dtype=float)
    beta = [x[bl[f"beta/{i}"]] for i in range(m)]
    alpha = [x[bl[f"alpha/{i}"]] if f"alpha/{i}" in bl else np.zeros_like(beta[i])
             for i in range(m)]
    z = [_normalized(_normalized(beta[i]) + _normalized(alpha[i])) for i in range(m)]
    sol = EquilibriumSolution(c, r, q, tau, d, w, tc, beta, alpha, z, scale)
    try:
        sol.check(grasp, feas_tol * 10)
    except AssertionError as exc:
        raise WitnessError(str(exc)) from exc
    if np.any(q < -feas_tol):
        raise WitnessError("negative joint motion in witness")
    return sol


def mdp_gap(solution: EquilibriumSolution, grasp: GraspModel, motion_tol: float = MOTION_TOL):
    """Per-contact ``(dissipation, mu c_n ||d_t||)`` for sliding contacts.

    ``dissipation = -c_t . d_t``; both entries are ``nan`` where the
    contact does not move tangentially.
    """
    ct = solution.tangential_forces()
    dt = solution.tangential_motions()
    cn = solution.normal_forces()
    out = np.full((len(ct), 2), np.nan)
    for i in range(len(ct)):
        nd = np.linalg.norm(dt[i])
        if nd > motion_tol:
            out[i] = (-ct[i] @ dt[i], grasp.contacts[i].mu * cn[i] * nd)
    return out
