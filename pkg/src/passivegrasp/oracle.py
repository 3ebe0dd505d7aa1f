"""Brute-force reference verdicts by contact and joint mode enumeration.

Each contact is SEPARATED, STICK or SLIDE along one direction of a grid;
each joint is LOCKED or MOVING.  Fixing the modes turns the exact model
into a linear feasibility problem, solved here with ``scipy.optimize.linprog``
so the check shares no code with the branch and bound.

Grasps whose geometry, hand motion and load all lie in the xy plane are
reduced to that plane: only the two in-plane slide directions exist and
sticking friction is an interval, so the enumeration is exact there.
Otherwise slide directions come from a grid and sticking friction uses an
inscribed polygon.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import linprog

from .model import GraspModel

SEPARATED, STICK, SLIDE = "separated", "stick", "slide"
LOCKED, MOVING = "locked", "moving"
PLANE_TOL = 1e-12
MAX_MODES = 2_000_000


def is_planar(grasp: GraspModel, wrench) -> bool:
    w = np.asarray(wrench, dtype=float)
    if np.any(np.abs(w[[2, 3, 4]]) > PLANE_TOL):
        return False
    for i, ct in enumerate(grasp.contacts):
        if abs(ct.position[2]) > PLANE_TOL or abs(ct.normal[2]) > PLANE_TOL:
            return False
        # hand velocity of the contact point in world coordinates
        v = ct.frame @ grasp.jacobian[3 * i:3 * i + 3]
        if np.any(np.abs(v[2]) > PLANE_TOL):
            return False
    return True


def _slide_directions(grasp, planar, grid_deg):
    out = []
    for ct in grasp.contacts:
        if planar:
            tp = np.cross([0.0, 0.0, 1.0], ct.normal)
            s = np.array([tp @ ct.tangent1, tp @ ct.tangent2])
            out.append([s, -s])
        else:
            n = int(round(360.0 / grid_deg))
            th = np.radians(grid_deg) * np.arange(n)
            out.append(list(np.column_stack([np.cos(th), np.sin(th)])))
    return out


def _friction_bound(mu, s, planar, polygon, t1, t2, cn, n, E, U):
    """``||c_t|| <= mu c_n``: an interval along ``s`` in the plane, else a polygon."""
    if planar:
        for sign in (1.0, -1.0):
            row = np.zeros(n)
            row[t1], row[t2] = sign * s[0], sign * s[1]
            row[cn] = -mu
            U(row)
        row = np.zeros(n)
        row[t1], row[t2] = -s[1], s[0]
        E(row)
    else:
        for ang in polygon:
            row = np.zeros(n)
            row[t1], row[t2] = math.cos(ang), math.sin(ang)
            row[cn] = -mu * math.cos(math.pi / len(polygon))
            U(row)


def _mode_lp(grasp, torques, w, cmodes, jmodes, planar, polygon):
    """Feasibility LP for one mode assignment; returns True when feasible."""
    m, l = grasp.num_contacts, grasp.num_joints
    G, J = grasp.grasp_map, grasp.jacobian
    nc, nr, nq = 3 * m, 6, l
    nl = sum(1 for cm in cmodes if cm[0] == SLIDE)
    n = nc + nr + nq + nl
    ic, ir, iq, il = 0, nc, nc + nr, nc + nr + nq
    # d = G^T r - J q as rows over the full variable vector
    D = np.zeros((nc, n))
    D[:, ir:ir + 6] = G.T
    D[:, iq:iq + nq] = -J
    eq, beq, ub, bub = [], [], [], []

    def E(row, rhs=0.0):
        eq.append(row)
        beq.append(rhs)

    def U(row, rhs=0.0):
        ub.append(row)
        bub.append(rhs)

    for k in range(6):
        row = np.zeros(n)
        row[ic:ic + nc] = G[k]
        E(row, -w[k])
    bounds = [(None, None)] * n
    for i in range(m):
        bounds[ic + 3 * i + 2] = (0, None)
    for j in range(nq):
        bounds[iq + j] = (0, None)
    if planar:
        zr = np.zeros(n)
        for a in (2, 3, 4):
            zr = np.zeros(n)
            zr[ir + a] = 1.0
            E(zr)
    lam = il
    for i, (mode, s) in enumerate(cmodes):
        t1, t2, cn = ic + 3 * i, ic + 3 * i + 1, ic + 3 * i + 2
        dn = D[3 * i + 2]
        if mode is None:
            # constraints shared by every mode
            row = -dn.copy()
            row[cn] -= 1.0
            U(row)  # c_n + d_n >= 0
            _friction_bound(grasp.contacts[i].mu, s, planar, polygon, t1, t2, cn, n, E, U)
            continue
        if mode == SEPARATED:
            for a in (t1, t2, cn):
                row = np.zeros(n)
                row[a] = 1.0
                E(row)
            U(-dn)
            continue
        row = dn.copy()
        row[cn] += 1.0
        E(row)  # c_n = -d_n
        if mode == STICK:
            E(D[3 * i])
            E(D[3 * i + 1])
            _friction_bound(grasp.contacts[i].mu, s, planar, polygon, t1, t2, cn, n, E, U)
        else:
            mu = grasp.contacts[i].mu
            for a, ta in ((0, t1), (1, t2)):
                row = np.zeros(n)
                row[ta] = 1.0
                row[cn] = -mu * s[a]
                E(row)  # c_t = mu c_n s
                row = D[3 * i + a].copy()
                row[lam] = s[a]
                E(row)  # d_t = -lambda s
            bounds[lam] = (0, None)
            lam += 1
    for j, mode in enumerate(jmodes):
        tau = np.zeros(n)
        tau[ic:ic + nc] = J[:, j]
        if mode is None:
            U(-tau, -torques[j])
        elif mode == LOCKED:
            bounds[iq + j] = (0, 0)
            U(-tau, -torques[j])
        else:
            E(tau, torques[j])
    res = linprog(np.zeros(n), A_ub=np.array(ub) if ub else None, b_ub=bub or None,
                  A_eq=np.array(eq), b_eq=beq, bounds=bounds, method="highs")
    return res.status == 0


def _verdict(grasp, torques, w, planar, grid_deg, polygon_edges):
    dirs = _slide_directions(grasp, planar, grid_deg)
    polygon = (np.pi / polygon_edges) * (2 * np.arange(polygon_edges) + 1)
    # STICK carries the in-plane tangent for the planar interval
    cm_opts = [[(SEPARATED, None), (STICK, d[0])] + [(SLIDE, s) for s in d] for d in dirs]
    total = np.prod([len(o) for o in cm_opts]) * 2 ** grasp.num_joints
    if total > MAX_MODES:
        raise ValueError(f"{total} mode assignments exceed the enumeration guard")
    m, l = grasp.num_contacts, grasp.num_joints
    # unassigned contacts keep their in-plane tangent for the shared bound
    free = [(None, d[0]) for d in dirs]

    def search(cmodes, jmodes):
        if not _mode_lp(grasp, torques, w, cmodes, jmodes, planar, polygon):
            return False
        k = sum(cm[0] is not None for cm in cmodes)
        if k < m:
            return any(search(cmodes[:k] + [opt] + cmodes[k + 1:], jmodes)
                       for opt in cm_opts[k])
        jk = sum(jm is not None for jm in jmodes)
        if jk < l:
            return any(search(cmodes, jmodes[:jk] + [opt] + jmodes[jk + 1:])
                       for opt in (LOCKED, MOVING))
        return True

    return search(list(free), [None] * l)


def brute_force_stability(grasp: GraspModel, torques=None, wrench=None, angle_grid: float = 0.1,
                          eta: float = 0.0, band: float = 0.02, polygon_edges: int = 3600,
                          planar: bool | None = None) -> str:
    """``stable``, ``unstable`` or ``boundary``.

    The verdict is computed for the wrench scaled by ``1 - band``, 1 and
    ``1 + band``; any disagreement among the three is reported as
    ``boundary``.  ``angle_grid`` is the slide-direction spacing in
    degrees for non-planar grasps.  Only ``eta = 0`` is supported.
    """
    if eta != 0.0:
        raise ValueError("the oracle checks the nominal model only (eta = 0)")
    if grasp.num_contacts > 4 or grasp.num_joints > 4:
        raise ValueError("oracle limited to 4 contacts and 4 joints")
    tc = grasp.commanded_torques if torques is None else np.asarray(torques, dtype=float)
    w = grasp.wrench if wrench is None else np.asarray(wrench, dtype=float)
    if planar is None:
        planar = is_planar(grasp, w)
    verdicts = {_verdict(grasp, tc, f * w, planar, angle_grid, polygon_edges)
                for f in (1.0 - band, 1.0, 1.0 + band)}
    if len(verdicts) > 1:
        return "boundary"
    return "stable" if verdicts.pop() else "unstable"
