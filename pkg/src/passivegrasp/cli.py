"""Command-line front end.

Exit codes: 0 the query was answered (``UNSTABLE`` is an answer), 1 no
commanded torques resist the wrench, 2 bad input, 3 inconclusive because a
solver limit was hit.  Results go to stdout (or ``-o``), diagnostics and
round traces to stderr.  Stdout carries no timings, so repeated runs print
the same bytes.
"""
from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from .model import GraspFileError, GraspModel, load_grasp
from .queries import (QueryResult, ablation_no_mdp, check_stability, force_map,
                      force_map_csv, max_disturbance, optimal_torques, plane_basis)

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class InputError(ValueError):
    pass


def _common(p: argparse.ArgumentParser, preload: bool = True):
    p.add_argument("grasp", help="grasp description file (JSON)")
    if preload:
        p.add_argument("--preload", type=float, nargs="+", metavar="TAU",
                       help="commanded torques in N m; one value applies to every joint")
    p.add_argument("--eta-deg", type=float, default=0.0,
                   help="robustness margin on the normal-gap estimate, degrees")
    p.add_argument("--gamma-deg", type=float, default=90.0, help="initial sector angle")
    p.add_argument("--q-max", type=int, default=9, help="maximum refinement depth")
    p.add_argument("--node-limit", type=int, default=200_000, help="nodes per round")
    p.add_argument("--time-limit", type=float, default=None, help="seconds per query")
    p.add_argument("--trace", action="store_true", help="round trace to stderr")
    p.add_argument("-o", "--output", help="write results here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="passivegrasp",
                                     description="Passive grasp stability analysis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="is a fixed wrench resisted?")
    _common(p)
    p.add_argument("--wrench", type=float, nargs=6, metavar="W",
                   help="force (N) then torque (N m); default: the file's wrench")
    p.add_argument("--no-mdp", action="store_true",
                   help="drop the maximum-dissipation constraints")

    p = sub.add_parser("ablate", help="check without maximum dissipation")
    _common(p)
    p.add_argument("--wrench", type=float, nargs=6, metavar="W")

    p = sub.add_parser("max-wrench", help="largest resisted scale along a direction")
    _common(p)
    p.add_argument("--direction", type=float, nargs=6, metavar="U", required=True)
    p.add_argument("--s-cap", type=float, default=100.0)

    p = sub.add_parser("optimal-torques", help="smallest largest commanded torque")
    _common(p, preload=False)
    p.add_argument("--wrench", type=float, nargs=6, metavar="W")

    p = sub.add_parser("force-map", help="max-wrench over directions in a plane (CSV)")
    _common(p)
    p.add_argument("--plane", default="xy", help="two force axes, e.g. xy, yz, xz")
    p.add_argument("--resolution-deg", type=float, default=1.0)
    p.add_argument("--s-cap", type=float, default=100.0)
    p.add_argument("--jobs", type=int, default=1)
    return parser


def _torques(args, grasp: GraspModel):
    pre = getattr(args, "preload", None)
    if pre is None:
        return grasp.commanded_torques
    if len(pre) == 1:
        pre = pre * grasp.num_joints
    if len(pre) != grasp.num_joints:
        raise InputError(f"--preload needs 1 or {grasp.num_joints} values")
    if any(t < 0 for t in pre):
        raise InputError("--preload values must be nonnegative")
    return np.array(pre, dtype=float)


def _wrench(args, grasp: GraspModel):
    if args.wrench is not None:
        return np.array(args.wrench, dtype=float)
    if grasp.wrench is None:
        raise InputError("no wrench given and the grasp file has none")
    return grasp.wrench


def _validate(args):
    if not 0 <= args.eta_deg < 90:
        raise InputError("--eta-deg must lie in [0, 90)")
    if not 0 < args.gamma_deg <= 120:
        raise InputError("--gamma-deg must lie in (0, 120]")
    if 360 % args.gamma_deg:
        raise InputError("--gamma-deg must divide 360")
    if args.q_max < 0:
        raise InputError("--q-max must be nonnegative")
    if getattr(args, "s_cap", 1.0) <= 0:
        raise InputError("--s-cap must be positive")
    if getattr(args, "jobs", 1) < 1:
        raise InputError("--jobs must be at least 1")


def format_witness(result: QueryResult) -> str:
    """Plain-text listing of the final-round witness, one contact per line."""
    sol = result.witness
    if sol is None:
        return ""
    c = sol.contact_forces.reshape(-1, 3) + 0.0  # drop negative zeros
    d = sol.contact_motion.reshape(-1, 3) + 0.0
    lines = ["witness:", "  contact  c_t1 c_t2 c_n  d_t1 d_t2 d_n"]
    for i in range(c.shape[0]):
        vals = " ".join(f"{v:.6g}" for v in (*c[i], *d[i]))
        lines.append(f"  {i}  {vals}")
    for label, vec in (("wrench", sol.wrench), ("joint torques", sol.joint_torques),
                       ("joint motions", sol.joint_motions)):
        lines.append(f"  {label} " + " ".join(f"{v + 0.0:.6g}" for v in vec))
    return "\n".join(lines)


def _trace(args, result: QueryResult):
    if args.trace and result.outcome is not None:
        print(result.outcome.trace(), file=sys.stderr)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        _validate(args)
        grasp = load_grasp(args.grasp)
        solver = dict(gamma=math.radians(args.gamma_deg), q_max=args.q_max,
                      node_limit=args.node_limit, time_limit=args.time_limit)
        eta = math.radians(args.eta_deg)
        if args.command in ("check", "ablate"):
            tc, w = _torques(args, grasp), _wrench(args, grasp)
            if args.command == "ablate" or args.no_mdp:
                if eta:
                    raise InputError("--eta-deg has no effect without maximum dissipation")
                res = ablation_no_mdp(grasp, tc, w, **solver)
            else:
                res = check_stability(grasp, tc, w, eta, **solver)
        elif args.command == "max-wrench":
            res = max_disturbance(grasp, args.direction, _torques(args, grasp), eta,
                                  args.s_cap, **solver)
        elif args.command == "optimal-torques":
            res = optimal_torques(grasp, _wrench(args, grasp), eta, **solver)
        else:
            u, v = plane_basis(args.plane)
            res = force_map(grasp, u, v, args.resolution_deg, _torques(args, grasp), eta,
                            args.s_cap, jobs=args.jobs, **solver)
    except (GraspFileError, InputError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.command == "force-map":
        text = force_map_csv(res)
    else:
        _trace(args, res)
        text = res.summary() + "\n"
        wit = format_witness(res)
        if wit:
            text += wit + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)

    if res.status == "inconclusive":
        if res.outcome is not None and res.outcome.reason:
            print(f"inconclusive: {res.outcome.reason}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    if res.kind == "optimal_torques" and res.status == "infeasible":
        return EXIT_INFEASIBLE
    return EXIT_OK


def main():
    sys.exit(run())
