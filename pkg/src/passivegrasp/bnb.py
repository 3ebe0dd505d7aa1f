"""Branch and bound over disjunctions and SOS2 groups.

LP relaxations are solved with HiGHS through ``highspy``.  A single HiGHS
instance holds every row of the program; rows that belong to disjunction
branches are kept free until a node activates them, and SOS2 branching
only tightens column upper bounds to zero.  Moving between nodes is then a
matter of changing bounds, and HiGHS warm-starts from the last basis.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import highspy
import numpy as np
import scipy.sparse as sp

INF = highspy.kHighsInf
FEAS_TOL = 1e-7
PIVOT_TOL = 1e-7


@dataclass(frozen=True)
class LinearProgram:
    """``min/max c x`` subject to ``row_lower <= A x <= row_upper`` and
    ``lb <= x <= ub``.  Infinite bounds are ``+-inf``."""

    c: np.ndarray
    A: sp.csr_matrix
    row_lower: np.ndarray
    row_upper: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    sense: str = "min"

    @classmethod
    def from_dense(cls, c, A_ub=None, b_ub=None, A_eq=None, b_eq=None,
                   bounds=None, sense="min") -> "LinearProgram":
        c = np.asarray(c, dtype=float)
        n = c.size
        blocks, lo, hi = [], [], []
        if A_ub is not None:
            A_ub = np.atleast_2d(np.asarray(A_ub, dtype=float))
            blocks.append(A_ub)
            lo.append(np.full(A_ub.shape[0], -np.inf))
            hi.append(np.asarray(b_ub, dtype=float))
        if A_eq is not None:
            A_eq = np.atleast_2d(np.asarray(A_eq, dtype=float))
            blocks.append(A_eq)
            lo.append(np.asarray(b_eq, dtype=float))
            hi.append(np.asarray(b_eq, dtype=float))
        A = sp.csr_matrix(np.vstack(blocks)) if blocks else sp.csr_matrix((0, n))
        if bounds is None:
            lb, ub = np.zeros(n), np.full(n, np.inf)
        else:
            b = np.asarray(bounds, dtype=float).reshape(-1, 2)
            if b.shape[0] == 1:
                b = np.repeat(b, n, axis=0)
            lb = np.where(np.isnan(b[:, 0]), -np.inf, b[:, 0])
            ub = np.where(np.isnan(b[:, 1]), np.inf, b[:, 1])
        return cls(c, A, np.concatenate(lo) if lo else np.zeros(0),
                   np.concatenate(hi) if hi else np.zeros(0), lb, ub, sense)


@dataclass(frozen=True)
class Disjunction:
    """Either every row in ``branches[0]`` or every row in ``branches[1]``
    must hold.  Rows are indices into the program's row list."""

    name: str
    branches: tuple[tuple[int, ...], tuple[int, ...]]


@dataclass(frozen=True)
class Sos2Group:
    """Ordered members, each a tuple of variable indices that are nonzero
    together.  At most two members, adjacent in the order (cyclically if
    ``cyclic``), may have nonzero variables."""

    name: str
    members: tuple[tuple[int, ...], ...]
    cyclic: bool = True


@dataclass(frozen=True)
class MixedIntegerProgram:
    """Continuous variables, linear rows, disjunctions and SOS2 groups.

    ``active`` marks the rows that always hold; the remaining rows only
    hold inside a disjunction branch that selects them.  ``blocks`` maps
    variable-block names to index arrays for downstream extraction.
    """

    names: tuple[str, ...]
    lb: np.ndarray
    ub: np.ndarray
    A: sp.csr_matrix
    row_lower: np.ndarray
    row_upper: np.ndarray
    active: np.ndarray
    row_names: tuple[str, ...]
    disjunctions: tuple[Disjunction, ...] = ()
    sos2: tuple[Sos2Group, ...] = ()
    c: np.ndarray | None = None
    sense: str = "min"
    blocks: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    @property
    def num_vars(self) -> int:
        return len(self.names)

    @property
    def num_rows(self) -> int:
        return self.A.shape[0]

    @property
    def is_feasibility(self) -> bool:
        return self.c is None or not np.any(self.c)

    def relaxation(self) -> LinearProgram:
        """LP over the always-active rows (every disjunction dropped)."""
        rows = np.flatnonzero(self.active)
        c = np.zeros(self.num_vars) if self.c is None else self.c
        return LinearProgram(c, self.A[rows], self.row_lower[rows], self.row_upper[rows],
                             self.lb, self.ub, self.sense)

    def row_violation(self, x: np.ndarray, rows=None) -> np.ndarray:
        """Scaled violation of rows at ``x`` (0 when satisfied)."""
        rows = np.arange(self.num_rows) if rows is None else np.asarray(rows, dtype=int)
        if rows.size == 0:
            return np.zeros(0)
        A = self.A[rows]
        ax = A @ x
        mag = abs(A) @ np.abs(x)
        viol = np.maximum(self.row_lower[rows] - ax, ax - self.row_upper[rows])
        return np.maximum(viol, 0.0) / (1.0 + mag)

    def dump(self) -> str:
        """Human-readable listing of variables, rows, disjunctions and groups."""
        out = ["variables:"]
        for i, n in enumerate(self.names):
            out.append(f"  x{i} {n} in [{self.lb[i]:g}, {self.ub[i]:g}]")
        out.append("rows:")
        A = self.A.tocsr()
        for r in range(self.num_rows):
            lo, hi = A.indptr[r], A.indptr[r + 1]
            terms = " ".join(f"{v:+.6g}*{self.names[j]}"
                             for j, v in zip(A.indices[lo:hi], A.data[lo:hi]))
            tag = "" if self.active[r] else " (branch)"
            out.append(f"  r{r} {self.row_names[r]}{tag}: "
                       f"{self.row_lower[r]:g} <= {terms} <= {self.row_upper[r]:g}")
        out.append("disjunctions:")
        for d in self.disjunctions:
            out.append(f"  {d.name}: rows {list(d.branches[0])} | rows {list(d.branches[1])}")
        out.append("sos2:")
        for g in self.sos2:
            out.append(f"  {g.name} ({'cyclic' if g.cyclic else 'linear'}): "
                       + " ".join("(" + ",".join(self.names[v] for v in m) + ")"
                                  for m in g.members))
        if self.is_feasibility:
            out.append("objective: feasibility")
        else:
            terms = " ".join(f"{v:+.6g}*{self.names[j]}"
                             for j, v in enumerate(self.c) if v)
            out.append(f"objective: {self.sense} {terms}")
        return "\n".join(out)


@dataclass
class SolveOutcome:
    status: str  # optimal | infeasible | unbounded | cap-reached | numerical
    x: np.ndarray | None = None
    objective: float | None = None
    nodes: int = 0
    seconds: float = 0.0
    bound: float | None = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


class ProgramBuilder:
    """Incremental construction of a :class:`MixedIntegerProgram`."""

    def __init__(self):
        self.names: list[str] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self._rows: list[dict[int, float]] = []
        self._lo: list[float] = []
        self._hi: list[float] = []
        self._active: list[bool] = []
        self._row_names: list[str] = []
        self.disjunctions: list[Disjunction] = []
        self.sos2: list[Sos2Group] = []
        self.blocks: dict[str, np.ndarray] = {}

    def add_var(self, name: str, lb: float = -np.inf, ub: float = np.inf) -> int:
        self.names.append(name)
        self.lb.append(lb)
        self.ub.append(ub)
        return len(self.names) - 1

    def add_block(self, name: str, size: int, lb: float = -np.inf, ub: float = np.inf,
                  labels: Sequence[str] | None = None) -> np.ndarray:
        labels = labels or [str(i) for i in range(size)]
        idx = np.array([self.add_var(f"{name}[{labels[i]}]", lb, ub) for i in range(size)],
                       dtype=int)
        self.blocks[name] = idx
        return idx

    def add_row(self, coeffs: dict[int, float], lo: float = -np.inf, hi: float = np.inf,
                name: str = "", active: bool = True) -> int:
        clean = {}
        for j, v in coeffs.items():
            if v != 0.0:
                clean[int(j)] = clean.get(int(j), 0.0) + float(v)
        self._rows.append(clean)
        self._lo.append(lo)
        self._hi.append(hi)
        self._active.append(active)
        self._row_names.append(name)
        return len(self._rows) - 1

    def add_disjunction(self, name: str, branch_a: Sequence[dict], branch_b: Sequence[dict]):
        """Each branch is a list of ``dict(coeffs=..., lo=..., hi=...)`` rows."""
        ra = tuple(self.add_row(active=False, name=f"{name}/A", **r) for r in branch_a)
        rb = tuple(self.add_row(active=False, name=f"{name}/B", **r) for r in branch_b)
        self.disjunctions.append(Disjunction(name, (ra, rb)))

    def add_sos2(self, name: str, members: Sequence[Sequence[int]], cyclic: bool = True):
        self.sos2.append(Sos2Group(name, tuple(tuple(int(v) for v in m) for m in members),
                                   cyclic))

    def build(self, c=None, sense: str = "min", meta=None) -> MixedIntegerProgram:
        n = len(self.names)
        indptr, indices, data = [0], [], []
        for row in self._rows:
            for j in sorted(row):
                indices.append(j)
                data.append(row[j])
            indptr.append(len(indices))
        A = sp.csr_matrix((np.array(data, dtype=float), np.array(indices, dtype=int),
                           np.array(indptr, dtype=int)), shape=(len(self._rows), n))
        cvec = None
        if c is not None:
            cvec = np.zeros(n)
            for j, v in c.items():
                cvec[j] += v
        return MixedIntegerProgram(
            tuple(self.names), np.array(self.lb, dtype=float), np.array(self.ub, dtype=float),
            A, np.array(self._lo, dtype=float), np.array(self._hi, dtype=float),
            np.array(self._active, dtype=bool), tuple(self._row_names),
            tuple(self.disjunctions), tuple(self.sos2), cvec, sense,
            dict(self.blocks), dict(meta or {}))


def _finite(a):
    return np.where(np.isfinite(a), a, np.where(a > 0, INF, -INF))


class _Highs:
    """Thin stateful wrapper: one model, bounds changed in place."""

    def __init__(self, c, A: sp.csr_matrix, row_lower, row_upper, lb, ub, sense):
        self.h = highspy.Highs()
        h = self.h
        h.setOptionValue("output_flag", False)
        h.setOptionValue("presolve", "off")
        h.setOptionValue("primal_feasibility_tolerance", PIVOT_TOL)
        h.setOptionValue("dual_feasibility_tolerance", PIVOT_TOL)
        h.setOptionValue("threads", 1)
        lp = highspy.HighsLp()
        n = A.shape[1]
        Acsc = A.tocsc()
        lp.num_col_ = n
        lp.num_row_ = A.shape[0]
        lp.col_cost_ = np.asarray(c, dtype=float)
        lp.col_lower_ = _finite(lb)
        lp.col_upper_ = _finite(ub)
        lp.row_lower_ = _finite(row_lower)
        lp.row_upper_ = _finite(row_upper)
        lp.a_matrix_.format_ = highspy.MatrixFormat.kColwise
        lp.a_matrix_.start_ = Acsc.indptr.astype(np.int32)
        lp.a_matrix_.index_ = Acsc.indices.astype(np.int32)
        lp.a_matrix_.value_ = Acsc.data.astype(float)
        lp.sense_ = highspy.ObjSense.kMaximize if sense == "max" else highspy.ObjSense.kMinimize
        h.passModel(lp)
        self.n = n
        self.m = A.shape[0]
        self.cost = np.asarray(c, dtype=float)
        nz = self.cost != 0
        # an objective over boxed columns cannot be unbounded
        self.boxed = bool(np.all(np.isfinite(lb[nz])) and np.all(np.isfinite(ub[nz])))

    def set_col_bounds(self, idx, lo, hi):
        if len(idx):
            self.h.changeColsBounds(len(idx), np.asarray(idx, dtype=np.int32),
                                    _finite(lo), _finite(hi))

    def set_row_bounds(self, idx, lo, hi):
        if len(idx):
            self.h.changeRowsBounds(len(idx), np.asarray(idx, dtype=np.int32),
                                    _finite(lo), _finite(hi))

    def solve(self) -> tuple[str, np.ndarray | None, float | None]:
        status = self._run()
        if status not in ("optimal", "infeasible") and not (status == "unbounded"
                                                            and not self.boxed):
            self.h.clearSolver()
            status = self._run()
        if status == "ambiguous":
            status = self._feasibility_probe()
        if status == "unbounded" and self.boxed:
            status = "numerical"
        if status == "optimal":
            x = np.array(self.h.getSolution().col_value)
            return status, x, float(self.h.getInfo().objective_function_value)
        return status, None, None

    def _run(self) -> str:
        self.h.run()
        ms = self.h.getModelStatus()
        if ms == highspy.HighsModelStatus.kOptimal:
            return "optimal"
        if ms == highspy.HighsModelStatus.kInfeasible:
            return "infeasible"
        if ms == highspy.HighsModelStatus.kUnbounded:
            return "unbounded"
        if ms == highspy.HighsModelStatus.kUnboundedOrInfeasible:
            return "ambiguous"
        return "numerical"

    def _feasibility_probe(self) -> str:
        idx = np.arange(self.n, dtype=np.int32)
        self.h.changeColsCost(self.n, idx, np.zeros(self.n))
        status = self._run()
        self.h.changeColsCost(self.n, idx, self.cost)
        if status == "optimal":
            self.h.clearSolver()
            status = self._run()
            return "unbounded" if status != "optimal" else status
        return status


def solve_lp(lp: LinearProgram) -> SolveOutcome:
    """Solve one LP; status is optimal, infeasible, unbounded or numerical."""
    t0 = time.perf_counter()
    solver = _Highs(lp.c, sp.csr_matrix(lp.A), lp.row_lower, lp.row_upper, lp.lb, lp.ub,
                    lp.sense)
    status, x, obj = solver.solve()
    return SolveOutcome(status, x, obj, 1, time.perf_counter() - t0)


@dataclass(order=True)
class _Node:
    key: tuple
    depth: int = field(compare=False)
    bound: float = field(compare=False)
    fixes: tuple = field(compare=False)       # ((disjunction, branch), ...)
    intervals: tuple = field(compare=False)   # per SOS2 group: None or (start, count)


def _member_matrix(group: Sos2Group, pad: int) -> np.ndarray:
    """Members as rows of variable indices, padded with ``pad``."""
    width = max(len(m) for m in group.members)
    M = np.full((len(group.members), width), pad, dtype=int)
    for j, m in enumerate(group.members):
        M[j, :len(m)] = m
    return M


def _group_weights(xe, M) -> np.ndarray:
    """Member weights: each variable column normalized to sum 1, then summed."""
    vals = np.maximum(xe[M], 0.0)
    tot = vals.sum(axis=0)
    tot[tot <= 0] = 1.0
    return (vals / tot).sum(axis=1)


def _sos2_state(xe, M, cyclic, interval, tol):
    """Return (violation, support positions relative to interval)."""
    k = M.shape[0]
    vals = xe[M].max(axis=1)
    scale = max(1.0, float(vals.max(initial=0.0)))
    nz = vals > tol * scale
    if interval is None:
        start, count, cyc = 0, k, cyclic
    else:
        start, count = interval
        cyc = False
    order = (start + np.arange(count)) % k
    pos = np.flatnonzero(nz[order]).tolist()
    if len(pos) <= 1:
        return 0.0, pos
    if len(pos) == 2:
        a, b = pos
        if b - a == 1 or (cyc and a == 0 and b == count - 1):
            return 0.0, pos
    wp = _group_weights(xe, M)[order]
    pair = wp[:-1] + wp[1:]
    if cyc:
        pair = np.append(pair, wp[-1] + wp[0])
    return float(wp.sum() - pair.max()), pos


def _sos2_children(xe, M, cyclic, interval, pos):
    """Two member intervals whose union keeps every SOS2-feasible point.

    A full cycle is cut into two overlapping arcs around the heaviest
    member; a linear interval is split at the weighted median of its
    weights, strictly between the outermost nonzero members.
    """
    k = M.shape[0]
    w = _group_weights(xe, M)
    if interval is None and cyclic:
        j = int(np.argmax(w))
        half = k // 2
        return [((j - half) % k, half + 1), (j, k - half + 1)]
    start, count = interval if interval is not None else (0, k)
    wp = w[(start + np.arange(count)) % k]
    lo_p, hi_p = min(pos), max(pos)
    csum = np.cumsum(wp)
    r = int(np.searchsorted(csum, csum[-1] / 2.0))
    r = min(max(r, lo_p + 1), hi_p - 1)
    return [(start, r + 1), ((start + r) % k, count - r)]


def _leaf_ok(mip, x, lo, hi, ub, tol) -> bool:
    scale = 1.0 + np.abs(x)
    if np.any(mip.lb - x > tol * scale) or np.any(x - ub > tol * scale):
        return False
    ax = mip.A @ x
    mag = 1.0 + abs(mip.A) @ np.abs(x)
    return not np.any(np.maximum(lo - ax, ax - hi) > tol * mag)


def solve_mip(mip: MixedIntegerProgram, node_limit: int = 200_000,
              time_limit: float | None = None, feas_tol: float = FEAS_TOL,
              log: Callable[[str], None] | None = None) -> SolveOutcome:
    """Exact branch and bound over the disjunctions and SOS2 groups.

    Feasibility programs stop at the first leaf satisfying everything.
    Optimization programs use best-bound node selection (deeper first on
    ties) and return a proven optimum.  Hitting ``node_limit`` or
    ``time_limit`` yields status ``cap-reached`` with the incumbent, if any.
    """
    t0 = time.perf_counter()
    n = mip.num_vars
    sense = mip.sense
    feas_only = mip.is_feasibility
    c = np.zeros(n) if mip.c is None else mip.c
    root_lo = np.where(mip.active, mip.row_lower, -np.inf)
    root_hi = np.where(mip.active, mip.row_upper, np.inf)
    solver = _Highs(c, mip.A, root_lo, root_hi, mip.lb, mip.ub, sense)
    cur_lo, cur_hi = root_lo.copy(), root_hi.copy()
    cur_ub = mip.ub.copy()
    sign = -1.0 if sense == "max" else 1.0  # heap key: smaller is better

    n_groups = len(mip.sos2)
    absA = abs(mip.A)
    branch_rows = [tuple(np.asarray(b, dtype=int) for b in dj.branches)
                   for dj in mip.disjunctions]
    members = [_member_matrix(g, n) for g in mip.sos2]
    root = _Node((0.0, 0, 0), 0, -np.inf if sense == "min" else np.inf, (), (None,) * n_groups)
    heap = [root]
    seq = 0
    nodes = 0
    incumbent = None
    inc_obj = None
    numerical = False

    def apply(node: _Node):
        nonlocal cur_lo, cur_hi, cur_ub
        lo, hi = root_lo.copy(), root_hi.copy()
        for d, b in node.fixes:
            rows = branch_rows[d][b]
            lo[rows] = mip.row_lower[rows]
            hi[rows] = mip.row_upper[rows]
        ub = np.append(mip.ub, 0.0)
        for g, iv in enumerate(node.intervals):
            if iv is None:
                continue
            M = members[g]
            start, count = iv
            keep = np.zeros(M.shape[0], dtype=bool)
            keep[(start + np.arange(count)) % M.shape[0]] = True
            ub[M[~keep].ravel()] = 0.0
        ub = ub[:n]
        rchg = np.flatnonzero((lo != cur_lo) | (hi != cur_hi))
        solver.set_row_bounds(rchg, lo[rchg], hi[rchg])
        cchg = np.flatnonzero(ub != cur_ub)
        solver.set_col_bounds(cchg, mip.lb[cchg], ub[cchg])
        cur_lo, cur_hi, cur_ub = lo, hi, ub

    while heap:
        if nodes >= node_limit or (time_limit is not None
                                   and time.perf_counter() - t0 > time_limit):
            return SolveOutcome("cap-reached", incumbent, inc_obj, nodes,
                                time.perf_counter() - t0,
                                bound=sign * heap[0].key[0] if heap else None)
        node = heapq.heappop(heap)
        if incumbent is not None and sign * node.bound >= sign * inc_obj - 1e-9 * (1 + abs(inc_obj)):
            continue
        nodes += 1
        apply(node)
        status, x, obj = solver.solve()
        if log is not None:
            log(f"{node.depth} {obj if obj is not None else float('nan'):.9g} {status}")
        if status == "infeasible":
            continue
        if status == "unbounded":
            return SolveOutcome("unbounded", None, None, nodes, time.perf_counter() - t0)
        if status != "optimal":
            numerical = True
            continue
        if incumbent is not None and sign * obj >= sign * inc_obj - 1e-9 * (1 + abs(inc_obj)):
            continue

        # scaled violation of every row against its own bounds
        ax = mip.A @ x
        viol = np.maximum(np.maximum(mip.row_lower - ax, ax - mip.row_upper), 0.0)
        viol /= 1.0 + absA @ np.abs(x)
        fixed = {d for d, _ in node.fixes}
        best_d, best_v, best_b = None, 0.0, 0
        for d, (ra, rb) in enumerate(branch_rows):
            if d in fixed:
                continue
            ma = float(viol[ra].max(initial=0.0))
            mb = float(viol[rb].max(initial=0.0))
            v = min(ma, mb)
            if v > feas_tol and v > best_v:
                best_d, best_v, best_b = d, v, (0 if ma <= mb else 1)

        children = []
        if best_d is not None:
            pref = best_b
            for b in (1 - pref, pref):  # preferred branch pushed last
                children.append((node.fixes + ((best_d, b),), node.intervals))
        else:
            xe = np.append(x, 0.0)
            best_g, best_gv, best_pos = None, 0.0, None
            for g, group in enumerate(mip.sos2):
                v, pos = _sos2_state(xe, members[g], group.cyclic, node.intervals[g], feas_tol)
                if v > best_gv:
                    best_g, best_gv, best_pos = g, v, pos
            if best_g is None:
                # every branch and group satisfied: a leaf, if HiGHS's
                # answer also holds on the original rows
                if not _leaf_ok(mip, x, cur_lo, cur_hi, cur_ub, feas_tol):
                    solver.h.clearSolver()
                    status, x, obj = solver.solve()
                    if status != "optimal" or not _leaf_ok(mip, x, cur_lo, cur_hi, cur_ub,
                                                           feas_tol):
                        numerical = True
                        continue
                if feas_only:
                    return SolveOutcome("optimal", x, obj, nodes, time.perf_counter() - t0)
                incumbent, inc_obj = x, obj
                continue
            group = mip.sos2[best_g]
            for iv in _sos2_children(xe, members[best_g], group.cyclic,
                                     node.intervals[best_g], best_pos):
                iv_t = list(node.intervals)
                iv_t[best_g] = iv
                children.append((node.fixes, tuple(iv_t)))
            children.reverse()
        for fixes, intervals in children:
            seq += 1
            heapq.heappush(heap, _Node((sign * obj, -(node.depth + 1), -seq), node.depth + 1,
                                       obj, fixes, intervals))

    elapsed = time.perf_counter() - t0
    if incumbent is not None:
        return SolveOutcome("optimal", incumbent, inc_obj, nodes, elapsed, bound=inc_obj)
    if numerical:
        return SolveOutcome("numerical", None, None, nodes, elapsed)
    return SolveOutcome("infeasible", None, None, nodes, elapsed)
