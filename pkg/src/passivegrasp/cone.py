"""Hierarchically refined polyhedral friction cones.

Edge angles are stored exactly as integers counting the finest sector
angle ``gamma / 2**q_max``; a sector of depth ``p`` spans
``2**(q_max - p + 1)`` such units, so depth 1 sectors have angle
``gamma`` and the deepest sectors (depth ``q_max + 1``) have angle
``gamma / 2**q_max``.

Every sector's two edges carry the length of that sector's depth, so a
direction where sectors of different depth meet holds two edges: a long
one closing the coarse sector and a short one opening the fine sector.
Each sector's chord then stays outside the unit circle, and a bisected
sector's polygon lies inside its parent's.  The first property makes an
infeasible relaxation a proof of instability, the second makes the
relaxations shrink from round to round.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np


class SectorAtMaxDepth(ValueError):
    """Refinement requested for a sector that is already as fine as allowed."""


def edge_length(p: int, gamma: float, q_max: int) -> float:
    """Length of friction edges bounding sectors of depth ``p``.

    ``l_p = prod_{r=p}^{q_max+1} sec(gamma / 2**r)``.  ``p = q_max + 2``
    is accepted and gives the empty product, 1.
    """
    if not 1 <= p <= q_max + 2:
        raise ValueError(f"depth {p} outside [1, {q_max + 1}]")
    return float(np.prod([1.0 / math.cos(gamma / 2 ** r) for r in range(p, q_max + 2)]))


def target_depth(delta: float, gamma: float) -> int:
    """Depth of the sectors obtained by bisecting a sector of angle ``delta``."""
    if delta <= 0:
        raise ValueError("sector angle must be positive")
    j = math.log2(gamma / delta)
    jr = round(j)
    if abs(j - jr) > 1e-9 or jr < 0:
        raise ValueError(f"sector angle {delta} is not gamma / 2**j")
    return jr + 2


@dataclass(frozen=True)
class FrictionEdge:
    angle: float
    length: float
    depth: int


@dataclass(frozen=True)
class FrictionConeState:
    """Angularly ordered sectors of one contact and the edges they induce.

    ``boundaries[j]`` is the start of sector ``j`` (in finest units) and
    ``depths[j]`` its refinement depth; sector ``j`` ends where sector
    ``j + 1`` starts, cyclically.  Edges are listed in angular order, the
    long copy first where two share a direction.
    """

    gamma: float
    q_max: int
    boundaries: tuple[int, ...]
    depths: tuple[int, ...]

    @property
    def units(self) -> int:
        return round(2 * math.pi / self.gamma) * 2 ** self.q_max

    @property
    def unit_angle(self) -> float:
        return self.gamma / 2 ** self.q_max

    @property
    def num_sectors(self) -> int:
        return len(self.boundaries)

    @property
    def num_edges(self) -> int:
        return len(self._table[0])

    def sector_span(self, j: int) -> int:
        return 2 ** (self.q_max - self.depths[j] + 1)

    def sector_angle(self, j: int) -> float:
        return self.sector_span(j) * self.unit_angle

    def sector_edges(self, j: int) -> tuple[int, int]:
        """Indices of the edges opening and closing sector ``j``."""
        return self._table[1][j], self._table[2][j]

    @cached_property
    def _table(self):
        # (boundary, depth) per edge; first and last edge of each sector
        n, d = self.num_sectors, self.depths
        edges, first, last = [], [0] * n, [0] * n
        for j in range(n):
            prev = (j - 1) % n
            if d[prev] != d[j]:
                last[prev] = len(edges)
                edges.append((j, d[prev]))
            else:
                last[prev] = len(edges)
            first[j] = len(edges)
            edges.append((j, d[j]))
        return edges, first, last

    @cached_property
    def edge_boundaries(self) -> np.ndarray:
        return np.array([b for b, _ in self._table[0]], dtype=int)

    @cached_property
    def edge_depths(self) -> np.ndarray:
        """Depth of the sector(s) each edge belongs to."""
        return np.array([p for _, p in self._table[0]], dtype=int)

    def owners(self, e: int) -> list[int]:
        """Sectors having edge ``e`` as an endpoint (one or two)."""
        _, first, last = self._table
        return sorted({j for j in range(self.num_sectors) if first[j] == e or last[j] == e})

    @cached_property
    def angles(self) -> np.ndarray:
        b = np.array(self.boundaries, dtype=float)
        return b[self.edge_boundaries] * self.unit_angle

    @cached_property
    def lengths(self) -> np.ndarray:
        table = {p: edge_length(p, self.gamma, self.q_max) for p in set(self.edge_depths.tolist())}
        return np.array([table[p] for p in self.edge_depths.tolist()])

    @cached_property
    def directions(self) -> np.ndarray:
        """Unit edge directions in the tangent plane, shape (k, 2)."""
        return np.column_stack([np.cos(self.angles), np.sin(self.angles)])

    @cached_property
    def motion_scale(self) -> np.ndarray:
        """Per-edge factor turning summed unit weights into a motion estimate.

        ``cos`` of the half angle of the edge's own sector, equal to
        ``l_{p+1} / l_p``.  The estimate never exceeds the true magnitude
        and is exact on every sector bisector.
        """
        return np.array([math.cos(self.gamma / 2 ** int(p)) for p in self.edge_depths])

    @property
    def edges(self) -> list[FrictionEdge]:
        return [FrictionEdge(float(a), float(l), int(p))
                for a, l, p in zip(self.angles, self.lengths, self.edge_depths)]

    def find_sector(self, start: int) -> int:
        return self.boundaries.index(start)

    def dump(self) -> str:
        return "\n".join(f"{math.degrees(e.angle):.6f} {e.length:.9f} {e.depth}"
                         for e in self.edges)

    def containment_margin(self) -> float:
        """Smallest distance from the origin to a sector's tip chord, minus 1."""
        tips = self.directions * self.lengths[:, None]
        idx = np.array([self.sector_edges(j) for j in range(self.num_sectors)])
        a, b = tips[idx[:, 0]], tips[idx[:, 1]]
        cross = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
        return float(np.min(cross / np.linalg.norm(b - a, axis=1)) - 1.0)


def init_cone(gamma: float = math.pi / 2, q_max: int = 9) -> FrictionConeState:
    """Uniform cone with ``2 pi / gamma`` edges of length ``l_1``."""
    if q_max < 0:
        raise ValueError("q_max must be >= 0")
    n0 = 2 * math.pi / gamma
    if abs(n0 - round(n0)) > 1e-9 or round(n0) < 3:
        raise ValueError(f"gamma = {gamma} must divide 2 pi into at least 3 sectors")
    n0 = round(n0)
    step = 2 ** q_max
    return FrictionConeState(gamma, q_max, tuple(i * step for i in range(n0)), (1,) * n0)


def uniform_cone(gamma: float, q_max: int, depth: int) -> FrictionConeState:
    """Cone refined everywhere to ``depth`` (a full-resolution encoding)."""
    cone = init_cone(gamma, q_max)
    if not 1 <= depth <= q_max + 1:
        raise ValueError("depth out of range")
    span = 2 ** (q_max - depth + 1)
    k = cone.units // span
    return FrictionConeState(gamma, q_max, tuple(i * span for i in range(k)), (depth,) * k)


def refine_sector(cone: FrictionConeState, sector_index: int) -> FrictionConeState:
    """Bisect one sector; its two halves get the next depth."""
    depth = cone.depths[sector_index]
    if depth >= cone.q_max + 1:
        raise SectorAtMaxDepth(f"sector {sector_index} is already at depth {depth}")
    start = cone.boundaries[sector_index]
    mid = start + cone.sector_span(sector_index) // 2
    b = list(cone.boundaries)
    d = list(cone.depths)
    b.insert(sector_index + 1, mid)
    d[sector_index] = depth + 1
    d.insert(sector_index + 1, depth + 1)
    return FrictionConeState(cone.gamma, cone.q_max, tuple(b), tuple(d))


def support_edges(weights, tol: float = 1e-9) -> list[int]:
    w = np.asarray(weights, dtype=float)
    scale = max(1.0, float(np.abs(w).max(initial=0.0)))
    return [int(i) for i in np.flatnonzero(w > tol * scale)]


def _pair_sector(cone: FrictionConeState, a: int, b: int) -> int | None:
    """Sector opened by edge ``a`` and closed by ``b``, if any."""
    for j in cone.owners(a):
        if cone.sector_edges(j) == (a, b):
            return j
    return None


def _coarsest(cone: FrictionConeState, sectors) -> int:
    # coarser first, then lower start angle
    return min(sectors, key=lambda j: (cone.depths[j], cone.boundaries[j]))


def _ordered_pair(cone: FrictionConeState, support: list[int]) -> tuple[int, int]:
    k = cone.num_edges
    a, b = support
    if b == a + 1:
        return a, b
    if a == 0 and b == k - 1:
        return b, a
    raise ValueError(f"weights on edges {support} are not adjacent")


def active_sector(cone: FrictionConeState, weights, tol: float = 1e-9):
    """Sector spanned by the nonzero weights and its angle.

    Returns ``None`` when every weight is zero.  Weights confined to one
    direction (a single edge, or the two copies of a split edge) select
    the coarsest sector owning those edges, ties going to the one that
    starts at the lower angle.
    """
    support = support_edges(weights, tol)
    if not support:
        return None
    if len(support) > 2:
        raise ValueError(f"{len(support)} nonzero weights violate the SOS2 pattern")
    if len(support) == 2:
        j = _pair_sector(cone, *_ordered_pair(cone, support))
        if j is None:
            j = _coarsest(cone, {o for e in support for o in cone.owners(e)})
    else:
        j = _coarsest(cone, cone.owners(support[0]))
    return j, cone.sector_angle(j)


def sectors_to_refine(cone: FrictionConeState, support: list[int]) -> list[int]:
    """Sectors whose bisection tightens the relaxation around ``support``.

    Two edges closing a sector: that sector.  Otherwise the weights lie
    along one direction, and every sector owning an active edge is split
    so that direction ends up on shorter edges.
    """
    top = cone.q_max + 1
    if not support:
        return []
    cand = None
    if len(support) == 2:
        j = _pair_sector(cone, *_ordered_pair(cone, support))
        if j is not None:
            cand = [j]
    if cand is None:
        cand = sorted({o for e in support for o in cone.owners(e)})
    return [s for s in cand if cone.depths[s] < top]


def refine_many(cone: FrictionConeState, sectors: list[int]) -> FrictionConeState:
    starts = [cone.boundaries[s] for s in sectors]
    for start in starts:
        cone = refine_sector(cone, cone.find_sector(start))
    return cone
