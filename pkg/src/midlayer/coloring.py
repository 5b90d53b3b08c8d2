"""Colorings of B_d: principal partitions, flaws, balancedness, exact counting."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from . import kernels
from .errors import ParameterError, ResourceLimitError, ValidationError
from .graph import MAX_ENUM_D, MidLayerGraph, build_graph, from_mask, to_mask

DP_STATE_CAP = 50_000_000
BRUTE_MAX_D = 2


@dataclass(frozen=True, order=True)
class PrincipalPartition:
    """Ordered split (A, B) of the colors 1..q; A colors layer d, B colors layer d-1."""

    A: tuple[int, ...]
    B: tuple[int, ...]

    def __post_init__(self):
        q = len(self.A) + len(self.B)
        if set(self.A) & set(self.B) or set(self.A) | set(self.B) != set(range(1, q + 1)):
            raise ValidationError(f"{self.A}, {self.B} is not a partition of 1..{q}")
        if sorted((len(self.A), len(self.B))) != [q // 2, q - q // 2]:
            raise ValidationError(f"part sizes {len(self.A)}, {len(self.B)} are not principal for q={q}")

    @property
    def q(self) -> int:
        return len(self.A) + len(self.B)

    @property
    def sizes(self) -> tuple[int, int]:
        return len(self.A), len(self.B)

    def swapped(self) -> "PrincipalPartition":
        return PrincipalPartition(self.B, self.A)

    def right_side(self, upper: bool) -> tuple[int, ...]:
        return self.A if upper else self.B

    def wrong_side(self, upper: bool) -> tuple[int, ...]:
        return self.B if upper else self.A

    def as_dict(self) -> dict:
        return {"A": list(self.A), "B": list(self.B)}


def principal_partitions(q: int) -> list[PrincipalPartition]:
    """All ordered principal partitions of 1..q, sorted by (A, B)."""
    if q < 2:
        raise ParameterError("q must be >= 2")
    colors = range(1, q + 1)
    out = set()
    for size in {q // 2, q - q // 2}:
        for A in combinations(colors, size):
            B = tuple(c for c in colors if c not in A)
            out.add(PrincipalPartition(A, B))
    return sorted(out)


def check_coloring(g: MidLayerGraph, f: Sequence[int], q: int | None = None) -> tuple[int, ...]:
    f = tuple(f)
    if len(f) != g.N:
        raise ValidationError(f"coloring has {len(f)} entries, graph has {g.N} vertices")
    if q is not None and any(not (1 <= c <= q) for c in f):
        raise ValidationError(f"colors must lie in 1..{q}")
    for u, v in g.edges():
        if f[u] == f[v]:
            raise ValidationError(f"coloring is improper on edge ({u}, {v})")
    return f


def is_proper(g: MidLayerGraph, f: Sequence[int]) -> bool:
    return len(f) == g.N and all(f[u] != f[v] for u, v in g.edges())


def ground_state(g: MidLayerGraph, p: PrincipalPartition, pick=None) -> tuple[int, ...]:
    """A coloring with empty flaw. ``pick(v, side)`` chooses from the side; default cycles."""
    out = []
    for v in range(g.N):
        side = p.right_side(g.is_upper(v))
        out.append(pick(v, side) if pick else side[v % len(side)])
    return tuple(out)


# ------------------------------------------------------------------ flaws


@dataclass(frozen=True)
class FlawReport:
    partition: PrincipalPartition
    flaw: frozenset[int]
    components: tuple[frozenset[int], ...]

    @property
    def max_component_size(self) -> int:
        return max((len(c) for c in self.components), default=0)

    def as_dict(self) -> dict:
        return {
            "partition": self.partition.as_dict(),
            "flaw": sorted(self.flaw),
            "flaw_size": len(self.flaw),
            "components": [sorted(c) for c in self.components],
            "max_component_size": self.max_component_size,
        }


def flaw_mask(g: MidLayerGraph, f: Sequence[int], p: PrincipalPartition) -> int:
    A = set(p.A)
    m = 0
    for v, c in enumerate(f):
        if (c in A) != g.is_upper(v):
            m |= 1 << v
    return m


def flaw(g: MidLayerGraph, f: Sequence[int], p: PrincipalPartition, *, validate: bool = True) -> FlawReport:
    """X_{A,B}(f) and its 2-linked components."""
    if validate:
        check_coloring(g, f, p.q)
    m = flaw_mask(g, f, p)
    comps = tuple(from_mask(c) for c in kernels.g2_components(m, g.ball2))
    return FlawReport(p, from_mask(m), comps)


def nearest_ground_state(g: MidLayerGraph, f: Sequence[int], q: int, *, validate: bool = True) -> FlawReport:
    """The principal partition with the smallest flaw; ties go to the smallest (A, B)."""
    if validate:
        check_coloring(g, f, q)
    best = min(principal_partitions(q), key=lambda p: (bin(flaw_mask(g, f, p)).count("1"), p))
    return flaw(g, f, best, validate=False)


def threshold_polymer_size(q: int) -> int:
    """Smallest t with 2 + t*log2(1 - 2/q) < 0.

    The inequality is equivalent to q^t > 4 (q-2)^t, which is decided in
    exact integer arithmetic.
    """
    if not isinstance(q, int) or q <= 2:
        raise ParameterError("threshold polymer size needs an integer q >= 3")
    t = 1
    while q**t <= 4 * (q - 2) ** t:
        t += 1
    return t


def balance_margins(g: MidLayerGraph, f: Sequence[int], p: PrincipalPartition) -> dict[int, Fraction]:
    """|proportion - 1/|side|| per color, A measured on layer d and B on layer d-1."""
    half = g.N // 2
    out = {}
    for side, layer in ((p.A, g.upper), (p.B, g.lower)):
        for c in side:
            share = Fraction(sum(1 for v in layer if f[v] == c), half)
            out[c] = abs(share - Fraction(1, len(side)))
    return out


def is_s_balanced(g: MidLayerGraph, f: Sequence[int], p: PrincipalPartition, s: float) -> bool:
    if not 0 <= s <= 1:
        raise ParameterError("s must lie in [0, 1]")
    s = Fraction(s)
    return all(m <= s for m in balance_margins(g, f, p).values())


# --------------------------------------------------------------- counting


@dataclass(frozen=True)
class FramePlan:
    """A vertex processing order with the bookkeeping the DP kernels need."""

    order: tuple[int, ...]
    back: list[list[int]]
    last: list[int]


def bfs_order(g: MidLayerGraph, vertices: Sequence[int]) -> list[int]:
    """BFS over the induced subgraph, restarting at the smallest unvisited vertex."""
    vs = set(vertices)
    seen: set[int] = set()
    order = []
    for start in sorted(vs):
        if start in seen:
            continue
        seen.add(start)
        queue = deque([start])
        while queue:
            u = queue.popleft()
            order.append(u)
            for w in g.neighbors[u]:
                if w in vs and w not in seen:
                    seen.add(w)
                    queue.append(w)
    return order


def frame_plan(g: MidLayerGraph, vertices: Sequence[int]) -> FramePlan:
    order = bfs_order(g, vertices)
    pos = {v: i for i, v in enumerate(order)}
    back, last = [], []
    for i, v in enumerate(order):
        nb = [pos[w] for w in g.neighbors[v] if w in pos]
        back.append(sorted(j for j in nb if j < i))
        last.append(max([i] + nb))
    return FramePlan(tuple(order), back, last)


def max_frontier_states(plan: FramePlan, sizes: Sequence[int]) -> int:
    """Largest DP table the plan will allocate, given per-position list sizes."""
    worst = 1
    for i in range(len(plan.order)):
        live = [j for j in range(i + 1) if plan.last[j] > i]
        worst = max(worst, math.prod(sizes[j] for j in live))
    return worst


def count_list_colorings(
    g: MidLayerGraph,
    lists: dict[int, Sequence[int]],
    *,
    cap: int = DP_STATE_CAP,
    backend: str | None = None,
) -> int:
    """Proper colorings of the subgraph induced on ``lists``' keys, vertex v drawing from lists[v]."""
    plan = frame_plan(g, list(lists))
    per_pos = [list(lists[v]) for v in plan.order]
    est = max_frontier_states(plan, [len(x) for x in per_pos])
    if est > cap:
        raise ResourceLimitError(f"frontier DP would need {est} states (cap {cap})", estimate=est)
    return kernels.count_list_colorings(plan.back, plan.last, per_pos, backend=backend)


def enumerate_list_colorings(g: MidLayerGraph, lists: dict[int, Sequence[int]], *, backend=None) -> list[dict[int, int]]:
    plan = frame_plan(g, list(lists))
    per_pos = [list(lists[v]) for v in plan.order]
    rows = kernels.enumerate_list_colorings(plan.back, per_pos, backend=backend)
    return [dict(zip(plan.order, row)) for row in rows]


def count_colorings_exact(d: int, q: int, *, cap: int = DP_STATE_CAP, backend: str | None = None) -> int:
    """c_q(B_d) by frontier DP over a BFS elimination order."""
    if q < 1:
        raise ParameterError("q must be >= 1")
    g = build_graph(d)
    colors = list(range(1, q + 1))
    return count_list_colorings(g, {v: colors for v in range(g.N)}, cap=cap, backend=backend)


def brute_enumerate(d: int, q: int, *, backend: str | None = None) -> list[tuple[int, ...]]:
    """Every proper q-coloring of B_d, in vertex-index order (d <= 2 only)."""
    if d > BRUTE_MAX_D:
        raise ResourceLimitError(f"brute-force enumeration is limited to d <= {BRUTE_MAX_D}", estimate=q ** build_graph(d).N)
    g = build_graph(d)
    colors = list(range(1, q + 1))
    back = [[u for u in g.neighbors[v] if u < v] for v in range(g.N)]
    return kernels.enumerate_list_colorings(back, [colors] * g.N, backend=backend)


def feasible(d: int, q: int) -> bool:
    """Whether (d, q) lies in the guaranteed exact-counting envelope."""
    return 2 <= d <= MAX_ENUM_D and 1 <= q <= 6
