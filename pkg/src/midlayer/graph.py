"""The middle-two-layers graph B_d, its rotated view, and isoperimetry helpers.

Vertices are n-bit masks (n = 2d - 1) with coordinate ``i`` stored in bit ``i``.
Inside a :class:`MidLayerGraph` every vertex also has a stable index: all of
layer d-1 first, then layer d, each layer sorted lexicographically on the
coordinate string ``(x_0, ..., x_{n-1})``. Vertex sets passed to the public
functions are iterables of indices; results are ``frozenset`` of indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from itertools import combinations
from typing import Iterable

from . import kernels
from .errors import ParameterError, ValidationError

MAX_D = 8  # structural operations
MAX_ENUM_D = 3  # full enumeration workloads


def _popcount(x: int) -> int:
    return bin(x).count("1")


def _coords(mask: int, n: int) -> tuple[int, ...]:
    return tuple((mask >> i) & 1 for i in range(n))


def to_mask(vertices: Iterable[int]) -> int:
    m = 0
    for v in vertices:
        m |= 1 << v
    return m


def from_mask(mask: int) -> frozenset[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return frozenset(out)


def iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class MidLayerGraph:
    """The graph B_d on layers d-1 and d of the n-cube.

    Immutable after construction. ``upper`` is the index set of layer d,
    ``lower`` that of layer d-1.
    """

    def __init__(self, d: int):
        if not isinstance(d, int) or d < 2 or d > MAX_D:
            raise ParameterError(f"d must be an integer in [2, {MAX_D}], got {d!r}")
        n = 2 * d - 1
        self.d = d
        self.n = n
        lower = [m for m in range(1 << n) if _popcount(m) == d - 1]
        upper = [m for m in range(1 << n) if _popcount(m) == d]
        key = lambda m: _coords(m, n)
        self.masks: tuple[int, ...] = tuple(sorted(lower, key=key) + sorted(upper, key=key))
        self.N = len(self.masks)
        self.index = {m: i for i, m in enumerate(self.masks)}
        half = self.N // 2
        self.lower = frozenset(range(half))
        self.upper = frozenset(range(half, self.N))
        nbrs = []
        for m in self.masks:
            row = [self.index[m ^ (1 << i)] for i in range(n) if (m ^ (1 << i)) in self.index]
            nbrs.append(tuple(sorted(row)))
        self.neighbors: tuple[tuple[int, ...], ...] = tuple(nbrs)
        self.nbr_mask: tuple[int, ...] = tuple(to_mask(r) for r in nbrs)

    def __repr__(self):
        return f"MidLayerGraph(d={self.d}, N={self.N})"

    def is_upper(self, v: int) -> bool:
        return v >= self.N // 2

    def weight(self, v: int) -> int:
        return self.d if self.is_upper(v) else self.d - 1

    def bits(self, v: int) -> str:
        return "".join(map(str, _coords(self.masks[v], self.n)))

    @property
    def num_edges(self) -> int:
        return sum(len(r) for r in self.neighbors) // 2

    def edges(self):
        for u, row in enumerate(self.neighbors):
            for v in row:
                if u < v:
                    yield (u, v)

    @cached_property
    def all_mask(self) -> int:
        return (1 << self.N) - 1

    @cached_property
    def upper_mask(self) -> int:
        return to_mask(self.upper)

    @cached_property
    def lower_mask(self) -> int:
        return to_mask(self.lower)

    @cached_property
    def ball2(self) -> tuple[int, ...]:
        """Closed radius-2 balls as index bitmasks (adjacency of the square graph)."""
        out = []
        for v in range(self.N):
            b = (1 << v) | self.nbr_mask[v]
            for u in self.neighbors[v]:
                b |= self.nbr_mask[u]
            out.append(b)
        return tuple(out)

    def neighborhood_mask(self, mask: int) -> int:
        out = 0
        for v in iter_bits(mask):
            out |= self.nbr_mask[v]
        return out

    def closed_mask(self, mask: int) -> int:
        return mask | self.neighborhood_mask(mask)

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            for u in self.neighbors[stack.pop()]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == self.N

    @cached_property
    def rotated(self) -> "RotatedView":
        return RotatedView(self)


@lru_cache(maxsize=None)
def build_graph(d: int) -> MidLayerGraph:
    """B_d; cached because graphs are immutable and shared freely."""
    return MidLayerGraph(d)


def _check_subset(g: MidLayerGraph, X) -> frozenset[int]:
    X = frozenset(X)
    bad = [v for v in X if not (isinstance(v, int) and 0 <= v < g.N)]
    if bad:
        raise ValidationError(f"vertex indices out of range for N={g.N}: {sorted(bad)[:5]}")
    return X


def neighborhood(g: MidLayerGraph, X) -> frozenset[int]:
    """N(X): vertices adjacent to some vertex of X."""
    X = _check_subset(g, X)
    return from_mask(g.neighborhood_mask(to_mask(X)))


def boundary(g: MidLayerGraph, X) -> frozenset[int]:
    """N(X) minus X."""
    X = _check_subset(g, X)
    return neighborhood(g, X) - X


def closed_neighborhood(g: MidLayerGraph, X) -> frozenset[int]:
    """X together with N(X)."""
    X = _check_subset(g, X)
    return X | neighborhood(g, X)


def two_linked_components(g: MidLayerGraph, X) -> list[frozenset[int]]:
    """Maximal subsets of X connected in the square of B_d, ordered by smallest index."""
    X = _check_subset(g, X)
    return [from_mask(c) for c in kernels.g2_components(to_mask(X), g.ball2)]


def is_two_linked(g: MidLayerGraph, X) -> bool:
    return len(two_linked_components(g, X)) <= 1


def _layer_of(g: MidLayerGraph, X: frozenset[int]) -> frozenset[int]:
    if X <= g.lower:
        return g.lower
    if X <= g.upper:
        return g.upper
    raise ParameterError("vertex set must lie inside a single layer")


def closure(g: MidLayerGraph, X) -> frozenset[int]:
    """[X]: vertices of X's layer whose whole neighborhood lies in N(X)."""
    X = _check_subset(g, X)
    if not X:
        return frozenset()
    layer = _layer_of(g, X)
    nx_mask = g.neighborhood_mask(to_mask(X))
    return frozenset(v for v in layer if g.nbr_mask[v] & ~nx_mask == 0)


def closure_minus(g: MidLayerGraph, X) -> frozenset[int]:
    """[X]^-: vertices whose whole neighborhood lies in [X]."""
    cl = to_mask(closure(g, X))
    if not cl:
        return frozenset()
    return frozenset(u for u in range(g.N) if g.nbr_mask[u] & ~cl == 0)


# ---------------------------------------------------------------- rotation


class RotatedView:
    """B_d seen through the rotation x -> x + (1^{d-1}, 0^d).

    ``level(v)`` sums the first n-1 rotated coordinates, ``half(v)`` is the
    last coordinate (0 for V0, 1 for V1). V* is the set of V0 vertices on
    even levels.
    """

    def __init__(self, g: MidLayerGraph):
        self.g = g
        self.shift = (1 << (g.d - 1)) - 1
        self.last_bit = 1 << (g.n - 1)
        self._rot = tuple(m ^ self.shift for m in g.masks)

    def rotate(self, v: int) -> int:
        """Rotated bitmask of vertex index ``v``."""
        return self._rot[v]

    def unrotate(self, mask: int) -> int | None:
        """Vertex index whose rotation is ``mask`` (None if not a vertex)."""
        return self.g.index.get(mask ^ self.shift)

    def level(self, v: int) -> int:
        return _popcount(self._rot[v] & ~self.last_bit)

    def half(self, v: int) -> int:
        return 1 if self._rot[v] & self.last_bit else 0

    def level_set(self, k: int, half: int | None = None) -> frozenset[int]:
        return frozenset(
            v for v in range(self.g.N) if self.level(v) == k and (half is None or self.half(v) == half)
        )

    @cached_property
    def v_star(self) -> frozenset[int]:
        return frozenset(v for v in range(self.g.N) if self.half(v) == 0 and self.level(v) % 2 == 0)

    def mate(self, v: int) -> int:
        """The V1 partner v' = v + e_n of a V* vertex."""
        if v not in self.v_star:
            raise ParameterError(f"vertex {v} is not in V* (needs even level and last coordinate 0)")
        u = self.unrotate(self._rot[v] ^ self.last_bit)
        if u is None:  # cannot happen for v in V*
            raise ParameterError(f"vertex {v} has no mate")
        return u

    def associate_w(self, v: int) -> tuple[int, tuple[int, ...]]:
        """The vertex w(v) in V* four levels below v, with a connecting path in V0.

        Among all valid (w, path) the lexicographically smallest is returned,
        comparing w first and then the path's vertex indices.
        """
        if v not in self.v_star:
            raise ParameterError(f"vertex {v} is not in V*")
        k = self.level(v)
        if k < 4:
            raise ParameterError(f"w(v) is undefined for level {k} < 4")
        best = None
        # each step must drop one level without leaving V0
        stack = [(v, (v,))]
        while stack:
            u, path = stack.pop()
            if len(path) == 5:
                if path[-1] in self.v_star:
                    cand = (path[-1], path)
                    if best is None or cand < best:
                        best = cand
                continue
            for x in self.g.neighbors[u]:
                if self.half(x) == 0 and self.level(x) == self.level(u) - 1:
                    stack.append((x, path + (x,)))
        if best is None:
            raise ParameterError(f"no length-4 descending path from vertex {v} inside V0")
        return best


def mate(view: RotatedView, v: int) -> int:
    return view.mate(v)


def associate_w(view: RotatedView, v: int) -> tuple[int, tuple[int, ...]]:
    return view.associate_w(v)


# ------------------------------------------------------------ isoperimetry


def gen_binomial(x: float, k: int) -> float:
    """C(x, k) = x(x-1)...(x-k+1)/k! for real x."""
    out = 1.0
    for i in range(k):
        out *= (x - i) / (i + 1)
    return out


@lru_cache(maxsize=4096)
def lovasz_bound(m: int, d: int, rel_tol: float = 1e-12) -> float:
    """C(x, d-1) where x >= d solves C(x, d) = m.

    Lower bound on the shadow of m d-sets (Lovász's form of Kruskal-Katona),
    hence on |N(X)| for |X| = m inside one layer of B_d.
    """
    if m < 1:
        raise ParameterError("m must be >= 1")
    if d < 1:
        raise ParameterError("d must be >= 1")
    lo = float(d)
    if m == 1:
        return gen_binomial(lo, d - 1)
    hi = lo + 1.0
    while gen_binomial(hi, d) < m:
        hi = lo + 2 * (hi - lo)
    while hi - lo > rel_tol * hi:
        mid = (lo + hi) / 2
        if gen_binomial(mid, d) < m:
            lo = mid
        else:
            hi = mid
    return gen_binomial((lo + hi) / 2, d - 1)


@dataclass(frozen=True)
class IsoperimetryReport:
    size: int
    neighborhood_size: int
    clause_i_applicable: bool
    clause_i_bound: float
    clause_i_holds: bool
    clause_ii_applicable: bool
    clause_ii_bound: float
    clause_ii_holds: bool
    lovasz_bound: float | None

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def isoperimetry_check(g: MidLayerGraph, X) -> IsoperimetryReport:
    """Compare |N(X)| with d|X| - |X|^2/2, d|X|/12 and the Lovász shadow bound.

    Clause (i) is proved for |X| <= d/4 and clause (ii) for |X| <= d^10; both
    inequalities are evaluated regardless and ``*_applicable`` records whether
    the proved range covers X.
    """
    X = _check_subset(g, X)
    if X:
        _layer_of(g, X)
    d, s = g.d, len(X)
    nb = len(neighborhood(g, X))
    b1 = d * s - s * s / 2
    b2 = d * s / 12
    return IsoperimetryReport(
        size=s,
        neighborhood_size=nb,
        clause_i_applicable=s <= d / 4,
        clause_i_bound=b1,
        clause_i_holds=nb >= b1,
        clause_ii_applicable=s <= d**10,
        clause_ii_bound=b2,
        clause_ii_holds=nb >= b2,
        lovasz_bound=lovasz_bound(s, d) if s else None,
    )


def layer_subsets(g: MidLayerGraph, layer: str, max_size: int):
    """All subsets of one layer with 1..max_size vertices (exhaustive checks)."""
    verts = sorted(g.upper if layer == "upper" else g.lower)
    for k in range(1, max_size + 1):
        yield from combinations(verts, k)


def binomial_vstar(d: int) -> int:
    return math.comb(2 * d - 2, d - 1)
