"""Greedy covers, mutual covers and psi-approximating pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Mapping

from .errors import ConsistencyError, ParameterError, ValidationError
from .graph import MidLayerGraph, from_mask, is_two_linked, iter_bits, to_mask
from .util import popcount

MAX_REPAIR_ROUNDS = 10_000


# ------------------------------------------------------------ greedy cover


@dataclass(frozen=True)
class CoverResult:
    cover: tuple
    bound: float
    a: int
    b: int

    def as_dict(self) -> dict:
        return {
            "cover": list(self.cover),
            "size": len(self.cover),
            "bound": self.bound,
            "a": self.a,
            "b": self.b,
            "asserted": {"size_le_bound": len(self.cover) <= self.bound},
        }


def lovasz_stein_bound(q_size: int, a: int, b: int) -> float:
    if a <= 0:
        raise ValidationError("minimum degree a must be positive")
    return q_size / a * (1 + math.log(b)) if b > 0 else 0.0


def greedy_cover(
    P: Iterable[Hashable],
    Q: Iterable[Hashable],
    adjacency: Mapping[Hashable, Iterable[Hashable]],
    a: int | None = None,
    b: int | None = None,
) -> CoverResult:
    """Pick Q' from Q covering P, each step taking the largest new coverage.

    ``adjacency`` maps each element of Q to its neighbors in P. Ties go to the
    smallest element. The Lovasz-Stein bound (|Q|/a)(1 + ln b) is asserted.
    """
    P = sorted(set(P))
    Q = sorted(set(Q))
    pset = set(P)
    nbrs = {v: set(adjacency.get(v, ())) & pset for v in Q}
    deg_p = {u: 0 for u in P}
    for v in Q:
        for u in nbrs[v]:
            deg_p[u] += 1
    min_p = min(deg_p.values(), default=0)
    max_q = max((len(s) for s in nbrs.values()), default=0)
    a = min_p if a is None else a
    b = max_q if b is None else b
    if P and min_p < a:
        raise ValidationError(f"some vertex of P has {min_p} < a = {a} neighbors")
    if max_q > b:
        raise ValidationError(f"some vertex of Q has {max_q} > b = {b} neighbors")
    if not P:
        return CoverResult((), 0.0, a, b)
    if a <= 0:
        raise ValidationError("P has a vertex with no neighbor in Q")

    uncovered = set(P)
    chosen = []
    while uncovered:
        best = max(Q, key=lambda v: (len(nbrs[v] & uncovered), _neg_key(v)))
        gain = nbrs[best] & uncovered
        if not gain:  # unreachable when a > 0
            raise ConsistencyError("greedy cover stalled")
        chosen.append(best)
        uncovered -= gain
    bound = lovasz_stein_bound(len(Q), a, b)
    if len(chosen) > bound + 1e-9:
        raise ConsistencyError(f"greedy cover of size {len(chosen)} exceeds bound {bound}")
    return CoverResult(tuple(chosen), bound, a, b)


class _neg_key:
    """Reverses ordering so that max() prefers the smallest element on ties."""

    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __lt__(self, other):
        return other.v < self.v

    def __eq__(self, other):
        return self.v == other.v


# ------------------------------------------------------------ mutual cover


@dataclass(frozen=True)
class MutualCoverReport:
    X: frozenset[int]
    Y: frozenset[int]
    bound: float
    covers: bool  # X within N(Y)
    inside: bool  # Y within N(X)
    four_linked: bool | None  # None when X is not 2-linked

    def as_dict(self) -> dict:
        return {
            "X": sorted(self.X),
            "Y": sorted(self.Y),
            "size": len(self.Y),
            "bound": self.bound,
            "asserted": {
                "X_subset_N_Y": self.covers,
                "Y_subset_N_X": self.inside,
                "size_le_bound": len(self.Y) <= self.bound + 1e-9,
            },
            "reported": {"Y_four_linked": self.four_linked},
        }


def power_ball(g: MidLayerGraph, v: int, r: int) -> int:
    """Closed ball of radius r around v, as a mask."""
    ball = 1 << v
    frontier = ball
    for _ in range(r):
        grow = 0
        for u in iter_bits(frontier):
            grow |= g.nbr_mask[u]
        frontier = grow & ~ball
        ball |= grow
    return ball


def is_k_linked(g: MidLayerGraph, mask: int, k: int) -> bool:
    """Whether the k-th power of the graph induces a connected subgraph on mask."""
    if not mask:
        return True
    start = mask & -mask
    seen = start
    todo = start
    while todo:
        low = todo & -todo
        todo ^= low
        grow = power_ball(g, low.bit_length() - 1, k) & mask & ~seen
        seen |= grow
        todo |= grow
    return seen == mask


def mutual_cover(g: MidLayerGraph, X: Iterable[int]) -> MutualCoverReport:
    """A set Y with X within N(Y) and Y within N(X), of size at most (|N(X)|/d)(1 + ln d).

    Each layer part X_i is covered greedily from N(X_i); every pick lies in
    N(X_i), so the cover is already mutual, and redundant picks are pruned.
    """
    X = frozenset(X)
    xm = to_mask(X)
    ym = 0
    for layer_mask in (g.lower_mask, g.upper_mask):
        xi = xm & layer_mask
        if not xi:
            continue
        nx = g.neighborhood_mask(xi)
        adj = {v: [u for u in g.neighbors[v] if xi >> u & 1] for v in iter_bits(nx)}
        res = greedy_cover(list(iter_bits(xi)), list(iter_bits(nx)), adj, a=g.d, b=g.d)
        yi = to_mask(res.cover)
        # prune: drop picks whose removal keeps X_i covered
        for v in sorted(res.cover, reverse=True):
            rest = yi & ~(1 << v)
            if xi & ~g.neighborhood_mask(rest) == 0:
                yi = rest
        ym |= yi
    nxm = g.neighborhood_mask(xm)
    bound = popcount(nxm) / g.d * (1 + math.log(g.d))
    covers = xm & ~g.neighborhood_mask(ym) == 0
    inside = ym & ~nxm == 0
    if not (covers and inside) or len(from_mask(ym)) > bound + 1e-9:
        raise ConsistencyError("mutual cover failed its defining checks")
    linked = is_k_linked(g, ym, 4) if X and is_two_linked(g, X) else None
    return MutualCoverReport(X, from_mask(ym), bound, covers, inside, linked)


# ------------------------------------------------------ approximating pairs


@dataclass(frozen=True)
class ApproxPair:
    F: frozenset[int]
    S: frozenset[int]
    psi: int
    X: frozenset[int]

    def as_dict(self) -> dict:
        return {"F": sorted(self.F), "S": sorted(self.S), "psi": self.psi, "X": sorted(self.X)}


def pair_from_json(obj: Mapping) -> ApproxPair:
    try:
        return ApproxPair(frozenset(obj["F"]), frozenset(obj["S"]), int(obj["psi"]), frozenset(obj.get("X", ())))
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed approximating pair: {exc}") from exc


def _check_psi(g: MidLayerGraph, psi: int) -> None:
    if psi < 0 or 2 * psi > g.d:
        raise ParameterError(f"psi must satisfy 0 <= psi <= d/2 (got {psi} with d={g.d})")


def _conditions(g: MidLayerGraph, fm: int, sm: int, xm: int, psi: int) -> dict[str, bool]:
    c1 = fm & ~g.neighborhood_mask(xm) == 0 and xm & ~sm == 0
    c2 = all(popcount(g.nbr_mask[u] & ~fm) <= psi for u in iter_bits(sm))
    c3 = all(popcount(g.nbr_mask[v] & sm) <= psi for v in iter_bits(g.all_mask & ~fm))
    return {"approx1": c1, "approx2": c2, "approx3": c3}


def verify_approx_pair(g: MidLayerGraph, pair: ApproxPair) -> dict:
    """Check the three pair conditions, on the pair and on its two layer restrictions.

    The layer restrictions are (F cap L_d, S cap L_{d-1}) for X_1 = X cap L_{d-1}
    and (F cap L_{d-1}, S cap L_d) for X_2 = X cap L_d. For each, the gap
    |S_i| <= |F_i| + 2 |N(X_i)| psi / (d - psi) is checked exactly.
    """
    _check_psi(g, pair.psi)
    for name, s in (("F", pair.F), ("S", pair.S), ("X", pair.X)):
        if any(not 0 <= v < g.N for v in s):
            raise ValidationError(f"{name} contains a vertex outside 0..{g.N - 1}")
    fm, sm, xm = to_mask(pair.F), to_mask(pair.S), to_mask(pair.X)
    full = _conditions(g, fm, sm, xm, pair.psi)
    layers = []
    for i, (xl, fl) in enumerate(((g.lower_mask, g.upper_mask), (g.upper_mask, g.lower_mask)), start=1):
        xi, fi, si = xm & xl, fm & fl, sm & xl
        conds = _conditions(g, fi, si, xi, pair.psi)
        gap_rhs = popcount(fi) + Fraction(2 * popcount(g.neighborhood_mask(xi)) * pair.psi, g.d - pair.psi)
        conds["sf_gap"] = popcount(si) <= gap_rhs
        layers.append({"i": i, "F_size": popcount(fi), "S_size": popcount(si), "gap_bound": str(gap_rhs), **conds})
    valid = all(full.values())
    layer_ok = all(all(v for k, v in L.items() if k in ("approx1", "approx2", "approx3", "sf_gap")) for L in layers)
    return {
        "psi": pair.psi,
        "full": full,
        "layers": layers,
        "valid": valid,
        "layers_valid": layer_ok,
        "consistent": (not valid) or layer_ok,
    }


@dataclass(frozen=True)
class ConstructResult:
    pair: ApproxPair | None
    rounds: int
    reason: str | None = None

    def as_dict(self) -> dict:
        out = {"ok": self.pair is not None, "rounds": self.rounds}
        if self.pair is not None:
            out["pair"] = self.pair.as_dict()
        else:
            out["reason"] = self.reason
        return out


def construct_approx_pair(g: MidLayerGraph, X: Iterable[int], psi: int, max_rounds: int = MAX_REPAIR_ROUNDS) -> ConstructResult:
    """Heuristic fixed-point search for a psi-approximating pair of X.

    Start from F = {v in N(X): d_X(v) > psi}. Repeat until stable: put N(u)
    back into F for any u in X with more than psi neighbors outside F; take
    S = X plus every non-banned u with at most psi neighbors outside F; for
    any v outside F with more than psi neighbors in S, add v to F if v is in
    N(X), otherwise ban its S-neighbors outside X. F and the ban list only
    grow, so the loop terminates. The output is verified before returning.
    """
    _check_psi(g, psi)
    X = frozenset(X)
    xm = to_mask(X)
    nx = g.neighborhood_mask(xm)
    fm = 0
    for v in iter_bits(nx):
        if popcount(g.nbr_mask[v] & xm) > psi:
            fm |= 1 << v
    banned = 0
    rounds = 0
    while True:
        rounds += 1
        if rounds > max_rounds:
            return ConstructResult(None, rounds, "iteration cap reached")
        changed = False
        for u in iter_bits(xm):
            if popcount(g.nbr_mask[u] & ~fm) > psi:
                fm |= g.nbr_mask[u]
                changed = True
        sm = xm
        for u in iter_bits(g.all_mask & ~xm & ~banned):
            if popcount(g.nbr_mask[u] & ~fm) <= psi:
                sm |= 1 << u
        for v in iter_bits(g.all_mask & ~fm):
            if popcount(g.nbr_mask[v] & sm) > psi:
                if nx >> v & 1:
                    fm |= 1 << v
                else:
                    banned |= g.nbr_mask[v] & sm & ~xm
                changed = True
        if not changed:
            break
    pair = ApproxPair(from_mask(fm), from_mask(sm), psi, X)
    report = verify_approx_pair(g, pair)
    if not report["valid"]:
        return ConstructResult(None, rounds, "fixed point failed verification")
    return ConstructResult(pair, rounds)
