"""Polymers on B_d, their exact weights, and the polymer-model partition function.

A polymer is a nonempty 2-linked vertex set. Admissibility is governed by two
explicit caps (``max_size`` and ``max_boundary``; ``None`` means unbounded),
standing in for the asymptotic boundary cap of the theory.

The weight of a polymer for a principal partition (A, B) is computed locally
on its closed neighborhood: count proper colorings of gamma+ that put every
polymer vertex on the wrong side and every boundary vertex on the right side,
then divide by |A|^{|gamma+ in layer d|} |B|^{|gamma+ in layer d-1|}. The
normalization uses the exponent N/2 per side, which is what makes the capture
identity ``(|A||B|)^{N/2} * Xi = #captured colorings`` exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath

from . import kernels
from .coloring import (
    PrincipalPartition,
    brute_enumerate,
    count_list_colorings,
    enumerate_list_colorings,
    flaw_mask,
    principal_partitions,
    threshold_polymer_size,
)
from .errors import ConsistencyError, ParameterError, ResourceLimitError
from .graph import MidLayerGraph, from_mask, iter_bits, to_mask
from .util import frac_str, iv_endpoints, iv_precision, iv_str, popcount, round_str

FAMILY_CAP = 2_000_000
POLYMER_CAP = 250_000
SUBSET_MAX_N = 24


@dataclass(frozen=True)
class PolymerParams:
    max_size: int | None = None
    max_boundary: int | None = None

    def admits(self, size: int, boundary: int) -> bool:
        return (self.max_size is None or size <= self.max_size) and (
            self.max_boundary is None or boundary <= self.max_boundary
        )

    def as_dict(self) -> dict:
        return {"max_size": self.max_size, "max_boundary": self.max_boundary}


@dataclass(frozen=True, order=True)
class Polymer:
    """A 2-linked vertex set, ordered by (size, sorted vertices)."""

    size: int
    vertices: tuple[int, ...]
    mask: int = field(compare=False)
    nbhd_mask: int = field(compare=False, repr=False)  # N(gamma)
    reach_mask: int = field(compare=False, repr=False)  # closed 2-ball of gamma

    @property
    def boundary_size(self) -> int:
        """|N(gamma)|, the quantity capped by ``max_boundary``."""
        return popcount(self.nbhd_mask)

    @property
    def boundary_mask(self) -> int:
        return self.nbhd_mask & ~self.mask

    @property
    def closure_mask(self) -> int:
        return self.mask | self.nbhd_mask

    def to_json(self) -> list[int]:
        return list(self.vertices)


def make_polymer(g: MidLayerGraph, vertices: Iterable[int]) -> Polymer:
    mask = to_mask(vertices)
    if mask == 0:
        raise ParameterError("a polymer must be nonempty")
    if len(kernels.g2_components(mask, g.ball2)) != 1:
        raise ParameterError("vertex set is not 2-linked")
    reach = 0
    for v in iter_bits(mask):
        reach |= g.ball2[v]
    return Polymer(popcount(mask), tuple(iter_bits(mask)), mask, g.neighborhood_mask(mask), reach)


def polymer_adjacent(a: Polymer, b: Polymer) -> bool:
    """True iff the union is 2-linked; every polymer is adjacent to itself."""
    return bool(a.mask & b.reach_mask)


# ------------------------------------------------------------ enumeration


def _connected_sets(adj: Sequence[int], start: int, allowed: int, max_size: int, nbr_mask, max_boundary, cap: int = POLYMER_CAP):
    """Every set connected under ``adj`` that contains ``start`` and lies in ``allowed``.

    Each set is produced once: branches are split on "candidate v in" versus
    "v excluded for the rest of this branch". Sets whose neighborhood exceeds
    ``max_boundary`` are pruned together with their supersets.
    """
    out = []

    def nbhd(m):
        r = 0
        for v in iter_bits(m):
            r |= nbr_mask[v]
        return r

    def rec(cur, size, ext, forb):
        out.append(cur)
        if len(out) > cap:
            raise ResourceLimitError(f"more than {cap} polymers; lower --max-size", estimate=len(out))
        if size == max_size:
            return
        while ext:
            low = ext & -ext
            ext ^= low
            nxt = cur | low
            if max_boundary is not None and popcount(nbhd(nxt)) > max_boundary:
                forb |= low
                continue
            v = low.bit_length() - 1
            grow = adj[v] & allowed & ~nxt & ~forb & ~ext
            rec(nxt, size + 1, ext | grow, forb)
            forb |= low

    first = 1 << start
    if max_boundary is not None and popcount(nbhd(first)) > max_boundary:
        return out
    rec(first, 1, adj[start] & allowed & ~first, first)
    return out


def enumerate_polymers(
    g: MidLayerGraph, params: PolymerParams = PolymerParams(), root: int | None = None, *, cap: int = POLYMER_CAP
) -> list[Polymer]:
    """All admissible polymers (or all containing ``root``), sorted by size then vertices."""
    max_size = params.max_size if params.max_size is not None else g.N
    if max_size < 0:
        raise ParameterError("max_size must be >= 0")
    if max_size == 0:
        return []
    adj = [b & ~(1 << v) for v, b in enumerate(g.ball2)]
    masks: list[int] = []
    if root is None:
        for r in range(g.N):
            allowed = g.all_mask & ~((1 << r) - 1)
            masks.extend(_connected_sets(adj, r, allowed, max_size, g.nbr_mask, params.max_boundary, cap - len(masks)))
    else:
        masks = _connected_sets(adj, root, g.all_mask, max_size, g.nbr_mask, params.max_boundary, cap)
    return sorted(make_polymer(g, iter_bits(m)) for m in masks)


def polymer_census(polymers: Iterable[Polymer]) -> dict[int, int]:
    out: dict[int, int] = {}
    for p in polymers:
        out[p.size] = out.get(p.size, 0) + 1
    return dict(sorted(out.items()))


def shape_census(g: MidLayerGraph, polymers: Iterable[Polymer]) -> dict[tuple[int, int], int]:
    """Counts keyed by (size, number of vertices in layer d).

    At size 2 the keys (2, 0) and (2, 2) are same-layer pairs and (2, 1) are edges.
    """
    out: dict[tuple[int, int], int] = {}
    for p in polymers:
        key = (p.size, popcount(p.mask & g.upper_mask))
        out[key] = out.get(key, 0) + 1
    return dict(sorted(out.items()))


# ---------------------------------------------------------------- weights


def _local_lists(g: MidLayerGraph, mask: int, boundary: int, p: PrincipalPartition) -> dict[int, tuple[int, ...]]:
    lists = {}
    for v in iter_bits(mask):
        lists[v] = p.wrong_side(g.is_upper(v))
    for v in iter_bits(boundary):
        lists[v] = p.right_side(g.is_upper(v))
    return lists


def weight_denominator(g: MidLayerGraph, closure_mask: int, p: PrincipalPartition) -> int:
    a, b = p.sizes
    up = popcount(closure_mask & g.upper_mask)
    return a**up * b ** (popcount(closure_mask) - up)


@lru_cache(maxsize=1 << 20)
def _numerator(d: int, mask: int, A: tuple, B: tuple, backend: str | None) -> int:
    from .graph import build_graph

    g = build_graph(d)
    p = PrincipalPartition(A, B)
    boundary = g.neighborhood_mask(mask) & ~mask
    return count_list_colorings(g, _local_lists(g, mask, boundary, p), backend=backend)


def local_numerator(g: MidLayerGraph, gamma: Polymer, p: PrincipalPartition, *, backend=None) -> int:
    """|chi-hat(gamma)|: defect colorings of gamma+ with the wrong side inside gamma."""
    return _numerator(g.d, gamma.mask, p.A, p.B, backend)


def weight(g: MidLayerGraph, gamma: Polymer, p: PrincipalPartition, *, backend=None) -> Fraction:
    """Exact polymer weight computed on the closed neighborhood of gamma."""
    return Fraction(local_numerator(g, gamma, p, backend=backend), weight_denominator(g, gamma.closure_mask, p))


def local_colorings(g: MidLayerGraph, gamma: Polymer, p: PrincipalPartition) -> list[dict[int, int]]:
    """The members of chi-hat(gamma) as vertex -> color maps on gamma+."""
    return enumerate_list_colorings(g, _local_lists(g, gamma.mask, gamma.boundary_mask, p))


@lru_cache(maxsize=16)
def _flaw_histogram(d: int, A: tuple, B: tuple) -> dict[int, int]:
    from .graph import build_graph

    g = build_graph(d)
    p = PrincipalPartition(A, B)
    hist: dict[int, int] = {}
    for f in brute_enumerate(d, p.q):
        m = flaw_mask(g, f, p)
        hist[m] = hist.get(m, 0) + 1
    return hist


def flaw_histogram(g: MidLayerGraph, p: PrincipalPartition) -> dict[int, int]:
    """Flaw bitmask -> number of proper colorings with exactly that flaw (brute force)."""
    return _flaw_histogram(g.d, p.A, p.B)


def weight_global_oracle(g: MidLayerGraph, gamma: Polymer | Iterable[int], p: PrincipalPartition) -> Fraction:
    """|{f : X_{A,B}(f) = gamma}| / (|A||B|)^{N/2} by full enumeration (d <= 2)."""
    if g.d > 2:
        raise ResourceLimitError("global weight oracle needs full enumeration (d <= 2)", estimate=p.q**g.N)
    mask = gamma.mask if isinstance(gamma, Polymer) else to_mask(gamma)
    a, b = p.sizes
    return Fraction(flaw_histogram(g, p).get(mask, 0), (a * b) ** (g.N // 2))


@dataclass(frozen=True)
class WeightedPolymer:
    polymer: Polymer
    partition: PrincipalPartition
    weight: Fraction
    tilted: mpmath.ctx_iv.ivmpf

    def as_dict(self) -> dict:
        return {
            "vertices": self.polymer.to_json(),
            "size": self.polymer.size,
            "boundary_size": self.polymer.boundary_size,
            "weight": frac_str(self.weight),
            "tilted_weight": iv_str(self.tilted, 17),
        }


def tilted_weight(g: MidLayerGraph, gamma: Polymer, w: Fraction, prec: int = 113):
    """omega * exp(|gamma|/d) as a rigorous interval."""
    iv = mpmath.iv
    with iv_precision(prec):
        return iv.mpf(w.numerator) / w.denominator * iv.exp(iv.mpf(gamma.size) / g.d)


def weighted_polymers(g: MidLayerGraph, params: PolymerParams, p: PrincipalPartition, prec: int = 113) -> list[WeightedPolymer]:
    out = []
    for gamma in enumerate_polymers(g, params):
        w = weight(g, gamma, p)
        out.append(WeightedPolymer(gamma, p, w, tilted_weight(g, gamma, w, prec)))
    return out


# ------------------------------------------------------ partition function


@dataclass(frozen=True)
class PartitionFunctionResult:
    xi: Fraction
    family_count: int
    max_family_size: int  # largest sum of polymer sizes over a family
    polymer_count: int

    def as_dict(self) -> dict:
        return {
            "xi": frac_str(self.xi),
            "family_count": self.family_count,
            "max_family_size": self.max_family_size,
            "polymer_count": self.polymer_count,
        }


def conflict_masks(polymers: Sequence[Polymer]) -> list[int]:
    """Per polymer, the bitmask (over polymer positions) of polymers adjacent to it."""
    containing: dict[int, int] = {}
    for j, b in enumerate(polymers):
        for v in iter_bits(b.mask):
            containing[v] = containing.get(v, 0) | (1 << j)
    out = []
    for a in polymers:
        m = 0
        for v in iter_bits(a.reach_mask):
            m |= containing.get(v, 0)
        out.append(m)
    return out


def iter_families(polymers: Sequence[Polymer], cap: int = FAMILY_CAP):
    """Yield every independent family of H_P as a tuple of positions (DFS, deterministic)."""
    conf = conflict_masks(polymers)
    P = len(polymers)
    count = 0

    def rec(start, blocked, fam):
        nonlocal count
        count += 1
        if count > cap:
            raise ResourceLimitError(f"more than {cap} polymer families", estimate=count)
        yield fam
        for j in range(start, P):
            if not blocked >> j & 1:
                yield from rec(j + 1, blocked | conf[j], fam + (j,))

    yield from rec(0, 0, ())


def partition_function(
    g: MidLayerGraph,
    params: PolymerParams,
    p: PrincipalPartition,
    *,
    cap: int = FAMILY_CAP,
    polymers: Sequence[Polymer] | None = None,
) -> PartitionFunctionResult:
    """Xi = sum over independent families of the product of weights."""
    polymers = list(polymers) if polymers is not None else enumerate_polymers(g, params)
    w = [weight(g, x, p) for x in polymers]
    total = Fraction(0)
    count = 0
    biggest = 0
    try:
        for fam in iter_families(polymers, cap):
            count += 1
            prod = Fraction(1)
            for j in fam:
                prod *= w[j]
            total += prod
            biggest = max(biggest, sum(polymers[j].size for j in fam))
    except ResourceLimitError as exc:
        raise ResourceLimitError(
            f"{exc} (partial: {count} families, {len(polymers)} polymers)", estimate=exc.estimate
        ) from None
    return PartitionFunctionResult(total, count, biggest, len(polymers))


def partition_function_by_subsets(g: MidLayerGraph, params: PolymerParams, p: PrincipalPartition) -> Fraction:
    """Xi via the bijection between families and their unions.

    Sums, over every vertex subset X whose 2-linked components are all
    admissible, the product of the component weights. Independent of the
    family enumeration in :func:`partition_function`; feasible for N <= 24.
    """
    return Fraction(captured_by_subsets(g, params, p), ground_state_count(g, p))


def captured_by_subsets(g: MidLayerGraph, params: PolymerParams, p: PrincipalPartition) -> int:
    """Integer form of :func:`partition_function_by_subsets` scaled by (|A||B|)^{N/2}."""
    if g.N > SUBSET_MAX_N:
        raise ResourceLimitError(f"subset enumeration limited to N <= {SUBSET_MAX_N}", estimate=2**g.N)
    a, b = p.sizes
    up_all = g.upper_mask
    total = 0
    cache: dict[int, tuple[int, int] | None] = {}
    for X in range(1 << g.N):
        prod = 1
        covered = 0
        for comp in kernels.g2_components(X, g.ball2):
            entry = cache.get(comp, 0)
            if entry == 0:
                gamma = make_polymer(g, iter_bits(comp))
                if params.admits(gamma.size, gamma.boundary_size):
                    entry = (local_numerator(g, gamma, p), gamma.closure_mask)
                else:
                    entry = None
                cache[comp] = entry
            if entry is None or entry[0] == 0:
                prod = 0
                break
            prod *= entry[0]
            covered |= entry[1]
        if prod:
            up = popcount(~covered & up_all)
            total += prod * a**up * b ** (g.N - popcount(covered) - up)
    return total


def ground_state_count(g: MidLayerGraph, p: PrincipalPartition) -> int:
    a, b = p.sizes
    return (a * b) ** (g.N // 2)


def capture_count(g: MidLayerGraph, params: PolymerParams, p: PrincipalPartition, *, cap: int = FAMILY_CAP) -> int:
    """(|A||B|)^{N/2} * Xi; raises if the product is not an integer."""
    xi = partition_function(g, params, p, cap=cap).xi
    val = xi * ground_state_count(g, p)
    if val.denominator != 1:
        raise ConsistencyError(f"captured count {val} is not an integer; weights are inconsistent")
    return val.numerator


def captured_brute_force(g: MidLayerGraph, params: PolymerParams, p: PrincipalPartition) -> int:
    """Colorings whose flaw components are all admissible polymers, by enumeration (d <= 2)."""
    hist = flaw_histogram(g, p)
    total = 0
    for m, cnt in hist.items():
        ok = True
        for comp in kernels.g2_components(m, g.ball2):
            gamma = make_polymer(g, iter_bits(comp))
            if not params.admits(gamma.size, gamma.boundary_size):
                ok = False
                break
        if ok:
            total += cnt
    return total


# ------------------------------------------------------ Kotecky-Preiss sum


@dataclass(frozen=True)
class KPReport:
    vertex: int
    lower: mpmath.mpf
    upper: mpmath.mpf
    threshold: Fraction
    status: str  # "holds", "fails", "indeterminate"
    polymer_count: int

    def as_dict(self) -> dict:
        return {
            "vertex": self.vertex,
            "lhs_interval": [round_str(self.lower, 20, -1), round_str(self.upper, 20, 1)],
            "threshold": frac_str(self.threshold),
            "reported": {"inequality_lhs_le_inv_d_cubed": self.status},
            "asserted": {},
            "polymer_count": self.polymer_count,
        }


def kp_exponent(g: MidLayerGraph, gamma: Polymer, q: int, xi=1):
    """2 f(gamma) + g(gamma) with f = |gamma|/d and the two-regime g, as an interval."""
    iv = mpmath.iv
    d = g.d
    nb = gamma.boundary_size
    if nb <= d**10:
        gfun = iv.mpf(nb) / (3 * q)
    else:
        gfun = iv.mpf(xi) * nb / (4 * iv.log(d, 2) ** 2)
    return 2 * iv.mpf(gamma.size) / d + gfun


def kp_lhs(
    g: MidLayerGraph,
    params: PolymerParams,
    p: PrincipalPartition,
    v: int,
    *,
    xi=1,
    prec: int = 113,
) -> KPReport:
    """Sum over polymers containing v of omega * exp(2 f + g), as an interval, against 1/d^3."""
    iv = mpmath.iv
    polys = enumerate_polymers(g, params, root=v)
    with iv_precision(prec):
        total = iv.mpf(0)
        for gamma in polys:
            w = weight(g, gamma, p)
            if w:
                total += iv.mpf(w.numerator) / w.denominator * iv.exp(kp_exponent(g, gamma, p.q, xi))
        thr = Fraction(1, g.d**3)
        thr_iv = iv.mpf(1) / g.d**3
        if total.b <= thr_iv.a:
            status = "holds"
        elif total.a > thr_iv.b:
            status = "fails"
        else:
            status = "indeterminate"
    lo, hi = iv_endpoints(total)
    return KPReport(v, lo, hi, thr, status, len(polys))


def polymer_from_json(g: MidLayerGraph, vertices: Sequence[int]) -> Polymer:
    return make_polymer(g, vertices)


def structure_report(g: MidLayerGraph, q: int, t: int | None = None) -> dict:
    """Share of colorings whose flaw, for some principal partition, has only
    2-linked components of size < t (default T(q)), by full enumeration.

    The asserted part is bookkeeping only: for each partition the flaw
    histogram sums to the number of proper colorings.
    """
    t = threshold_polymer_size(q) if t is None else t
    parts = principal_partitions(q)
    hists = [flaw_histogram(g, p) for p in parts]
    total = len(brute_enumerate(g.d, q))
    small: set[tuple[int, ...]] = set()
    for p in parts:
        for f in brute_enumerate(g.d, q):
            comps = kernels.g2_components(flaw_mask(g, f, p), g.ball2)
            if all(popcount(c) < t for c in comps):
                small.add(f)
    return {
        "d": g.d,
        "q": q,
        "t": t,
        "total": total,
        "small_flaw": len(small),
        "fraction": frac_str(Fraction(len(small), total)),
        "asserted": {"histograms_sum_to_total": all(sum(h.values()) == total for h in hists)},
    }


def all_two_linked_subsets(g: MidLayerGraph) -> list[int]:
    """Every nonempty 2-linked subset as a bitmask, by scanning all 2^N subsets (oracle)."""
    if g.N > SUBSET_MAX_N:
        raise ResourceLimitError("subset scan limited to small N", estimate=2**g.N)
    return [X for X in range(1, 1 << g.N) if len(kernels.g2_components(X, g.ball2)) == 1]


__all__ = [
    "FAMILY_CAP",
    "POLYMER_CAP",
    "KPReport",
    "PartitionFunctionResult",
    "Polymer",
    "PolymerParams",
    "WeightedPolymer",
    "all_two_linked_subsets",
    "capture_count",
    "captured_brute_force",
    "captured_by_subsets",
    "conflict_masks",
    "enumerate_polymers",
    "flaw_histogram",
    "ground_state_count",
    "iter_families",
    "kp_exponent",
    "kp_lhs",
    "local_colorings",
    "local_numerator",
    "make_polymer",
    "partition_function",
    "partition_function_by_subsets",
    "polymer_adjacent",
    "polymer_census",
    "shape_census",
    "structure_report",
    "tilted_weight",
    "weight",
    "weight_global_oracle",
    "weighted_polymers",
]
