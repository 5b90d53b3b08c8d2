"""Cluster expansion: Ursell functions, clusters, series terms L(k), closed forms.

Clusters are ordered multisets of polymers with connected incompatibility
graph. They are enumerated as unordered multisets and weighted by the number
of distinct orderings, which is exact because the Ursell function only
depends on the isomorphism class of the incompatibility graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import mpmath

from .coloring import PrincipalPartition, count_colorings_exact, principal_partitions, threshold_polymer_size
from .errors import ParameterError, ResourceLimitError
from .graph import MidLayerGraph, build_graph
from .polymers import Polymer, PolymerParams, conflict_masks, enumerate_polymers, weight
from .util import round_str, frac_str, iv_endpoints, iv_precision

URSELL_CAP = 6
CLUSTER_K_CAP = 6
CLUSTER_CAP = 5_000_000

Edge = tuple[int, int]


# ----------------------------------------------------------------- Ursell


def _normalize(n: int, edges: Iterable[Edge]) -> tuple[int, tuple[Edge, ...]]:
    es = set()
    for u, v in edges:
        if u == v:
            continue
        if not (0 <= u < n and 0 <= v < n):
            raise ParameterError(f"edge ({u}, {v}) outside vertex range {n}")
        es.add((min(u, v), max(u, v)))
    return n, tuple(sorted(es))


def _spans_connected(n: int, edges: Sequence[Edge]) -> bool:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comps = n
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            comps -= 1
    return comps == 1


@lru_cache(maxsize=4096)
def _ursell_exhaustive(n: int, edges: tuple[Edge, ...]) -> Fraction:
    m = len(edges)
    total = 0
    for sub in range(1 << m):
        chosen = [edges[i] for i in range(m) if sub >> i & 1]
        if _spans_connected(n, chosen):
            total += -1 if len(chosen) % 2 else 1
    return Fraction(total, math.factorial(n))


def ursell(n: int, edges: Iterable[Edge], cap: int = URSELL_CAP) -> Fraction:
    """phi(H) = (1/|V|!) * sum over connected spanning subgraphs F of (-1)^{e(F)}.

    Evaluated by scanning every edge subset.
    """
    if n < 1:
        raise ParameterError("the Ursell function needs at least one vertex")
    if n > cap:
        raise ResourceLimitError(f"Ursell evaluation capped at {cap} vertices", estimate=n)
    n, es = _normalize(n, edges)
    return _ursell_exhaustive(n, es)


def ursell_recursive(n: int, edges: Iterable[Edge]) -> Fraction:
    """Same quantity by deletion-contraction on multigraphs.

    C(H) = C(H - e) - C(H / e); a loop forces C = 0 and an edgeless graph has
    C = 1 exactly when it has a single vertex.
    """
    if n < 1:
        raise ParameterError("the Ursell function needs at least one vertex")
    multi: dict[Edge, int] = {}
    for u, v in edges:
        if u != v:
            key = (min(u, v), max(u, v))
            multi[key] = 1  # simple graph input
    return Fraction(_dc(n, tuple(sorted(multi.items()))), math.factorial(n))


@lru_cache(maxsize=None)
def _dc(n: int, multi: tuple[tuple[Edge, int], ...]) -> int:
    if not multi:
        return 1 if n == 1 else 0
    (u, v), k = multi[0]
    rest = dict(multi[1:])
    # delete one copy of the edge
    deleted = dict(rest)
    if k > 1:
        deleted[(u, v)] = k - 1
    # contract it: v merges into u, remaining parallel copies become loops
    if k > 1:
        contracted_val = 0
    else:
        merged: dict[Edge, int] = {}
        for (a, b), c in rest.items():
            a2 = u if a == v else a
            b2 = u if b == v else b
            a2 = a2 - 1 if a2 > v else a2
            b2 = b2 - 1 if b2 > v else b2
            key = (min(a2, b2), max(a2, b2))
            merged[key] = merged.get(key, 0) + c
        contracted_val = _dc(n - 1, tuple(sorted(merged.items())))
    return _dc(n, tuple(sorted(deleted.items()))) - contracted_val


# --------------------------------------------------------------- clusters


@dataclass(frozen=True)
class Cluster:
    """A multiset of polymers (sorted) with its number of distinct orderings."""

    polymers: tuple[Polymer, ...]
    orderings: int
    phi: Fraction

    @property
    def size(self) -> int:
        return sum(p.size for p in self.polymers)

    def incompatibility_edges(self) -> list[Edge]:
        return _incompat_edges(self.polymers)


def _incompat_edges(polys: Sequence[Polymer]) -> list[Edge]:
    out = []
    for i in range(len(polys)):
        for j in range(i + 1, len(polys)):
            if polys[i].mask & polys[j].reach_mask:
                out.append((i, j))
    return out


def _connected_polymer_sets(conf: Sequence[int], sizes: Sequence[int], budget: int):
    """Sets of distinct polymer positions, connected in H_P, with total size <= budget."""
    P = len(sizes)
    for anchor in range(P):
        if sizes[anchor] > budget:
            continue
        allowed_floor = anchor

        def rec(cur, used, ext, forb):
            yield cur
            while ext:
                low = ext & -ext
                ext ^= low
                j = low.bit_length() - 1
                if used + sizes[j] > budget:
                    forb |= low
                    continue
                grow = conf[j] & ~((1 << allowed_floor) - 1) & ~(cur | low) & ~forb & ~ext
                yield from rec(cur | low, used + sizes[j], ext | grow, forb)
                forb |= low

        start = 1 << anchor
        ext0 = conf[anchor] & ~((1 << (anchor + 1)) - 1)
        yield from rec(start, sizes[anchor], ext0, start)


def _multiplicities(sizes: Sequence[int], target: int):
    """All m with m_i >= 1 and sum m_i * sizes_i == target."""
    if not sizes:
        if target == 0:
            yield ()
        return
    head, tail = sizes[0], sizes[1:]
    rest_min = sum(tail)
    m = 1
    while head * m + rest_min <= target:
        for tail_m in _multiplicities(tail, target - head * m):
            yield (m,) + tail_m
        m += 1


def enumerate_clusters(
    polymers: Sequence[Polymer], k: int, *, k_cap: int = CLUSTER_K_CAP, cap: int = CLUSTER_CAP
) -> list[Cluster]:
    """All clusters of total size k over the given polymer set."""
    if k < 1:
        raise ParameterError("cluster size k must be >= 1")
    if k > k_cap:
        raise ResourceLimitError(f"cluster size capped at {k_cap}", estimate=k)
    polys = [p for p in polymers if p.size <= k]
    conf = conflict_masks(polys)
    sizes = [p.size for p in polys]
    out = []
    for subset in _connected_polymer_sets(conf, sizes, k):
        idx = [j for j in range(len(polys)) if subset >> j & 1]
        for mult in _multiplicities([sizes[j] for j in idx], k):
            members: list[Polymer] = []
            for j, m in zip(idx, mult):
                members.extend([polys[j]] * m)
            total = sum(mult)
            orderings = math.factorial(total)
            for m in mult:
                orderings //= math.factorial(m)
            out.append(Cluster(tuple(members), orderings, ursell(total, _incompat_edges(members), cap=max(URSELL_CAP, total))))
            if len(out) > cap:
                raise ResourceLimitError(f"more than {cap} clusters of size {k}", estimate=len(out))
    return out


@dataclass(frozen=True)
class SeriesTerm:
    k: int
    value: Fraction
    cluster_count: int  # ordered clusters

    def as_dict(self) -> dict:
        return {"k": self.k, "L_k": frac_str(self.value), "cluster_count": self.cluster_count}


def cluster_sum(g: MidLayerGraph, clusters: Iterable[Cluster], p: PrincipalPartition) -> Fraction:
    total = Fraction(0)
    for c in clusters:
        prod = Fraction(c.orderings) * c.phi
        for gamma in c.polymers:
            prod *= weight(g, gamma, p)
            if not prod:
                break
        total += prod
    return total


def series_term(
    g: MidLayerGraph,
    params: PolymerParams,
    p: PrincipalPartition,
    k: int,
    *,
    polymers: Sequence[Polymer] | None = None,
) -> SeriesTerm:
    """L_{A,B}(k): the sum of cluster weights over clusters of total size k."""
    if polymers is None:
        cap = k if params.max_size is None else min(k, params.max_size)
        polymers = enumerate_polymers(g, PolymerParams(cap, params.max_boundary))
    clusters = enumerate_clusters(polymers, k)
    return SeriesTerm(k, cluster_sum(g, clusters, p), sum(c.orderings for c in clusters))


# ------------------------------------------------------------ closed forms


def _sides(q: int) -> tuple[int, int]:
    if q < 3:
        raise ParameterError("closed forms need q >= 3")
    return q // 2, q - q // 2


def closed_form_L1(d: int, q: int) -> Fraction:
    """L(1) for a principal partition, exact; equals N(1 - 2/q)^d for even q."""
    a, b = _sides(q)
    N = 2 * math.comb(2 * d - 1, d)
    up = Fraction(b * (b - 1) ** d, a * b**d)
    low = Fraction(a * (a - 1) ** d, b * a**d)
    return Fraction(N, 2) * (up + low)


def closed_form_L2(d: int, q: int) -> Fraction:
    """L(2) for a principal partition, exact.

    Contributions: ordered pairs of 2-linked singletons (phi = -1/2), and
    single polymers of size 2 (same-layer pairs with a common neighbor, and
    edges). For even q this reduces to N x^{2d} (d x^{-2}/2 - d/2 - 1/2)
    with x = 1 - 2/q.
    """
    a, b = _sides(q)
    N = 2 * math.comb(2 * d - 1, d)
    half = Fraction(N, 2)
    s_up = Fraction(b * (b - 1) ** d, a * b**d)
    s_low = Fraction(a * (a - 1) ** d, b * a**d)

    def pair(w, r):  # two wrong-side vertices with one shared neighbor
        num = w * (w - 1) ** (2 * d - 1) + w * (w - 1) * (w - 2) * (w - 1) ** (2 * d - 2)
        return Fraction(num, r**2 * w ** (2 * d - 1))

    edge = Fraction(a * b * (a - 1) ** (d - 1) * (b - 1) ** (d - 1), a**d * b**d)
    singles = half * (1 + d * (d - 1)) * (s_up**2 + s_low**2) + N * d * s_up * s_low
    return -singles / 2 + half * math.comb(d, 2) * (pair(b, a) + pair(a, b)) + Fraction(N * d, 2) * edge


def f_closed_form(q: int, d: int) -> Fraction:
    """f(q, d) = N x^d + N x^{2d} (d x^{-2} - d - 1)/2 with x = 1 - 2/q."""
    if q < 3:
        raise ParameterError("f(q, d) needs q >= 3")
    x = 1 - Fraction(2, q)
    N = 2 * math.comb(2 * d - 1, d)
    return N * x**d + N * x ** (2 * d) * Fraction(1, 2) * (d / x**2 - d - 1)


def even_q_L1(d: int, q: int) -> Fraction:
    N = 2 * math.comb(2 * d - 1, d)
    return N * (1 - Fraction(2, q)) ** d


def even_q_L2(d: int, q: int) -> Fraction:
    N = 2 * math.comb(2 * d - 1, d)
    x = 1 - Fraction(2, q)
    return N * x ** (2 * d) * (Fraction(d, 2) / x**2 - Fraction(d, 2) - Fraction(1, 2))


def delta(q: int) -> Fraction:
    """1 - 1/ceil(q/2)."""
    return 1 - Fraction(1, q - q // 2)


# ------------------------------------------------------- counting formulas


@dataclass(frozen=True)
class ApproxReport:
    d: int
    q: int
    t: int
    exponent: Fraction
    terms: tuple[Fraction, ...]
    partitions: int
    value: mpmath.mpf
    interval: tuple[mpmath.mpf, mpmath.mpf]
    eps_magnitude: mpmath.mpf
    eps_constant: float

    def as_dict(self) -> dict:
        return {
            "d": self.d,
            "q": self.q,
            "t": self.t,
            "exponent": frac_str(self.exponent),
            "L": {str(k + 1): frac_str(v) for k, v in enumerate(self.terms)},
            "partitions": self.partitions,
            "value": round_str(self.value, 30),
            "value_interval": [round_str(self.interval[0], 30, -1), round_str(self.interval[1], 30, 1)],
            "reported": {
                "eps_bound": round_str(self.eps_magnitude, 15),
                "eps_constant": self.eps_constant,
            },
            "asserted": {},
        }


def series_value(d: int, q: int, k: int, params: PolymerParams = PolymerParams()) -> Fraction:
    """L(k) for the smallest principal partition; closed forms for k <= 2 when uncapped."""
    if params == PolymerParams() and k == 1:
        return closed_form_L1(d, q)
    if params == PolymerParams() and k == 2:
        return closed_form_L2(d, q)
    g = build_graph(d)
    return series_term(g, params, principal_partitions(q)[0], k).value


def approx_count(d: int, q: int, t: int, *, eps_constant: float = 1.0, prec: int = 128) -> ApproxReport:
    """(|A||B|)^{N/2} * #partitions * exp(L(1) + ... + L(t-1)).

    The error term magnitude C * N d^{2(t-1)} delta^{dt} is reported with the
    caller's constant C; it is never folded into a tolerance.
    """
    if t < 1:
        raise ParameterError("truncation t must be >= 1")
    a, b = _sides(q)
    N = 2 * math.comb(2 * d - 1, d)
    terms = tuple(series_value(d, q, k) for k in range(1, t))
    exponent = sum(terms, Fraction(0))
    parts = len(principal_partitions(q))
    base = (a * b) ** (N // 2) * parts
    with mpmath.workprec(prec):
        val = base * mpmath.exp(mpmath.mpf(exponent.numerator) / exponent.denominator)
        dl = delta(q)
        eps = eps_constant * N * mpmath.mpf(d) ** (2 * (t - 1)) * (mpmath.mpf(dl.numerator) / dl.denominator) ** (d * t)
        val = +val
    with iv_precision(prec) as iv:
        ival = iv.mpf(base) * iv.exp(iv.mpf(exponent.numerator) / exponent.denominator)
    lo, hi = iv_endpoints(ival)
    return ApproxReport(d, q, t, exponent, terms, parts, val, (lo, hi), eps, eps_constant)


def direct_approx_value(d: int, q: int, prec: int = 128) -> mpmath.mpf:
    """(q/2)^N * C(q, q/2) * exp(f(q, d)), evaluated directly from the formula (even q)."""
    if q % 2:
        raise ParameterError("the closed count formula is stated for even q")
    N = 2 * math.comb(2 * d - 1, d)
    with mpmath.workprec(prec):
        x = 1 - mpmath.mpf(2) / q
        f = N * x**d + N * x ** (2 * d) * (d * x**-2 - d - 1) / 2
        return +(mpmath.mpf(q // 2) ** N * math.comb(q, q // 2) * mpmath.exp(f))


def compare_with_exact(d: int, q: int, t: int | None = None, prec: int = 128) -> dict:
    """Signed relative error of approx_count against the exact count (report only)."""
    t = t if t is not None else threshold_polymer_size(q)
    rep = approx_count(d, q, t, prec=prec)
    exact = count_colorings_exact(d, q)
    with mpmath.workprec(prec):
        rel = (rep.value - exact) / exact
    return {
        "d": d,
        "q": q,
        "t": t,
        "exact": str(exact),
        "approx": round_str(rep.value, 30),
        "reported": {"relative_error": round_str(rel, 15)},
        "asserted": {},
    }


# --------------------------------------------------------- formal log


def family_polynomial(polymers: Sequence[Polymer], weights: Sequence[Fraction], K: int) -> list[Fraction]:
    """Coefficients of Xi(z) = sum_Lambda z^{|Lambda|} prod omega, truncated at degree K."""
    conf = conflict_masks(polymers)
    coeffs = [Fraction(0)] * (K + 1)
    P = len(polymers)

    def rec(start, blocked, size, prod):
        coeffs[size] += prod
        for j in range(start, P):
            s = size + polymers[j].size
            if s <= K and not blocked >> j & 1 and weights[j]:
                rec(j + 1, blocked | conf[j], s, prod * weights[j])

    rec(0, 0, 0, Fraction(1))
    return coeffs


def series_log(coeffs: Sequence[Fraction], K: int) -> list[Fraction]:
    """Coefficients of log(F(z)) up to z^K for F with F(0) = 1."""
    if coeffs[0] != 1:
        raise ParameterError("formal log needs constant term 1")
    p = list(coeffs) + [Fraction(0)] * (K + 1 - len(coeffs))
    g = [Fraction(0)] * (K + 1)
    for k in range(1, K + 1):
        acc = k * p[k]
        for j in range(1, k):
            acc -= j * g[j] * p[k - j]
        g[k] = acc / k
    return g


def formal_log_check(g: MidLayerGraph, polymers: Sequence[Polymer], p: PrincipalPartition, K: int) -> dict:
    """Compare the z^k coefficients of log Xi(z) with cluster sums L(k), k = 1..K."""
    weights = [weight(g, x, p) for x in polymers]
    logc = series_log(family_polynomial(polymers, weights, K), K)
    rows = []
    for k in range(1, K + 1):
        term = series_term(g, PolymerParams(), p, k, polymers=[x for x in polymers if x.size <= k])
        rows.append(
            {"k": k, "log_coefficient": frac_str(logc[k]), "L_k": frac_str(term.value), "match": logc[k] == term.value}
        )
    return {"K": K, "terms": rows, "all_match": all(r["match"] for r in rows)}


def term_bound_check(d: int, q: int, t: int, params: PolymerParams = PolymerParams()) -> dict:
    """|L(k)| / (N d^{2(k-1)} delta^{dk}) for k = 1..t (diagnostic only)."""
    N = 2 * math.comb(2 * d - 1, d)
    dl = delta(q)
    rows = []
    for k in range(1, t + 1):
        L = series_value(d, q, k, params)
        scale = N * Fraction(d) ** (2 * (k - 1)) * dl ** (d * k)
        rows.append({"k": k, "L_k": frac_str(L), "scale": frac_str(scale), "ratio": float(abs(L) / scale)})
    return {"d": d, "q": q, "delta": frac_str(dl), "reported": {"ratios": rows}, "asserted": {}}
