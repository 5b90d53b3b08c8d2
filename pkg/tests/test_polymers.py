from __future__ import annotations

import math
from fractions import Fraction
from itertools import combinations

import mpmath
import pytest

from midlayer.coloring import PrincipalPartition, count_colorings_exact, principal_partitions
from midlayer.errors import ParameterError, ResourceLimitError
from midlayer.graph import build_graph
from midlayer.polymers import (
    PolymerParams,
    all_two_linked_subsets,
    capture_count,
    captured_brute_force,
    captured_by_subsets,
    enumerate_polymers,
    flaw_histogram,
    ground_state_count,
    iter_families,
    kp_exponent,
    kp_lhs,
    local_colorings,
    local_numerator,
    make_polymer,
    partition_function,
    partition_function_by_subsets,
    polymer_adjacent,
    polymer_census,
    shape_census,
    tilted_weight,
    weight,
    weight_denominator,
    weight_global_oracle,
)

P4 = PrincipalPartition((1, 2), (3, 4))


def hamming_dist(g, u, v):
    return bin(g.masks[u] ^ g.masks[v]).count("1")


def naive_two_linked(g, S):
    # graph distance in B_d equals Hamming distance between the bit masks
    S = list(S)
    seen = {S[0]}
    stack = [S[0]]
    while stack:
        u = stack.pop()
        for v in S:
            if v not in seen and hamming_dist(g, u, v) <= 2:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(S)


def test_census_d3():
    g = build_graph(3)
    assert len(enumerate_polymers(g, PolymerParams(1))) == 20
    polys = enumerate_polymers(g, PolymerParams(2))
    assert polymer_census(polys) == {1: 20, 2: 90}
    shapes = shape_census(g, polys)
    assert shapes[(1, 0)] + shapes[(1, 1)] == 20
    assert shapes[(2, 0)] + shapes[(2, 2)] == 60 == g.N * math.comb(3, 2)
    assert shapes[(2, 1)] == 30 == g.N * 3 // 2


def test_enumeration_complete_d2():
    g = build_graph(2)
    polys = enumerate_polymers(g)
    naive = [S for r in range(1, 7) for S in combinations(range(6), r) if naive_two_linked(g, S)]
    assert sorted(p.vertices for p in polys) == sorted(naive)
    assert sorted(p.mask for p in polys) == sorted(all_two_linked_subsets(g))


def test_enumeration_complete_d3_small_sizes():
    g = build_graph(3)
    polys = enumerate_polymers(g, PolymerParams(3))
    naive = {S for r in range(1, 4) for S in combinations(range(g.N), r) if naive_two_linked(g, S)}
    assert {p.vertices for p in polys} == naive


def test_boundary_cap():
    g = build_graph(3)
    capped = enumerate_polymers(g, PolymerParams(3, 5))
    full = enumerate_polymers(g, PolymerParams(3))
    assert {p.vertices for p in capped} == {p.vertices for p in full if p.boundary_size <= 5}


@pytest.mark.parametrize("d", [2, 3])
def test_rooted_count_bound(d):
    g = build_graph(d)
    for root in (0, g.N - 1):
        polys = enumerate_polymers(g, PolymerParams(4), root=root)
        assert all(root in p.vertices for p in polys)
        for size, cnt in polymer_census(polys).items():
            assert cnt <= (math.e * d * d) ** (size - 1)


def test_adjacency_examples():
    g = build_graph(3)
    a = make_polymer(g, [0])
    assert polymer_adjacent(a, a)
    others = [v for v in range(1, g.N)]
    d2 = next(v for v in others if hamming_dist(g, 0, v) == 2)
    d3 = next(v for v in others if hamming_dist(g, 0, v) >= 3)
    assert polymer_adjacent(a, make_polymer(g, [d2]))
    assert not polymer_adjacent(a, make_polymer(g, [d3]))
    with pytest.raises(ParameterError):
        make_polymer(g, [0, d3])
    with pytest.raises(ParameterError):
        make_polymer(g, [])


def test_weight_examples():
    g2, g3 = build_graph(2), build_graph(3)
    for v in range(6):
        assert weight(g2, make_polymer(g2, [v]), P4) == Fraction(1, 4)
    edge3 = make_polymer(g3, [0, g3.neighbors[0][0]])
    assert weight(g3, edge3, P4) == Fraction(1, 16)
    u = next(v for v in g3.lower if v != 0 and set(g3.neighbors[v]) & set(g3.neighbors[0]))
    assert weight(g3, make_polymer(g3, [0, u]), P4) == Fraction(1, 64)
    edge2 = make_polymer(g2, [0, g2.neighbors[0][0]])
    assert weight(g2, edge2, P4) == weight_global_oracle(g2, edge2, P4) == Fraction(1, 4)


def test_weight_zero_when_no_defect_coloring():
    g = build_graph(2)
    p = PrincipalPartition((1,), (2, 3))
    low = make_polymer(g, [0])  # wrong color is 1, which its neighbors must also use
    assert weight(g, low, p) == 0 == weight_global_oracle(g, low, p)


@pytest.mark.parametrize("q", [3, 4, 5])
def test_local_weight_equals_global_d2(q):
    g = build_graph(2)
    for p in principal_partitions(q)[:2]:
        for gamma in enumerate_polymers(g):
            w = weight(g, gamma, p)
            assert w == weight_global_oracle(g, gamma, p)
            assert (weight_denominator(g, gamma.closure_mask, p) * w).denominator == 1
            assert len(local_colorings(g, gamma, p)) == local_numerator(g, gamma, p)


def test_factorization_over_families():
    g = build_graph(2)
    polys = enumerate_polymers(g)
    hist = flaw_histogram(g, P4)
    for fam in iter_families(polys):
        union = sum(polys[j].mask for j in fam)
        prod = Fraction(ground_state_count(g, P4))
        for j in fam:
            prod *= weight(g, polys[j], P4)
        assert hist.get(union, 0) == prod


def test_partition_function_examples():
    g = build_graph(2)
    assert partition_function(g, PolymerParams(0), P4).xi == 1
    res = partition_function(g, PolymerParams(), P4)
    assert res.xi == Fraction(183, 16) == Fraction(732, 64)
    # singletons only: independent sets of the square of a 6-cycle are the
    # empty set, 6 singletons and 3 antipodal pairs
    assert partition_function(g, PolymerParams(1), P4).xi == 1 + Fraction(6, 4) + Fraction(3, 16)
    assert partition_function_by_subsets(g, PolymerParams(1), P4) == Fraction(43, 16)


@pytest.mark.parametrize("q", [3, 4, 5, 6])
def test_capture_identity_d2(q):
    g = build_graph(2)
    for p in principal_partitions(q):
        assert capture_count(g, PolymerParams(), p) == count_colorings_exact(2, q)
        assert captured_by_subsets(g, PolymerParams(), p) == count_colorings_exact(2, q)


@pytest.mark.parametrize("max_size", [0, 1, 2, 3])
def test_capture_truncated_matches_brute_force(max_size):
    g = build_graph(2)
    params = PolymerParams(max_size)
    assert capture_count(g, params, P4) == captured_brute_force(g, params, P4)
    if max_size == 0:
        assert capture_count(g, params, P4) == 2**6


def test_truncated_xi_below_full():
    g = build_graph(2)
    full = partition_function(g, PolymerParams(), P4).xi
    polys = enumerate_polymers(g)
    for t in range(1, 7):
        xt = partition_function(g, PolymerParams(t), P4).xi
        assert xt <= full
        bigger_positive = any(p.size > t and weight(g, p, P4) > 0 for p in polys)
        assert (xt == full) == (not bigger_positive)


def test_d3_two_routes_max_size_2():
    g = build_graph(3)
    params = PolymerParams(2)
    a = partition_function(g, params, P4)
    assert a.xi == Fraction(358683, 32768)
    assert partition_function_by_subsets(g, params, P4) == a.xi


@pytest.mark.slow
def test_d3_capture_equals_exact_count():
    g = build_graph(3)
    assert captured_by_subsets(g, PolymerParams(), P4) == count_colorings_exact(3, 4) == 217727724


def test_family_cap():
    g = build_graph(3)
    with pytest.raises(ResourceLimitError):
        partition_function(g, PolymerParams(2), P4, cap=100)


def test_families_are_independent():
    g = build_graph(2)
    polys = enumerate_polymers(g, PolymerParams(2))
    for fam in iter_families(polys):
        for i, j in combinations(fam, 2):
            assert not polymer_adjacent(polys[i], polys[j])


def test_tilted_weight_strictly_larger():
    g = build_graph(3)
    for gamma in enumerate_polymers(g, PolymerParams(2)):
        w = weight(g, gamma, P4)
        t = tilted_weight(g, gamma, w)
        if w:
            assert t.a > mpmath.mpf(w.numerator) / w.denominator


def test_kp_matches_plain_summation():
    g = build_graph(2)
    params = PolymerParams(2)
    polys = enumerate_polymers(g, params)
    for v in range(g.N):
        rep = kp_lhs(g, params, P4, v, prec=200)
        with mpmath.workprec(200):
            total = mpmath.mpf(0)
            for gamma in polys:
                if v in gamma.vertices:
                    w = weight(g, gamma, P4)
                    nb = bin(g.neighborhood_mask(gamma.mask)).count("1")
                    total += mpmath.mpf(w.numerator) / w.denominator * mpmath.exp(
                        mpmath.mpf(2 * gamma.size) / g.d + mpmath.mpf(nb) / (3 * 4)
                    )
            assert rep.lower - mpmath.mpf(10) ** -15 <= total <= rep.upper + mpmath.mpf(10) ** -15
            assert rep.upper - rep.lower < mpmath.mpf(10) ** -15
        assert rep.as_dict()["asserted"] == {}


def test_kp_empty_and_monotone():
    g = build_graph(3)
    empty = kp_lhs(g, PolymerParams(0), P4, 0)
    assert empty.upper == 0 and empty.polymer_count == 0
    prev = empty.lower
    for t in (1, 2, 3):
        rep = kp_lhs(g, PolymerParams(t), P4, 0)
        assert rep.lower >= prev
        prev = rep.lower


def test_kp_exponent_regimes():
    g = build_graph(2)
    gamma = make_polymer(g, [0])
    e = kp_exponent(g, gamma, 4)
    assert abs(mpmath.mpf(e.mid) - (1 + mpmath.mpf(2) / 12)) < 1e-12


def test_polymer_cap():
    g = build_graph(3)
    with pytest.raises(ResourceLimitError):
        enumerate_polymers(g)
    with pytest.raises(ResourceLimitError):
        enumerate_polymers(g, PolymerParams(3), cap=50)
