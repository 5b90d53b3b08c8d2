"""Sampling from the auxiliary measure mu-hat, exact small-instance laws, defect statistics.

One draw runs four steps: a uniform ordered principal partition (A, B); a
family Lambda of compatible polymers with probability prod(omega)/Xi; a
uniform defect coloring of S+ for S the union of Lambda; and independent
uniform right-side colors everywhere off S+.

Sample i draws from a ``random.Random`` seeded by ``SeedSequence([seed, i])``,
so output never depends on the number of workers.
"""

from __future__ import annotations

import bisect
import json
import math
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Iterable, Iterator, Sequence

import numpy as np

from .coloring import (
    PrincipalPartition,
    balance_margins,
    flaw_mask,
    is_proper,
    nearest_ground_state,
    principal_partitions,
)
from .errors import ParameterError, ResourceLimitError, ValidationError
from .graph import MidLayerGraph, build_graph, iter_bits
from .polymers import FAMILY_CAP, Polymer, PolymerParams, enumerate_polymers, iter_families, local_colorings, weight
from .util import frac_str, popcount

EXACT_MAX_D = 2
DEFAULT_T_GRID = (Fraction(1, 20), Fraction(1, 10), Fraction(1, 5), Fraction(1, 2))
DEFAULT_S_GRID = (Fraction(1, 20), Fraction(1, 10), Fraction(1, 4), Fraction(1, 2), Fraction(1))


@dataclass(frozen=True)
class SamplerConfig:
    d: int
    q: int
    params: PolymerParams = PolymerParams()
    seed: int = 0
    sample_count: int = 1000

    def __post_init__(self):
        if self.q < 2:
            raise ParameterError("q must be >= 2")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")
        if self.sample_count < 0:
            raise ParameterError("sample_count must be >= 0")
        build_graph(self.d)  # validates d


@dataclass(frozen=True)
class SampleRecord:
    index: int
    partition: PrincipalPartition
    family: tuple[tuple[int, ...], ...]
    lambda_size: int  # total number of vertices covered by the family
    coloring: tuple[int, ...]
    flaw_size: int  # against the nearest ground state
    nearest: PrincipalPartition
    max_margin: Fraction  # balancedness against the chosen partition

    def as_dict(self) -> dict:
        return {
            "index": self.index,
            "partition": self.partition.as_dict(),
            "family": [list(x) for x in self.family],
            "lambda_count": len(self.family),
            "lambda_size": self.lambda_size,
            "coloring": list(self.coloring),
            "flaw_size": self.flaw_size,
            "nearest_partition": self.nearest.as_dict(),
            "max_margin": frac_str(self.max_margin),
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), separators=(",", ":"))


def record_from_dict(obj: dict) -> SampleRecord:
    try:
        return SampleRecord(
            obj["index"],
            PrincipalPartition(tuple(obj["partition"]["A"]), tuple(obj["partition"]["B"])),
            tuple(tuple(x) for x in obj["family"]),
            obj["lambda_size"],
            tuple(obj["coloring"]),
            obj["flaw_size"],
            PrincipalPartition(tuple(obj["nearest_partition"]["A"]), tuple(obj["nearest_partition"]["B"])),
            Fraction(obj["max_margin"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed sample record: {exc}") from exc


# ------------------------------------------------------------------ tables


@dataclass
class _PartitionTable:
    partition: PrincipalPartition
    polymers: list[Polymer]
    families: list[tuple[int, ...]]
    weights: list[Fraction]  # product of polymer weights per family
    cumulative: list[int]  # integer-scaled running totals
    xi: Fraction
    _local: dict[int, list[dict[int, int]]] = field(default_factory=dict)

    def local(self, g: MidLayerGraph, j: int) -> list[dict[int, int]]:
        if j not in self._local:
            self._local[j] = local_colorings(g, self.polymers[j], self.partition)
        return self._local[j]


@lru_cache(maxsize=32)
def _tables(d: int, q: int, params: PolymerParams, cap: int = FAMILY_CAP) -> tuple[_PartitionTable, ...]:
    g = build_graph(d)
    polymers = enumerate_polymers(g, params)
    out = []
    for p in principal_partitions(q):
        w = [weight(g, x, p) for x in polymers]
        fams, fw = [], []
        for fam in iter_families(polymers, cap):
            prod = Fraction(1)
            for j in fam:
                prod *= w[j]
            if prod:
                fams.append(fam)
                fw.append(prod)
        scale = math.lcm(*(x.denominator for x in fw))
        cum, run = [], 0
        for x in fw:
            run += x.numerator * (scale // x.denominator)
            cum.append(run)
        out.append(_PartitionTable(p, polymers, fams, fw, cum, sum(fw, Fraction(0))))
    return tuple(out)


def sample_rng(seed: int, index: int) -> random.Random:
    state = np.random.SeedSequence([seed, index]).generate_state(4, dtype=np.uint32)
    return random.Random(int.from_bytes(state.tobytes(), "little"))


# ---------------------------------------------------------------- sampling


def _draw(config: SamplerConfig, index: int) -> SampleRecord:
    g = build_graph(config.d)
    tables = _tables(config.d, config.q, config.params)
    rng = sample_rng(config.seed, index)
    # step 1
    tab = tables[rng.randrange(len(tables))]
    p = tab.partition
    # step 2
    r = rng.randrange(tab.cumulative[-1])
    fam = tab.families[bisect.bisect_right(tab.cumulative, r)]
    # step 3
    f = [0] * g.N
    covered = 0
    for j in fam:
        for v, c in rng.choice(tab.local(g, j)).items():
            f[v] = c
        covered |= tab.polymers[j].closure_mask
    # step 4
    for v in range(g.N):
        if not covered >> v & 1:
            f[v] = rng.choice(p.right_side(g.is_upper(v)))
    f = tuple(f)
    rep = nearest_ground_state(g, f, config.q, validate=False)
    margin = max(balance_margins(g, f, p).values())
    return SampleRecord(
        index,
        p,
        tuple(tab.polymers[j].vertices for j in fam),
        sum(tab.polymers[j].size for j in fam),
        f,
        len(rep.flaw),
        rep.partition,
        margin,
    )


def _draw_range(config: SamplerConfig, start: int, stop: int) -> list[SampleRecord]:
    return [_draw(config, i) for i in range(start, stop)]


def sample_mu_hat(config: SamplerConfig, *, workers: int = 1, chunk: int = 2000) -> Iterator[SampleRecord]:
    """Yield ``config.sample_count`` records, in index order."""
    n = config.sample_count
    if n == 0:
        return
    _tables(config.d, config.q, config.params)  # fail early on resource limits
    if workers <= 1:
        for i in range(n):
            yield _draw(config, i)
        return
    bounds = [(s, min(s + chunk, n)) for s in range(0, n, chunk)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        for batch in pool.map(_draw_range, [config] * len(bounds), *zip(*bounds)):
            yield from batch


def write_jsonl(records: Iterable[SampleRecord], fh) -> int:
    n = 0
    for rec in records:
        fh.write(rec.to_json() + "\n")
        n += 1
    return n


def read_jsonl(fh) -> list[SampleRecord]:
    out = []
    for line in fh:
        line = line.strip()
        if line:
            out.append(record_from_dict(json.loads(line)))
    return out


# ------------------------------------------------------------ exact laws


@dataclass(frozen=True)
class MuHatExact:
    pmf: dict[tuple[int, ...], Fraction]
    conditional: dict[PrincipalPartition, dict[tuple[int, ...], Fraction]]
    xi: dict[PrincipalPartition, Fraction]
    pr_flaw_equals_lambda: Fraction


@lru_cache(maxsize=8)
def exact_mu_hat(d: int, q: int, params: PolymerParams = PolymerParams()) -> MuHatExact:
    """Exact law of the four-step process, by enumerating every outcome of every step."""
    if d > EXACT_MAX_D:
        raise ResourceLimitError(f"exact mu-hat needs d <= {EXACT_MAX_D}", estimate=d)
    g = build_graph(d)
    tables = _tables(d, q, params)
    n_parts = len(tables)
    pmf: dict[tuple[int, ...], Fraction] = {}
    cond: dict[PrincipalPartition, dict[tuple[int, ...], Fraction]] = {}
    hit = Fraction(0)
    nearest_cache: dict[tuple[int, ...], int] = {}
    for tab in tables:
        p = tab.partition
        here: dict[tuple[int, ...], Fraction] = {}
        for fam, w in zip(tab.families, tab.weights):
            pr_fam = w / tab.xi
            covered = 0
            for j in fam:
                covered |= tab.polymers[j].closure_mask
            locals_ = [tab.local(g, j) for j in fam]
            n3 = math.prod(len(x) for x in locals_)
            free = [v for v in range(g.N) if not covered >> v & 1]
            sides = [p.right_side(g.is_upper(v)) for v in free]
            n4 = math.prod(len(s) for s in sides)
            each = pr_fam / (n3 * n4)
            lam = sum(tab.polymers[j].size for j in fam)
            for parts in product(*locals_):
                base = [0] * g.N
                for part in parts:
                    for v, c in part.items():
                        base[v] = c
                for cols in product(*sides):
                    for v, c in zip(free, cols):
                        base[v] = c
                    f = tuple(base)
                    here[f] = here.get(f, 0) + each
                    if f not in nearest_cache:
                        nearest_cache[f] = len(nearest_ground_state(g, f, q, validate=False).flaw)
                    if nearest_cache[f] == lam:
                        hit += each / n_parts
        cond[p] = here
        for f, m in here.items():
            pmf[f] = pmf.get(f, 0) + m / n_parts
    xi = {t.partition: t.xi for t in tables}
    return MuHatExact(pmf, cond, xi, hit)


def exact_mu_hat_pmf(d: int, q: int, params: PolymerParams = PolymerParams()) -> dict[tuple[int, ...], Fraction]:
    return exact_mu_hat(d, q, params).pmf


def total_variation(empirical: dict, exact: dict) -> float:
    """Half the L1 distance; ``empirical`` holds counts, ``exact`` probabilities."""
    n = sum(empirical.values())
    keys = set(empirical) | set(exact)
    return 0.5 * sum(abs(empirical.get(k, 0) / n - float(exact.get(k, 0))) for k in keys)


# ------------------------------------------------------------- statistics


def defect_stats(
    samples: Sequence[SampleRecord],
    N: int,
    *,
    t_grid: Sequence[Fraction] = DEFAULT_T_GRID,
    s_grid: Sequence[Fraction] = DEFAULT_S_GRID,
) -> dict:
    """Empirical Pr(X = |Lambda|), tails of |Lambda|/N and s-balancedness frequencies."""
    n = len(samples)
    if n == 0:
        raise ParameterError("defect statistics need at least one sample")
    eq = sum(1 for s in samples if s.flaw_size == s.lambda_size)
    tails = {frac_str(t): sum(1 for s in samples if s.lambda_size >= t * N) / n for t in t_grid}
    bal = {frac_str(s_): sum(1 for s in samples if s.max_margin <= s_) / n for s_ in s_grid}
    return {
        "samples": n,
        "N": N,
        "reported": {
            "pr_flaw_equals_lambda": eq / n,
            "lambda_tail": tails,
            "s_balanced": bal,
        },
        "asserted": {},
    }


def check_record(g: MidLayerGraph, rec: SampleRecord, params: PolymerParams) -> bool:
    """Recorded coloring is proper and the family is compatible and admissible."""
    if not is_proper(g, rec.coloring):
        return False
    masks = []
    for vs in rec.family:
        m = sum(1 << v for v in vs)
        reach = 0
        for v in vs:
            reach |= g.ball2[v]
        if not params.admits(len(vs), popcount(g.neighborhood_mask(m))):
            return False
        if any(mm & reach for mm in masks):
            return False
        masks.append(m)
    union = sum(masks)
    return flaw_mask(g, rec.coloring, rec.partition) == union
