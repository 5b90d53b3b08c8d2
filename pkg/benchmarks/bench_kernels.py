"""Compare the compiled kernels with the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py``. Each workload is timed with
both backends (best of ``--repeat`` runs) and the results are checked equal.
"""

from __future__ import annotations

import argparse
import random
import timeit

from midlayer import kernels
from midlayer.coloring import PrincipalPartition, count_colorings_exact, frame_plan
from midlayer.graph import build_graph
from midlayer.polymers import PolymerParams, _numerator, enumerate_polymers, local_numerator


def workloads():
    g3 = build_graph(3)
    rng = random.Random(0)
    masks = [sum(1 << v for v in rng.sample(range(g3.N), 8)) for _ in range(20000)]
    polys = enumerate_polymers(g3, PolymerParams(3))
    p = PrincipalPartition((1, 2), (3, 4))
    plan = frame_plan(g3, range(g3.N))
    lists = [[1, 2, 3]] * g3.N

    def count_d3(backend):
        return count_colorings_exact(3, 4, backend=backend)

    def frontier_d3_q3(backend):
        return kernels.count_list_colorings(plan.back, plan.last, lists, backend=backend)

    def components(backend):
        return [len(kernels.g2_components(m, g3.ball2, backend=backend)) for m in masks]

    def weights(backend):
        _numerator.cache_clear()  # each call does the work
        return [local_numerator(g3, x, p, backend=backend) for x in polys]

    return {
        "count_colorings_exact d=3 q=4": count_d3,
        "list-coloring frontier d=3 q=3": frontier_d3_q3,
        "2-linked components (20000 sets, d=3)": components,
        "local polymer numerators d=3 (|gamma|<=3)": weights,
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled kernels are not built; only the Python backend is available")
    print(f"{'workload':45s} {'python s':>10s} {'cython s':>10s} {'speedup':>8s}")
    for name, fn in workloads().items():
        py = min(timeit.repeat(lambda: fn("python"), number=1, repeat=args.repeat))
        if kernels.BACKEND == "cython":
            assert fn("python") == fn("cython"), name
            cy = min(timeit.repeat(lambda: fn("cython"), number=1, repeat=args.repeat))
            print(f"{name:45s} {py:10.4f} {cy:10.4f} {py / cy:8.1f}")
        else:
            print(f"{name:45s} {py:10.4f} {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
