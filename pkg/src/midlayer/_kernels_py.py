"""Pure-Python implementations of the hot kernels.

Every function here has a drop-in twin in the compiled ``_ckernels`` module;
``midlayer.kernels`` picks one at import time. Inputs are plain lists so that
both implementations share a calling convention:

* ``back[i]``  positions ``j < i`` adjacent to position ``i``
* ``last[j]``  largest position adjacent to ``j`` (``j`` itself if none is later)
* ``lists[i]`` allowed colors at position ``i``
"""

from __future__ import annotations

from collections import defaultdict


def count_list_colorings(back, last, lists):
    """Count proper list colorings by frontier dynamic programming."""
    frontier: list[int] = []
    states = {(): 1}
    for i, allowed in enumerate(lists):
        slot = {j: s for s, j in enumerate(frontier)}
        checks = [slot[j] for j in back[i]]
        keep = [s for s, j in enumerate(frontier) if last[j] > i]
        keep_self = last[i] > i
        nxt: dict[tuple, int] = defaultdict(int)
        for state, count in states.items():
            forbidden = {state[s] for s in checks}
            base = tuple(state[s] for s in keep)
            for c in allowed:
                if c in forbidden:
                    continue
                nxt[base + (c,) if keep_self else base] += count
        if not nxt:
            return 0
        states = nxt
        frontier = [frontier[s] for s in keep] + ([i] if keep_self else [])
    return sum(states.values())


def enumerate_list_colorings(back, lists):
    """All proper list colorings as tuples indexed by position (backtracking)."""
    m = len(lists)
    out = []
    cur = [0] * m

    def rec(i):
        if i == m:
            out.append(tuple(cur))
            return
        for c in lists[i]:
            for j in back[i]:
                if cur[j] == c:
                    break
            else:
                cur[i] = c
                rec(i + 1)

    rec(0)
    return out


def g2_components(mask, ball2):
    """Split a vertex bitmask into components under the ``ball2`` reachability masks."""
    comps = []
    while mask:
        low = mask & -mask
        comp = low
        todo = low
        while todo:
            b = todo & -todo
            todo ^= b
            grow = ball2[b.bit_length() - 1] & mask & ~comp
            comp |= grow
            todo |= grow
        comps.append(comp)
        mask &= ~comp
    return comps
