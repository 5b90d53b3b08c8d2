# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; same signatures and results as ``_kernels_py``."""

from libc.stdlib cimport malloc, calloc, free
from libc.string cimport memset

cdef extern from *:
    int __builtin_ctzll(unsigned long long)


def count_list_colorings(back, last, lists):
    """Count proper list colorings with a dense-array frontier DP.

    The caller guarantees the product of list sizes fits in 64 bits.
    """
    cdef Py_ssize_t m = len(lists)
    if m == 0:
        return 1
    cdef int maxl = 0
    cdef Py_ssize_t i, s, k
    for i in range(m):
        if len(lists[i]) > maxl:
            maxl = len(lists[i])
        if len(lists[i]) == 0:
            return 0

    cdef int *col = <int *> malloc(m * maxl * sizeof(int))
    cdef int *nlist = <int *> malloc(m * sizeof(int))
    cdef int *lastp = <int *> malloc(m * sizeof(int))
    # frontier bookkeeping, sized for the worst case
    cdef int *front = <int *> malloc(m * sizeof(int))
    cdef int *nfront = <int *> malloc(m * sizeof(int))
    cdef unsigned long long *stride = <unsigned long long *> malloc((m + 1) * sizeof(unsigned long long))
    cdef unsigned long long *nstride = <unsigned long long *> malloc((m + 1) * sizeof(unsigned long long))
    cdef int *checks = <int *> malloc(m * sizeof(int))
    cdef int *keep = <int *> malloc(m * sizeof(int))
    cdef int *digit = <int *> malloc(m * sizeof(int))
    cdef unsigned long long *cur = NULL
    cdef unsigned long long *nxt = NULL
    cdef int nf = 0, nnf, nchecks, nkeep, keep_self, ci, c, ok, j
    cdef unsigned long long size = 1, nsize, idx, rem, base, total = 0, val
    try:
        for i in range(m):
            nlist[i] = len(lists[i])
            lastp[i] = last[i]
            for k in range(nlist[i]):
                col[i * maxl + k] = lists[i][k]
        cur = <unsigned long long *> calloc(1, sizeof(unsigned long long))
        cur[0] = 1
        for i in range(m):
            # slots of back-neighbours in the current frontier
            nchecks = 0
            for j in back[i]:
                for s in range(nf):
                    if front[s] == j:
                        checks[nchecks] = s
                        nchecks += 1
                        break
            nkeep = 0
            for s in range(nf):
                if lastp[front[s]] > i:
                    keep[nkeep] = s
                    nkeep += 1
            keep_self = 1 if lastp[i] > i else 0
            nnf = 0
            nsize = 1
            for s in range(nkeep):
                nfront[nnf] = front[keep[s]]
                nstride[nnf] = nsize
                nsize *= nlist[front[keep[s]]]
                nnf += 1
            if keep_self:
                nfront[nnf] = i
                nstride[nnf] = nsize
                nsize *= nlist[i]
                nnf += 1
            nxt = <unsigned long long *> calloc(nsize, sizeof(unsigned long long))
            if nxt == NULL:
                raise MemoryError("frontier table too large")
            for idx in range(size):
                val = cur[idx]
                if val == 0:
                    continue
                rem = idx
                for s in range(nf):
                    digit[s] = <int> (rem % <unsigned long long> nlist[front[s]])
                    rem //= <unsigned long long> nlist[front[s]]
                base = 0
                for s in range(nkeep):
                    base += digit[keep[s]] * nstride[s]
                for ci in range(nlist[i]):
                    c = col[i * maxl + ci]
                    ok = 1
                    for s in range(nchecks):
                        if col[front[checks[s]] * maxl + digit[checks[s]]] == c:
                            ok = 0
                            break
                    if ok:
                        if keep_self:
                            nxt[base + ci * nstride[nnf - 1]] += val
                        else:
                            nxt[base] += val
            free(cur)
            cur = nxt
            nxt = NULL
            size = nsize
            nf = nnf
            for s in range(nf):
                front[s] = nfront[s]
        for idx in range(size):
            total += cur[idx]
        return total
    finally:
        free(cur)
        free(nxt)
        free(col)
        free(nlist)
        free(lastp)
        free(front)
        free(nfront)
        free(stride)
        free(nstride)
        free(checks)
        free(keep)
        free(digit)


def enumerate_list_colorings(back, lists):
    """All proper list colorings as tuples indexed by position."""
    cdef Py_ssize_t m = len(lists)
    out = []
    if m == 0:
        out.append(())
        return out
    cdef int *cur = <int *> malloc(m * sizeof(int))
    cdef int *choice = <int *> malloc(m * sizeof(int))
    cdef int *nlist = <int *> malloc(m * sizeof(int))
    cdef int maxl = 0
    cdef Py_ssize_t i, k
    for i in range(m):
        if len(lists[i]) > maxl:
            maxl = len(lists[i])
    cdef int *col = <int *> malloc(m * (maxl if maxl > 0 else 1) * sizeof(int))
    cdef int *bstart = <int *> malloc((m + 1) * sizeof(int))
    cdef int nb = 0
    for i in range(m):
        nb += len(back[i])
    cdef int *bflat = <int *> malloc((nb if nb > 0 else 1) * sizeof(int))
    cdef int pos = 0, c, ok, t
    try:
        for i in range(m):
            nlist[i] = len(lists[i])
            for k in range(nlist[i]):
                col[i * maxl + k] = lists[i][k]
            bstart[i] = pos
            for t in back[i]:
                bflat[pos] = t
                pos += 1
        bstart[m] = pos
        memset(choice, 0, m * sizeof(int))
        i = 0
        while i >= 0:
            if i == m:
                out.append(tuple([cur[k] for k in range(m)]))
                i -= 1
                continue
            placed = False
            while choice[i] < nlist[i]:
                c = col[i * maxl + choice[i]]
                choice[i] += 1
                ok = 1
                for t in range(bstart[i], bstart[i + 1]):
                    if cur[bflat[t]] == c:
                        ok = 0
                        break
                if ok:
                    cur[i] = c
                    placed = True
                    break
            if placed:
                i += 1
                if i < m:
                    choice[i] = 0
            else:
                choice[i] = 0
                i -= 1
        return out
    finally:
        free(cur)
        free(choice)
        free(nlist)
        free(col)
        free(bstart)
        free(bflat)


def g2_components(mask, ball2):
    """Components of a <=64-vertex bitmask under the ``ball2`` masks."""
    cdef unsigned long long rest = mask
    cdef Py_ssize_t nb = len(ball2)
    cdef unsigned long long *balls = <unsigned long long *> malloc((nb if nb > 0 else 1) * sizeof(unsigned long long))
    cdef unsigned long long low, comp, todo, b, grow
    cdef Py_ssize_t i
    comps = []
    try:
        for i in range(nb):
            balls[i] = ball2[i]
        while rest:
            low = rest & (~rest + 1)
            comp = low
            todo = low
            while todo:
                b = todo & (~todo + 1)
                todo ^= b
                grow = balls[__builtin_ctzll(b)] & rest & ~comp
                comp |= grow
                todo |= grow
            comps.append(comp)
            rest &= ~comp
        return comps
    finally:
        free(balls)
