# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels; see ``_kernels_py.py`` for the reference semantics."""

from libc.stdlib cimport malloc, calloc, free

from ._kernels_py import BudgetExceeded

ctypedef unsigned long long mask_t

DEF MAXN = 64


def minimize_dfa(int n, int k, flat, acc):
    cdef int *delta = <int *> malloc(max(n * k, 1) * sizeof(int))
    cdef int *cls = <int *> malloc(n * sizeof(int))
    cdef int *new = <int *> malloc(n * sizeof(int))
    cdef int *order = <int *> malloc(n * sizeof(int))
    cdef char *seen = <char *> calloc(n, 1)
    cdef int *number = NULL
    cdef int *rep = NULL
    cdef int i, s, t, c, norder, count, ncls, base
    cdef dict sigs
    cdef tuple sig
    try:
        for i in range(n * k):
            delta[i] = flat[i]
        order[0] = 0
        seen[0] = 1
        norder = 1
        i = 0
        while i < norder:
            s = order[i]
            base = s * k
            for c in range(k):
                t = delta[base + c]
                if not seen[t]:
                    seen[t] = 1
                    order[norder] = t
                    norder += 1
            i += 1

        count = 0
        for i in range(norder):
            s = order[i]
            cls[s] = 1 if acc[s] else 0
        count = 2 if _has_both(cls, order, norder) else 1
        while True:
            sigs = {}
            for i in range(norder):
                s = order[i]
                base = s * k
                sig = (cls[s],) + tuple([cls[delta[base + c]] for c in range(k)])
                new[s] = sigs.setdefault(sig, len(sigs))
            for i in range(norder):
                s = order[i]
                cls[s] = new[s]
            ncls = len(sigs)
            if ncls == count:
                break
            count = ncls

        number = <int *> malloc(ncls * sizeof(int))
        rep = <int *> malloc(ncls * sizeof(int))
        for i in range(ncls):
            number[i] = -1
            rep[i] = -1
        for i in range(norder):
            s = order[i]
            if rep[cls[s]] < 0:
                rep[cls[s]] = s
        queue = [cls[0]]
        number[cls[0]] = 0
        flat2 = []
        acc2 = []
        i = 0
        while i < len(queue):
            s = rep[<int> queue[i]]
            acc2.append(1 if acc[s] else 0)
            base = s * k
            for c in range(k):
                t = cls[delta[base + c]]
                if number[t] < 0:
                    number[t] = len(queue)
                    queue.append(t)
                flat2.append(number[t])
            i += 1
        return len(queue), acc2, flat2
    finally:
        free(delta)
        free(cls)
        free(new)
        free(order)
        free(seen)
        if number != NULL:
            free(number)
        if rep != NULL:
            free(rep)


cdef bint _has_both(int *cls, int *order, int norder):
    cdef int i
    cdef bint a = False, r = False
    for i in range(norder):
        if cls[order[i]]:
            a = True
        else:
            r = True
    return a and r


cdef mask_t _chain_win(int n, mask_t *succ, mask_t goal, mask_t *reach) noexcept nogil:
    cdef int s, j, t
    cdef mask_t bj, rj, bs, r, bad = 0, win = 0
    cdef bint bottom
    for s in range(n):
        reach[s] = succ[s] | (<mask_t> 1 << s)
    for j in range(n):
        bj = <mask_t> 1 << j
        rj = reach[j]
        for s in range(n):
            if reach[s] & bj:
                reach[s] |= rj
    for s in range(n):
        if reach[s] & goal:
            continue
        bs = <mask_t> 1 << s
        r = reach[s]
        bottom = True
        t = 0
        while r:
            if (r & 1) and not (reach[t] & bs):
                bottom = False
                break
            r >>= 1
            t += 1
        if bottom:
            bad |= bs
    for s in range(n):
        if not (reach[s] & bad):
            win |= <mask_t> 1 << s
    return win


def chain_win_mask(int n, succ, goal):
    if n > MAXN:
        raise ValueError(f"at most {MAXN} states supported")
    cdef mask_t csucc[MAXN]
    cdef mask_t reach[MAXN]
    cdef int s
    for s in range(n):
        csucc[s] = succ[s]
    return _chain_win(n, csucc, <mask_t> goal, reach)


def enumerate_profiles(int n, alice, supports, goal, candidates, budget):
    if n > MAXN:
        raise ValueError(f"at most {MAXN} states supported")
    cdef mask_t succ[MAXN]
    cdef mask_t reach[MAXN]
    cdef mask_t opts[MAXN][8]
    cdef int nopt[MAXN]
    cdef int a_idx[MAXN]
    cdef int b_idx[MAXN]
    cdef int a_ctr[MAXN]
    cdef int b_ctr[MAXN]
    cdef int na = 0, nb = 0, s, m, i
    cdef mask_t cgoal = goal, ccand = candidates, win = 0, remaining
    total = 1
    for s in range(n):
        nopt[s] = len(supports[s])
        if nopt[s] < 1 or nopt[s] > 8:
            raise ValueError("each state needs between 1 and 8 moves")
        for m in range(nopt[s]):
            opts[s][m] = supports[s][m]
        succ[s] = opts[s][0]
        if nopt[s] > 1:
            total *= nopt[s]
            if alice[s]:
                a_idx[na] = s
                na += 1
            else:
                b_idx[nb] = s
                nb += 1
    if total > budget:
        raise BudgetExceeded(f"{total} strategy profiles exceed budget {budget}")
    for i in range(na):
        a_ctr[i] = 0
    with nogil:
        while True:
            for i in range(na):
                succ[a_idx[i]] = opts[a_idx[i]][a_ctr[i]]
            remaining = ccand & ~win
            if not remaining:
                break
            for i in range(nb):
                b_ctr[i] = 0
            while True:
                for i in range(nb):
                    succ[b_idx[i]] = opts[b_idx[i]][b_ctr[i]]
                remaining &= _chain_win(n, succ, cgoal, reach)
                if not remaining or not _advance(b_ctr, b_idx, nb, nopt):
                    break
            win |= remaining
            if not _advance(a_ctr, a_idx, na, nopt):
                break
    return win


cdef bint _advance(int *ctr, int *idx, int cnt, int *nopt) noexcept nogil:
    cdef int i
    for i in range(cnt):
        ctr[i] += 1
        if ctr[i] < nopt[idx[i]]:
            return True
        ctr[i] = 0
    return False
