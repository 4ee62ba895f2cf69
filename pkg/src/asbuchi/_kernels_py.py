"""Pure-Python reference implementations of the hot kernels.

Signatures and results must match ``_kernels.pyx`` exactly; the test suite
runs both against each other when the extension is built.
"""


class BudgetExceeded(RuntimeError):
    pass


def minimize_dfa(n, k, flat, acc):
    """Minimize a complete DFA with initial state 0.

    ``flat[s*k + c]`` is the target of state ``s`` on letter ``c`` and
    ``acc[s]`` is 0/1.  Returns ``(m, acc2, flat2)`` for the minimal DFA
    restricted to reachable states, numbered breadth-first from 0.
    """
    # reachable states, BFS order
    order = [0]
    seen = {0}
    i = 0
    while i < len(order):
        s = order[i]
        base = s * k
        for c in range(k):
            t = flat[base + c]
            if t not in seen:
                seen.add(t)
                order.append(t)
        i += 1

    # Moore refinement on reachable states
    cls = {s: acc[s] for s in order}
    count = len(set(cls.values()))
    while True:
        sigs = {}
        new = {}
        for s in order:
            base = s * k
            sig = (cls[s],) + tuple(cls[flat[base + c]] for c in range(k))
            new[s] = sigs.setdefault(sig, len(sigs))
        cls = new
        if len(sigs) == count:
            break
        count = len(sigs)

    # canonical BFS renumbering of the quotient
    rep = {}
    for s in order:
        rep.setdefault(cls[s], s)
    number = {cls[0]: 0}
    queue = [cls[0]]
    j = 0
    flat2 = []
    acc2 = []
    while j < len(queue):
        b = queue[j]
        s = rep[b]
        acc2.append(acc[s])
        base = s * k
        for c in range(k):
            tb = cls[flat[base + c]]
            if tb not in number:
                number[tb] = len(queue)
                queue.append(tb)
            flat2.append(number[tb])
        j += 1
    return len(queue), acc2, flat2


def chain_win_mask(n, succ, goal):
    """States of a finite chain from which every reachable bottom SCC meets ``goal``.

    ``succ[s]`` is the successor bitmask of state ``s``.
    """
    reach = [succ[s] | (1 << s) for s in range(n)]
    for j in range(n):
        bj = 1 << j
        rj = reach[j]
        for s in range(n):
            if reach[s] & bj:
                reach[s] |= rj
    bad = 0
    for s in range(n):
        if reach[s] & goal:
            continue
        bs = 1 << s
        r = reach[s]
        bottom = True
        t = 0
        while r:
            if r & 1 and not reach[t] & bs:
                bottom = False
                break
            r >>= 1
            t += 1
        if bottom:
            bad |= bs
    win = 0
    for s in range(n):
        if not reach[s] & bad:
            win |= 1 << s
    return win


def enumerate_profiles(n, alice, supports, goal, candidates, budget):
    """Start states (within ``candidates``) won almost surely by some memoryless
    Alice choice against every memoryless Bob choice.

    ``alice[s]`` is truthy for Alice states; ``supports[s][m]`` is the support
    bitmask of move ``m`` in ``s``.  Raises :class:`BudgetExceeded` if the
    number of strategy profiles exceeds ``budget``.
    """
    a_idx = [s for s in range(n) if alice[s] and len(supports[s]) > 1]
    b_idx = [s for s in range(n) if not alice[s] and len(supports[s]) > 1]
    total = 1
    for s in a_idx + b_idx:
        total *= len(supports[s])
    if total > budget:
        raise BudgetExceeded(f"{total} strategy profiles exceed budget {budget}")

    succ = [supports[s][0] for s in range(n)]
    win = 0
    a_ctr = [0] * len(a_idx)
    while True:
        for i, s in enumerate(a_idx):
            succ[s] = supports[s][a_ctr[i]]
        remaining = candidates & ~win
        if not remaining:
            break
        b_ctr = [0] * len(b_idx)
        while True:
            for i, s in enumerate(b_idx):
                succ[s] = supports[s][b_ctr[i]]
            remaining &= chain_win_mask(n, succ, goal)
            if not remaining or not _advance(b_ctr, b_idx, supports):
                break
        win |= remaining
        if not _advance(a_ctr, a_idx, supports):
            break
    return win


def _advance(ctr, idx, supports):
    for i in range(len(ctr)):
        ctr[i] += 1
        if ctr[i] < len(supports[idx[i]]):
            return True
        ctr[i] = 0
    return False
