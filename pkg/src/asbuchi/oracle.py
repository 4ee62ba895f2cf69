"""Brute-force reference solver for small finite arenas.

The generalized Büchi objective is reduced to a simple Büchi objective on the
product of the arena with a mode counter ``0..r-1``: the mode advances after
leaving a state of the current goal, and the Büchi set holds the states where
the last mode wraps around.  On the product, every pure memoryless Alice
strategy is played against every pure memoryless Bob strategy; a start state
is won by a profile iff every bottom SCC reachable in the induced chain meets
the Büchi set.  The result is projected back at mode 0.

Nothing here touches the fixpoint machinery, so the oracle can be used to
cross-check it.
"""
from __future__ import annotations

import itertools

from . import kernels
from .arena import ALICE, FiniteArena, goal_family
from .kernels import BudgetExceeded

DEFAULT_BUDGET = 100_000_000

__all__ = ["BudgetExceeded", "mode_product", "oracle_win", "oracle_win_bob_memory", "profile_count"]


def mode_product(arena: FiniteArena, goals):
    """Product states reachable from mode 0, with owner flags, move supports as
    bitmasks, and the Büchi bitmask.

    Returns ``(nodes, alice, supports, moves, goal_mask)`` where ``nodes`` lists
    ``(state, mode)`` pairs and ``moves[k]`` names the moves of node ``k``.
    """
    goals = goal_family(arena, goals)
    r = len(goals)

    def nxt_mode(s, i):
        return (i + 1) % r if s in goals[i] else i

    nodes = [(s, 0) for s in arena.states]
    index = {v: k for k, v in enumerate(nodes)}
    k = 0
    while k < len(nodes):
        s, i = nodes[k]
        j = nxt_mode(s, i)
        for m in arena.moves[s]:
            for t in arena.support(s, m):
                if (t, j) not in index:
                    index[t, j] = len(nodes)
                    nodes.append((t, j))
        k += 1

    alice, supports, moves = [], [], []
    goal_mask = 0
    for k, (s, i) in enumerate(nodes):
        alice.append(arena.owner[s] == ALICE)
        j = nxt_mode(s, i)
        row = []
        for m in arena.moves[s]:
            mask = 0
            for t in arena.support(s, m):
                mask |= 1 << index[t, j]
            row.append(mask)
        supports.append(row)
        moves.append(arena.moves[s])
        if i == r - 1 and s in goals[i]:
            goal_mask |= 1 << k
    return nodes, alice, supports, moves, goal_mask


def profile_count(arena: FiniteArena, goals) -> int:
    _, _, supports, _, _ = mode_product(arena, goals)
    total = 1
    for row in supports:
        total *= len(row)
    return total


def oracle_win(arena: FiniteArena, goals, budget: int = DEFAULT_BUDGET) -> frozenset:
    """States from which some memoryless product strategy of Alice wins almost
    surely against all memoryless product strategies of Bob.

    Raises :class:`BudgetExceeded` when the profile count exceeds ``budget``.
    """
    nodes, alice, supports, _, goal_mask = mode_product(arena, goals)
    if len(nodes) > 64:
        raise BudgetExceeded(f"{len(nodes)} product states exceed the 64-state limit")
    start = 0
    for k, (_, i) in enumerate(nodes):
        if i == 0:
            start |= 1 << k
    win = kernels.enumerate_profiles(len(nodes), alice, supports, goal_mask, start, budget)
    return frozenset(s for k, (s, i) in enumerate(nodes) if i == 0 and win >> k & 1)


def oracle_win_bob_memory(arena: FiniteArena, goals, budget: int = 200_000) -> frozenset:
    """Like :func:`oracle_win` but Bob gets one extra bit of memory.

    Bob's strategy is a move per (product state, bit) plus a bit update per
    (bit, arrival state); Alice stays memoryless on the product.  Used to
    stress the memoryless-Bob assumption on tiny arenas.
    """
    nodes, alice, supports, _, goal_mask = mode_product(arena, goals)
    n = len(nodes)
    a_idx = [k for k in range(n) if alice[k]]
    b_idx = [k for k in range(n) if not alice[k]]
    a_space = [range(len(supports[k])) for k in a_idx]
    b_space = [range(len(supports[k])) for k in b_idx for _ in (0, 1)]
    total = 4 ** n
    for rng in a_space + b_space:
        total *= len(rng)
    if total > budget or 2 * n > 64:
        raise BudgetExceeded(f"{total} profiles exceed budget {budget}")

    start = 0
    for k, (_, i) in enumerate(nodes):
        if i == 0:
            start |= 1 << k
    # extended chain node (k, bit) -> index 2k + bit
    goal2 = 0
    for k in range(n):
        if goal_mask >> k & 1:
            goal2 |= 0b11 << (2 * k)
    win = 0
    for a_choice in itertools.product(*a_space):
        pick = dict(zip(a_idx, a_choice))
        survivors = start & ~win
        if not survivors:
            break
        for b_choice in itertools.product(*b_space):
            for k, c in zip(b_idx, range(0, len(b_choice), 2)):
                pick[k, 0], pick[k, 1] = b_choice[c], b_choice[c + 1]
            for upd_bits in range(4 ** n):
                # bit of update for (old bit, arrival node k): bit 2k+old
                succ = []
                for k in range(n):
                    for bit in (0, 1):
                        m = pick[k] if alice[k] else pick[k, bit]
                        mask, out, t = supports[k][m], 0, 0
                        while mask:
                            if mask & 1:
                                nb = upd_bits >> (2 * t + bit) & 1
                                out |= 1 << (2 * t + nb)
                            mask >>= 1
                            t += 1
                        succ.append(out)
                w = kernels.chain_win_mask(2 * n, succ, goal2)
                for k in range(n):
                    if survivors >> k & 1 and not w >> (2 * k) & 1:
                        survivors &= ~(1 << k)
                if not survivors:
                    break
            if not survivors:
                break
        win |= survivors
    return frozenset(s for k, (s, i) in enumerate(nodes) if i == 0 and win >> k & 1)
