"""Finite turn-based stochastic arenas and their almost-sure generalized Büchi solution.

An arena assigns every state an owner (Alice ``"A"`` or Bob ``"B"``), a
non-empty tuple of enabled moves and, per enabled move, an exact rational
distribution over successor states.  Winning sets are computed by evaluating
the nested fixpoint terms with :mod:`asbuchi.fixpoint` over the powerset of
states.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import networkx as nx

from .fixpoint import Const, Mu, Nu, Op, SetLattice, Var, evaluate

ALICE = "A"
BOB = "B"

State = Hashable
Move = str


class ArenaError(ValueError):
    pass


class StrategyError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class FiniteArena:
    states: tuple
    owner: Mapping[State, str]
    moves: Mapping[State, tuple]
    dist: Mapping[tuple, Mapping[State, Fraction]]

    def __post_init__(self):
        states = tuple(self.states)
        if len(set(states)) != len(states):
            raise ArenaError("duplicate state ids")
        object.__setattr__(self, "states", states)
        known = set(states)
        for s in states:
            if self.owner.get(s) not in (ALICE, BOB):
                raise ArenaError(f"state {s}: owner must be A or B")
        for (s, m), d in self.dist.items():
            if s not in known:
                raise ArenaError(f"move {m} declared on unknown state {s}")
            for t in d:
                if t not in known:
                    raise ArenaError(f"state {s} move {m}: unknown successor {t}")
        moves = {s: tuple(sorted(self.moves.get(s, ()))) for s in states}
        object.__setattr__(self, "moves", moves)

    @classmethod
    def build(cls, owner: Mapping[State, str], moves: Mapping[tuple, Mapping[State, object]]):
        """Convenience constructor: ``moves[(s, m)] = {t: prob}``; probabilities
        may be anything :class:`fractions.Fraction` accepts."""
        states = tuple(owner)
        enabled: dict = {s: [] for s in states}
        dist = {}
        for (s, m), d in moves.items():
            enabled.setdefault(s, []).append(m)
            dist[s, m] = {t: Fraction(p) for t, p in d.items()}
        return cls(states, dict(owner), enabled, dist)

    @property
    def alice_states(self) -> frozenset:
        return frozenset(s for s in self.states if self.owner[s] == ALICE)

    @property
    def bob_states(self) -> frozenset:
        return frozenset(s for s in self.states if self.owner[s] == BOB)

    @property
    def all_moves(self) -> tuple:
        return tuple(sorted({m for ms in self.moves.values() for m in ms}))

    def support(self, s, m) -> frozenset:
        return frozenset(t for t, p in self.dist[s, m].items() if p > 0)

    def __len__(self):
        return len(self.states)


@dataclass
class PreconditionReport:
    deadlock_free: bool
    distributions_valid: bool
    finite_choice: bool = True
    finite_attractor: frozenset = frozenset()
    problems: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.deadlock_free and self.distributions_valid and self.finite_choice

    def raise_if_failed(self):
        if not self.ok:
            raise ArenaError("; ".join(self.problems))


def check_preconditions(arena: FiniteArena) -> PreconditionReport:
    """Deadlock-freedom and distribution validity.  A finite arena is finite-choice
    and its whole state set is a finite attractor, so those hold by construction."""
    problems = []
    for s in arena.states:
        if not arena.moves[s]:
            problems.append(f"state {s} has no enabled move")
    dist_ok = True
    for s in arena.states:
        for m in arena.moves[s]:
            d = arena.dist.get((s, m))
            if d is None:
                problems.append(f"state {s} move {m}: missing distribution")
                dist_ok = False
                continue
            if any(not isinstance(p, (Fraction, int)) for p in d.values()):
                problems.append(f"state {s} move {m}: probabilities must be exact rationals")
                dist_ok = False
            if any(p <= 0 for p in d.values()):
                problems.append(f"state {s} move {m}: non-positive probability")
                dist_ok = False
            total = sum(d.values(), Fraction(0))
            if total != 1:
                problems.append(f"state {s} move {m}: probabilities sum to {total}, not 1")
                dist_ok = False
    deadlock_free = all(arena.moves[s] for s in arena.states)
    return PreconditionReport(
        deadlock_free=deadlock_free,
        distributions_valid=dist_ok,
        finite_attractor=frozenset(arena.states),
        problems=problems,
    )


def goal_family(arena: FiniteArena, goals: Iterable[Iterable[State]]) -> tuple[frozenset, ...]:
    fam = tuple(frozenset(g) for g in goals)
    if not fam:
        raise ArenaError("a generalized Büchi objective needs at least one goal set")
    known = set(arena.states)
    for i, g in enumerate(fam, 1):
        if not g <= known:
            raise ArenaError(f"goal {i} mentions unknown states {sorted(map(str, g - known))}")
    return fam


# -- one-step operators --------------------------------------------------------


def post(arena: FiniteArena, c, m) -> frozenset:
    if m not in arena.moves.get(c, ()):
        raise ArenaError(f"move {m} not enabled in {c}")
    return arena.support(c, m)


def pre_exists(arena: FiniteArena, X, Y) -> frozenset:
    X, Y = frozenset(X), frozenset(Y)
    out = set()
    for c in arena.states:
        for m in arena.moves[c]:
            p = arena.support(c, m)
            if p <= X and p & Y:
                out.add(c)
                break
    return frozenset(out)


def pre_forall(arena: FiniteArena, X, Y) -> frozenset:
    X, Y = frozenset(X), frozenset(Y)
    return frozenset(
        c for c in arena.states
        if all(arena.support(c, m) <= X and arena.support(c, m) & Y for m in arena.moves[c])
    )


def pre_xa(arena: FiniteArena, X, Y) -> frozenset:
    return (arena.alice_states & pre_exists(arena, X, Y)) | (arena.bob_states & pre_forall(arena, X, Y))


def pre_move(arena: FiniteArena, m, Y) -> frozenset:
    """States where ``m`` is enabled and may lead into ``Y``."""
    Y = frozenset(Y)
    return frozenset(c for c in arena.states if m in arena.moves[c] and arena.support(c, m) & Y)


def wpre_move(arena: FiniteArena, m, X) -> frozenset:
    """Dual of :func:`pre_move`: ``m`` disabled, or every successor in ``X``."""
    X = frozenset(X)
    return frozenset(c for c in arena.states if m not in arena.moves[c] or arena.support(c, m) <= X)


def pre_exists_via_moves(arena: FiniteArena, X, Y) -> frozenset:
    out = frozenset()
    for m in arena.all_moves:
        out |= wpre_move(arena, m, X) & pre_move(arena, m, Y)
    return out


def pre_forall_via_moves(arena: FiniteArena, X, Y) -> frozenset:
    out = frozenset(arena.states)
    for m in arena.all_moves:
        out &= wpre_move(arena, m, ()) | (wpre_move(arena, m, X) & pre_move(arena, m, Y))
    return out


# -- fixpoint terms --------------------------------------------------------------


def arena_lattice(arena: FiniteArena) -> SetLattice:
    lat = SetLattice(arena.states)
    lat.register("pre_xa", lambda x, y: pre_xa(arena, x, y), 2)
    return lat


def hi_term(x, goal: frozenset, i: int = 1):
    """``μZ. x ∩ Pre⊗A(x, R_i ∪ Z)``."""
    z = f"Z{i}"
    return Mu(z, Op("meet", x, Op("pre_xa", x, Op("join", Const(goal, f"R{i}"), Var(z)))))


def h_all_term(x, goals):
    hs = [hi_term(x, g, i) for i, g in enumerate(goals, 1)]
    return hs[0] if len(hs) == 1 else Op("meet", *hs)


def w_term(goals):
    return Nu("X", h_all_term(Var("X"), goals))


def wprime_term(goals, universe):
    return Nu("X", Op("pre_xa", h_all_term(Var("X"), goals), Const(frozenset(universe), "Conf")))


def w1_term(goal):
    return Nu("X", Mu("Z", Op("pre_xa", Var("X"), Op("join", Const(goal, "R1"), Var("Z")))))


def _solve(arena, term, **kw):
    check_preconditions(arena).raise_if_failed()
    value, _ = evaluate(term, arena_lattice(arena), **kw)
    return value


def compute_Hi(arena: FiniteArena, X, Ri) -> frozenset:
    return _solve(arena, hi_term(Const(frozenset(X), "X"), frozenset(Ri)))


def compute_W(arena: FiniteArena, goals) -> frozenset:
    return _solve(arena, w_term(goal_family(arena, goals)))


def compute_Wprime(arena: FiniteArena, goals) -> frozenset:
    return _solve(arena, wprime_term(goal_family(arena, goals), arena.states))


def compute_W1(arena: FiniteArena, R1) -> frozenset:
    (goal,) = goal_family(arena, [R1])
    return _solve(arena, w1_term(goal))


# -- strategies ------------------------------------------------------------------


@dataclass(frozen=True)
class StrategyTable:
    """Alice strategy with ``modes`` memory states.

    In mode ``i`` at an Alice state ``s`` the move is ``table[i, s]``.  After
    the move from ``s`` is played, the mode advances to ``i+1 mod r`` when
    ``s`` belongs to goal ``i``.  A single mode means memoryless.
    """

    goals: tuple
    table: Mapping[tuple[int, State], Move]

    @property
    def modes(self) -> int:
        return len(self.goals)

    @property
    def kind(self) -> str:
        return "memoryless" if self.modes == 1 else "mode-switching"

    def move(self, mode: int, state):
        return self.table[mode, state]

    def next_mode(self, mode: int, state) -> int:
        return (mode + 1) % self.modes if state in self.goals[mode] else mode

    def domain(self, mode: int = 0) -> frozenset:
        return frozenset(s for (i, s) in self.table if i == mode)


def _rank_layers(arena: FiniteArena, W: frozenset, goal: frozenset) -> list:
    """Approximants ``Z_0 = ∅ ⊂ Z_1 ⊂ ...`` of ``H_i(W) = μZ. W ∩ Pre⊗A(W, R_i ∪ Z)``."""
    layers = [frozenset()]
    while True:
        nxt = W & pre_xa(arena, W, goal | layers[-1])
        if nxt == layers[-1]:
            return layers
        layers.append(nxt)


def extract_strategy(arena: FiniteArena, goals, W=None) -> StrategyTable:
    """Mode-switching Alice strategy winning almost surely from every state of W.

    Inside ``H_i(W)`` the move must keep the play in ``W`` and reach
    ``R_i ∪ H_i(W)`` with positive probability.  Among those, the move chosen
    at a state first added to ``H_i(W)`` at approximant ``k`` hits
    ``R_i ∪ Z_{k-1}``, so the approximant index decreases with positive
    probability and the play cannot circle inside ``H_i(W)`` forever.
    """
    goals = goal_family(arena, goals)
    wp = compute_Wprime(arena, goals)
    if W is not None and frozenset(W) != wp:
        raise StrategyError("supplied winning set differs from the computed one")
    layers = [_rank_layers(arena, wp, g) for g in goals]
    h_all = frozenset.intersection(*(zs[-1] for zs in layers))
    table = {}
    for i, (g, zs) in enumerate(zip(goals, layers)):
        for c in sorted(arena.alice_states & wp, key=str):
            rank = next((k for k, z in enumerate(zs) if c in z), None)
            for m in arena.moves[c]:
                p = arena.support(c, m)
                if rank is not None:
                    good = p <= wp and p & (g | zs[rank - 1])
                else:
                    good = p <= h_all
                if good:
                    table[i, c] = m
                    break
            else:
                raise StrategyError(f"no qualifying move at {c} in mode {i + 1}")
    return StrategyTable(goals, table)


def move_witness(arena: FiniteArena, X, Y, c):
    """Lowest move realizing ``c ∈ Pre⊗A(X, Y)`` at an Alice state, else None."""
    X, Y = frozenset(X), frozenset(Y)
    for m in arena.moves[c]:
        p = arena.support(c, m)
        if p <= X and p & Y:
            return m
    return None


# -- Markov chain analysis -------------------------------------------------------


class ChainError(ValueError):
    pass


def bscc_almost_sure(chain: Mapping[State, Mapping[State, Fraction]], c, goal) -> bool:
    """True iff every bottom SCC reachable from ``c`` meets ``goal``, i.e. the goal
    is visited infinitely often with probability one."""
    goal = frozenset(goal)
    g = nx.DiGraph()
    for s, row in chain.items():
        g.add_node(s)
        if not row:
            raise ChainError(f"state {s} has no successors")
        if sum(row.values(), Fraction(0)) != 1 or any(p <= 0 for p in row.values()):
            raise ChainError(f"row of {s} is not a probability distribution")
        for t in row:
            if t not in chain:
                raise ChainError(f"{s} -> unknown state {t}")
            g.add_edge(s, t)
    if c not in chain:
        raise ChainError(f"unknown start state {c}")
    cond = nx.condensation(g)
    members = cond.graph["mapping"]
    reach = nx.descendants(cond, members[c]) | {members[c]}
    for comp in reach:
        if cond.out_degree(comp) == 0 and not (cond.nodes[comp]["members"] & goal):
            return False
    return True


def product_chain(arena: FiniteArena, sigma: StrategyTable, tau: Mapping[State, Move]):
    """Markov chain over (state, mode) induced by ``sigma`` and a memoryless Bob
    strategy ``tau``; returns ``(chain, goal)`` where the goal holds the states at
    which the last mode wraps around."""
    chain = {}
    goal = set()
    r = sigma.modes
    todo = [(s, 0) for s in arena.states]
    seen = set(todo)
    while todo:
        s, i = todo.pop()
        if arena.owner[s] == ALICE:
            if (i, s) not in sigma.table:
                continue
            m = sigma.move(i, s)
        else:
            m = tau[s]
        j = sigma.next_mode(i, s)
        if i == r - 1 and s in sigma.goals[i]:
            goal.add((s, i))
        row = {}
        for t, p in arena.dist[s, m].items():
            row[t, j] = row.get((t, j), 0) + p
            if (t, j) not in seen:
                seen.add((t, j))
                todo.append((t, j))
        chain[s, i] = row
    # states outside sigma's domain are absorbing losers
    for st in seen:
        chain.setdefault(st, {st: Fraction(1)})
    return chain, frozenset(goal)


def memoryless_strategies(arena: FiniteArena, states: Iterable[State]):
    """All pure memoryless choice functions on ``states``."""
    states = sorted(states, key=str)
    choices = [arena.moves[s] for s in states]

    def rec(k, acc):
        if k == len(states):
            yield dict(acc)
            return
        for m in choices[k]:
            acc[states[k]] = m
            yield from rec(k + 1, acc)
        acc.pop(states[k], None)

    yield from rec(0, {})


# -- random corpus ---------------------------------------------------------------


def random_arena(rng: random.Random, max_states: int = 8, max_moves: int = 3,
                 r: int | None = None, min_states: int = 2):
    """Random arena with ``min_states..max_states`` states and ``1..max_moves``
    moves per state, plus ``r`` random goal sets (``r`` drawn from {1, 2} if None).
    Returns ``(arena, goals)``."""
    n = rng.randint(min_states, max_states)
    states = [f"s{i}" for i in range(n)]
    owner = {s: rng.choice((ALICE, BOB)) for s in states}
    moves = {}
    for s in states:
        for k in range(rng.randint(1, max_moves)):
            size = min(n, rng.choices((1, 2, 3), weights=(5, 4, 1))[0])
            succ = rng.sample(states, size)
            weights = [rng.randint(1, 3) for _ in succ]
            total = sum(weights)
            moves[s, f"m{k}"] = {t: Fraction(w, total) for t, w in zip(succ, weights)}
    arena = FiniteArena.build(owner, moves)
    if r is None:
        r = rng.choice((1, 2))
    goals = []
    for _ in range(r):
        k = rng.randint(1, max(1, n // 3))
        goals.append(frozenset(rng.sample(states, k)))
    return arena, tuple(goals)


def reweighted(arena: FiniteArena, rng: random.Random) -> FiniteArena:
    """Same supports, fresh positive probabilities."""
    dist = {}
    for (s, m), d in arena.dist.items():
        ws = {t: rng.randint(1, 9) for t in d}
        total = sum(ws.values())
        dist[s, m] = {t: Fraction(w, total) for t, w in ws.items()}
    return FiniteArena(arena.states, dict(arena.owner), dict(arena.moves), dist)
