"""Almost-sure generalized Büchi games on probabilistic lossy channel systems.

Moves are the rules of the (deadlock-completed) system; after each move every
message may be lost and, optionally, duplicated.  The one-step operators only
depend on the support of the perturbation, so the solver works on regions and
never sees probabilities.  The winning region is the guarded term

    νX. Pre⊗A(K↓ ∩_i H_i(X), Conf)
    H_i(X) = μZ. X ∩ Pre⊗A(K↓X, C↑(R_i ∪ Z))

evaluated by :mod:`asbuchi.fixpoint`.  Guardedness ensures both iterations
stabilize after finitely many steps.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

from .fixpoint import Const, Mu, Nu, Op, Var, check_guarded, evaluate
from .lcs import ChannelSystem, combined_pre, enabled_region, pre_rule, wpre_rule
from .region import Region, RegionError, RegionLattice

__all__ = ["PlcsGame", "GameError", "Solution", "pre_exists_region", "pre_forall_region",
           "pre_xa_region", "weak_pre", "game_lattice", "winning_term", "buchi_term",
           "solve", "solve_buchi", "compute_Hi_region", "strategy_regions",
           "DEFAULT_OUTER_BUDGET", "RegionStrategy"]

DEFAULT_OUTER_BUDGET = 200


class GameError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class PlcsGame:
    system: ChannelSystem
    partition: Region
    goals: tuple
    dup: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        sig = self.system.signature
        object.__setattr__(self, "goals", tuple(self.goals))
        if not self.goals:
            raise GameError("at least one goal region is required")
        for reg in (self.partition, *self.goals):
            if reg.sig != sig:
                raise GameError("partition and goals must use the system signature")

    @property
    def sig(self):
        return self.system.signature

    @property
    def conf(self) -> Region:
        return Region.full(self.sig)

    @property
    def conf_a(self) -> Region:
        return self.partition

    @property
    def conf_b(self) -> Region:
        return ~self.partition

    def not_enabled(self, rule) -> Region:
        key = ("off", rule.name)
        if key not in self._cache:
            self._cache[key] = ~enabled_region(self.system, rule)
        return self._cache[key]


def _memo(game, key, thunk):
    hit = game._cache.get(key)
    if hit is None:
        hit = game._cache[key] = thunk()
    return hit


def weak_pre(game: PlcsGame, rule, X: Region) -> Region:
    """Configurations from which every outcome of ``rule`` (step plus
    perturbation) lies in ``X``."""
    def go():
        inner = X if not game.dup else ~(~X).dup_preimage()
        return wpre_rule(game.system, rule, inner.down_interior())
    return _memo(game, ("wpre", rule.name, X), go)


def strong_pre(game: PlcsGame, rule, Y: Region) -> Region:
    """Configurations from which some outcome of ``rule`` lies in ``Y``."""
    return _memo(game, ("pre", rule.name, Y),
                 lambda: combined_pre(game.system, rule, Y, game.dup))


def pre_exists_region(game: PlcsGame, X: Region, Y: Region) -> Region:
    out = Region.empty(game.sig)
    for rule in game.system.rules:
        out = out | (weak_pre(game, rule, X) & strong_pre(game, rule, Y))
    return out


def pre_forall_region(game: PlcsGame, X: Region, Y: Region) -> Region:
    out = game.conf
    for rule in game.system.rules:
        out = out & (game.not_enabled(rule) | (weak_pre(game, rule, X) & strong_pre(game, rule, Y)))
    return out


def pre_xa_region(game: PlcsGame, X: Region, Y: Region) -> Region:
    return _memo(game, ("xa", X, Y), lambda: (
        (game.conf_a & pre_exists_region(game, X, Y))
        | (game.conf_b & pre_forall_region(game, X, Y))))


def game_lattice(game: PlcsGame) -> RegionLattice:
    lat = RegionLattice(game.sig)
    lat.register("pre_xa", lambda X, Y: pre_xa_region(game, X, Y), 2)
    return lat


def _hi(lat, x, goal, i):
    z = f"Z{i}"
    return Mu(z, Op("meet", x, lat.apply(
        "pre_xa", lat.apply("K_down", x),
        lat.apply("C_up", Op("join", Const(goal, f"R{i}"), Var(z))))))


def winning_term(game: PlcsGame, lat: RegionLattice):
    hs = [_hi(lat, Var("X"), g, i) for i, g in enumerate(game.goals, 1)]
    inner = hs[0] if len(hs) == 1 else Op("meet", *hs)
    return Nu("X", lat.apply("pre_xa", lat.apply("K_down", inner), Const(lat.top, "Conf")))


def buchi_term(game: PlcsGame, lat: RegionLattice):
    (goal,) = game.goals
    return Nu("X", Mu("Z", lat.apply(
        "pre_xa", lat.apply("K_down", Var("X")),
        lat.apply("C_up", Op("join", Const(goal, "R1"), Var("Z"))))))


@dataclass
class Solution:
    winning: Region
    trace: object
    lattice: RegionLattice

    @property
    def approximants(self) -> list:
        """Outer approximants ``W_0 = Conf, W_1, ...`` up to the fixpoint."""
        return self.trace.outermost().elements


def _run(game, term, lat, budget):
    if not check_guarded(term, lat):
        raise GameError("constructed term is not guarded")
    value, trace = evaluate(term, lat, max_iterations=budget)
    return Solution(value, trace, lat)


def solve(game: PlcsGame, budget: int = DEFAULT_OUTER_BUDGET) -> Solution:
    """Winning region of the almost-sure generalized Büchi objective.

    Raises :class:`asbuchi.fixpoint.IterationBudgetExceeded` when some fixpoint
    needs more than ``budget`` iterations.
    """
    lat = game_lattice(game)
    return _run(game, winning_term(game, lat), lat, budget)


def solve_buchi(game: PlcsGame, budget: int = DEFAULT_OUTER_BUDGET) -> Solution:
    """Single-goal special case via the two-variable term."""
    if len(game.goals) != 1:
        raise GameError("solve_buchi needs exactly one goal")
    lat = game_lattice(game)
    return _run(game, buchi_term(game, lat), lat, budget)


def compute_Hi_region(game: PlcsGame, X: Region, i: int, budget: int = DEFAULT_OUTER_BUDGET) -> Region:
    """``H_i(X)`` for the 1-based goal index ``i``."""
    lat = game_lattice(game)
    value, _ = evaluate(_hi(lat, Const(X, "X"), game.goals[i - 1], i), lat,
                        max_iterations=budget, trace=False)
    return value


def strategy_regions(game: PlcsGame, W: Region, budget: int = DEFAULT_OUTER_BUDGET) -> dict:
    """``{(i, rule name): V_i^δ}``: in mode ``i`` Alice plays ``δ`` inside ``V_i^δ``."""
    if W.sig != game.sig:
        raise RegionError("region signature mismatch")
    kw = W.down_interior()
    out = {}
    for i, goal in enumerate(game.goals, 1):
        h = compute_Hi_region(game, W, i, budget)
        target = kw & (goal | h).up_closure()
        for rule in game.system.rules:
            out[i, rule.name] = game.conf_a & pre_rule(game.system, rule, target)
    return out


class RegionStrategy:
    """Mode-switching Alice strategy on the winning region ``W``.

    In mode ``i`` at a configuration first added to ``H_i(W)`` at approximant
    ``k``, the chosen rule keeps every outcome in ``W`` and reaches
    ``R_i ∪ Z_{k-1}`` with positive probability; outside ``H_i(W)`` it moves
    surely into ``∩_j H_j(W)``.  The mode advances after a move played from a
    configuration of ``R_i``.  Rules are tried in system order.
    """

    def __init__(self, game: PlcsGame, W: Region, budget: int = DEFAULT_OUTER_BUDGET):
        self.game = game
        self.W = W
        self.layers = []
        for goal in game.goals:
            zs = [Region.empty(game.sig)]
            while len(zs) <= budget:
                nxt = W & pre_xa_region(game, W.down_interior(), (goal | zs[-1]).up_closure())
                if nxt == zs[-1]:
                    break
                zs.append(nxt)
            else:
                raise GameError("strategy layers did not stabilize")
            self.layers.append(zs)
        self.h_all = reduce(lambda a, b: a & b, (zs[-1] for zs in self.layers))
        self._enabled = {r.name: ~game.not_enabled(r) for r in game.system.rules}

    @property
    def modes(self) -> int:
        return len(self.game.goals)

    def rank(self, c, mode: int):
        for k, z in enumerate(self.layers[mode]):
            if z.contains(c):
                return k
        return None

    def choose(self, c, mode: int = 0):
        """Rule to play at Alice configuration ``c`` in ``mode``, None outside ``W``."""
        if not self.W.contains(c):
            return None
        game, zs = self.game, self.layers[mode]
        k = self.rank(c, mode)
        for rule in game.system.rules:
            if rule.source != c[0] or not self._enabled[rule.name].contains(c):
                continue
            if k is not None:
                ok = (weak_pre(game, rule, self.W).contains(c)
                      and strong_pre(game, rule, game.goals[mode] | zs[k - 1]).contains(c))
            else:
                ok = weak_pre(game, rule, self.h_all).contains(c)
            if ok:
                return rule
        raise GameError(f"no qualifying rule at {c} in mode {mode + 1}")

    def next_mode(self, mode: int, c) -> int:
        return (mode + 1) % self.modes if self.game.goals[mode].contains(c) else mode
