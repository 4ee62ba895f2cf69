"""Probabilistic semantics under the local-fault model, and play sampling.

After every step each message in every channel is, independently, lost with
probability ``lam``, duplicated (``a`` becomes ``aa``) with probability
``lam_dup`` or kept unchanged.  A freshly created duplicate is not perturbed
again in the same step.
"""
from __future__ import annotations

import itertools
import random
import statistics
import zlib
from dataclasses import dataclass, field
from fractions import Fraction

from .arena import ALICE, FiniteArena, StrategyTable
from .lcs import ChannelSystem, step
from .region import Region, Signature

__all__ = [
    "FaultModel",
    "FaultModelError",
    "StrategyUndefined",
    "Play",
    "sample_perturbation",
    "perturbation_distribution",
    "perturbation_support",
    "perturbs_to",
    "HashedStrategy",
    "PriorityStrategy",
    "TableStrategy",
    "simulate",
    "simulate_arena",
    "estimate_generalized_buchi",
    "empirical_attractor",
    "explicit_arena",
]


class FaultModelError(ValueError):
    pass


class StrategyUndefined(RuntimeError):
    def __init__(self, config, prefix):
        super().__init__(f"strategy undefined at {config} after {len(prefix)} steps")
        self.config = config
        self.prefix = prefix


@dataclass(frozen=True)
class FaultModel:
    lam: Fraction = Fraction(1, 4)
    lam_dup: Fraction = Fraction(0)

    def __post_init__(self):
        lam, dup = Fraction(self.lam), Fraction(self.lam_dup)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "lam_dup", dup)
        if not 0 < lam < 1:
            raise FaultModelError("loss probability must lie strictly between 0 and 1")
        if not 0 <= dup < 1:
            raise FaultModelError("duplication probability must lie in [0, 1)")
        if lam + dup >= 1:
            raise FaultModelError("loss plus duplication probability must stay below 1")
        if dup > 0 and dup >= lam:
            raise FaultModelError("duplications must be less likely than losses")

    @property
    def dup(self) -> bool:
        return self.lam_dup > 0

    def outcomes(self):
        """Per-message ``(copies, probability)`` pairs with positive probability."""
        out = [(0, self.lam), (1, 1 - self.lam - self.lam_dup)]
        if self.dup:
            out.append((2, self.lam_dup))
        return out


# -- perturbations --------------------------------------------------------------------------


def sample_perturbation(c, model: FaultModel, rng: random.Random):
    q, words = c
    lam, keep = float(model.lam), float(1 - model.lam_dup)
    out = []
    for w in words:
        parts = []
        for letter in w:
            u = rng.random()
            if u < lam:
                continue
            parts.append(letter if u < keep else letter + letter)
        out.append("".join(parts))
    return q, tuple(out)


def _word_distribution(w: str, model: FaultModel) -> dict:
    dist = {"": Fraction(1)}
    for letter in w:
        nxt: dict = {}
        for prefix, p in dist.items():
            for copies, pc in model.outcomes():
                key = prefix + letter * copies
                nxt[key] = nxt.get(key, 0) + p * pc
        dist = nxt
    return dist


def perturbation_distribution(c, model: FaultModel) -> dict:
    """Exact one-step perturbation distribution ``{c': probability}``."""
    q, words = c
    out: dict = {}
    per_channel = [_word_distribution(w, model).items() for w in words]
    for combo in itertools.product(*per_channel):
        key = (q, tuple(w for w, _ in combo))
        p = Fraction(1)
        for _, pw in combo:
            p *= pw
        out[key] = out.get(key, 0) + p
    return out


def _subwords(w: str) -> set:
    out = {""}
    for letter in w:
        out |= {s + letter for s in out}
    return out


def _dup_variants(w: str) -> set:
    out = {""}
    for letter in w:
        out = {s + letter for s in out} | {s + letter + letter for s in out}
    return out


def perturbation_support(c, dup: bool = False) -> set:
    """``{c' | c ⇝ c'}``: subwords of duplication variants, channel by channel."""
    q, words = c
    per = []
    for w in words:
        variants = _dup_variants(w) if dup else {w}
        per.append(set().union(*(_subwords(v) for v in variants)))
    return {(q, ws) for ws in itertools.product(*(sorted(p) for p in per))}


def perturbs_to(sig: Signature, c, c2, dup: bool = False) -> bool:
    """``c ⇝ c2`` decided on singleton regions: ``c ∈ T_dup⁻¹(C↑{c2})``."""
    if c[0] != c2[0]:
        return False
    target = Region.singleton(sig, c2).up_closure()
    if dup:
        target = target.dup_preimage()
    return target.contains(c)


# -- strategies -------------------------------------------------------------------------------


def _stable_hash(*parts) -> int:
    return zlib.crc32(repr(parts).encode())


class HashedStrategy:
    """Memoryless choice: enabled rule picked by a seeded hash of the configuration."""

    def __init__(self, system: ChannelSystem, seed: int):
        self.system = system
        self.seed = seed

    def choose(self, c, mode: int = 0):
        enabled = self.system.enabled(c)
        if not enabled:
            return None
        return enabled[_stable_hash(self.seed, c) % len(enabled)]


class PriorityStrategy:
    """Memoryless choice: first enabled rule in a fixed priority order."""

    def __init__(self, system: ChannelSystem, order):
        self.system = system
        self.rank = {name: k for k, name in enumerate(order)}

    def choose(self, c, mode: int = 0):
        enabled = self.system.enabled(c)
        if not enabled:
            return None
        return min(enabled, key=lambda r: self.rank.get(r.name, len(self.rank)))


class TableStrategy:
    """Adapter from a finite-arena :class:`StrategyTable` or a ``{state: move}`` map."""

    def __init__(self, table):
        self.table = table

    @property
    def modes(self) -> int:
        return self.table.modes if isinstance(self.table, StrategyTable) else 1

    def choose(self, s, mode: int = 0):
        if isinstance(self.table, StrategyTable):
            return self.table.table.get((mode, s))
        return self.table.get(s)

    def next_mode(self, mode: int, s) -> int:
        if isinstance(self.table, StrategyTable):
            return self.table.next_mode(mode, s)
        return mode


# -- plays -------------------------------------------------------------------------------------


@dataclass
class Play:
    configs: list = field(default_factory=list)
    moves: list = field(default_factory=list)
    goal_visits: list = field(default_factory=list)
    f0_visits: int = 0

    def wins(self, k: int) -> bool:
        """Every goal visited at least ``k`` times."""
        return all(v >= k for v in self.goal_visits)


def _next_mode(sigma, mode, c):
    return sigma.next_mode(mode, c) if hasattr(sigma, "next_mode") else mode


def simulate(game, sigma, tau, c0, horizon: int, rng: random.Random,
             model: FaultModel | None = None) -> Play:
    """Play ``horizon`` steps of a PLCS game from ``c0``: the owner picks a rule,
    the rule fires, then the fault model perturbs the channels."""
    model = model or FaultModel(lam_dup=Fraction(1, 8) if game.dup else 0)
    if model.dup != game.dup:
        raise FaultModelError("fault model and game disagree on duplication")
    play = Play(goal_visits=[0] * len(game.goals))
    c, mode = (c0[0], tuple(c0[1])), 0
    for _ in range(horizon):
        _record(play, c, [g.contains(c) for g in game.goals], not any(c[1]))
        player = sigma if game.partition.contains(c) else tau
        rule = player.choose(c, mode)
        if rule is None:
            raise StrategyUndefined(c, play.configs)
        nxt = step(c, rule)
        if nxt is None:
            raise StrategyUndefined(c, play.configs)
        play.moves.append(rule.name)
        mode = _next_mode(sigma, mode, c)
        c = sample_perturbation(nxt, model, rng)
    return play


def _record(play, c, hits, in_f0):
    play.configs.append(c)
    for i, hit in enumerate(hits):
        play.goal_visits[i] += hit
    play.f0_visits += in_f0


def simulate_arena(arena: FiniteArena, goals, sigma, tau, s0, horizon: int,
                   rng: random.Random) -> Play:
    """Play ``horizon`` steps on a finite arena; ``sigma``/``tau`` as for
    :func:`simulate` but choosing move names, or plain ``{state: move}`` maps."""
    sigma = sigma if hasattr(sigma, "choose") else TableStrategy(sigma)
    tau = tau if hasattr(tau, "choose") else TableStrategy(tau)
    goals = [frozenset(g) for g in goals]
    rows = {key: (list(d), [float(p) for p in d.values()]) for key, d in arena.dist.items()}
    play = Play(goal_visits=[0] * len(goals))
    s, mode = s0, 0
    for _ in range(horizon):
        _record(play, s, [s in g for g in goals], False)
        player = sigma if arena.owner[s] == ALICE else tau
        m = player.choose(s, mode)
        if m is None:
            raise StrategyUndefined(s, play.configs)
        play.moves.append(m)
        mode = _next_mode(sigma, mode, s)
        succ, weights = rows[s, m]
        s = rng.choices(succ, weights)[0]
    return play


def _play_rng(seed: int, k: int) -> random.Random:
    return random.Random(seed * 1_000_003 + k)


def estimate_generalized_buchi(game, sigma, taus, c0, plays: int, horizon: int, k: int,
                               seed: int = 0, model: FaultModel | None = None) -> list:
    """Per ``tau``, the fraction of plays visiting every goal at least ``k`` times.

    ``game`` is a :class:`~asbuchi.solver.PlcsGame` or a pair ``(arena, goals)``.
    """
    report = []
    for t, tau in enumerate(taus):
        wins = 0
        for p in range(plays):
            rng = _play_rng(seed + t, p)
            if isinstance(game, tuple):
                arena, goals = game
                play = simulate_arena(arena, goals, sigma, tau, c0, horizon, rng)
            else:
                play = simulate(game, sigma, tau, c0, horizon, rng, model)
            wins += play.wins(k)
        report.append(wins / plays)
    return report


def empirical_attractor(game, sigma, tau, c0, plays: int, horizon: int, seed: int = 0,
                        model: FaultModel | None = None) -> dict:
    """Per-play visit counts to empty-channel configurations, with their median."""
    counts = [simulate(game, sigma, tau, c0, horizon, _play_rng(seed, p), model).f0_visits
              for p in range(plays)]
    return {"counts": counts, "median": statistics.median(counts)}


# -- explicit arenas -----------------------------------------------------------------------------


def explicit_arena(system: ChannelSystem, partition: Region, bound: int,
                   model: FaultModel | None = None):
    """Finite arena over all configurations with channel words of length ≤ ``bound``.

    Only meaningful when steps and perturbations never lengthen a channel beyond
    ``bound`` (e.g. send-free systems under losses); a ``ValueError`` is raised
    otherwise.  States are the configurations themselves.
    """
    model = model or FaultModel()
    alphabet = system.alphabet
    words = ["".join(p) for n in range(bound + 1) for p in itertools.product(alphabet, repeat=n)]
    configs = [(q, ws) for q in system.locations
               for ws in itertools.product(words, repeat=system.d)]
    owner, dist = {}, {}
    for c in configs:
        owner[c] = ALICE if partition.contains(c) else "B"
        for rule in system.enabled(c):
            out = perturbation_distribution(step(c, rule), model)
            for c2 in out:
                if any(len(w) > bound for w in c2[1]):
                    raise ValueError(f"rule {rule.name} leaves the bound from {c}")
            dist[c, rule.name] = out
    return FiniteArena.build(owner, dist), configs
