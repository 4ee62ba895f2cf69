import random
from fractions import Fraction as F

import pytest

from asbuchi.arena import ALICE, FiniteArena
from asbuchi.automata import DFA
from asbuchi.corpus import bounded_examples, plcs_examples
from asbuchi.lcs import ChannelSystem, Internal, Rule, Send, complete_deadlocks
from asbuchi.region import Region, Signature
from asbuchi.simulator import (FaultModel, FaultModelError, HashedStrategy, PriorityStrategy,
                               StrategyUndefined, empirical_attractor,
                               estimate_generalized_buchi, explicit_arena,
                               perturbation_distribution, perturbation_support, perturbs_to,
                               sample_perturbation, simulate, simulate_arena)
from asbuchi.solver import PlcsGame, RegionStrategy, solve

from oracles import dup_variants, is_subword, words


def example(name):
    return next(e for e in plcs_examples() if e.name == name)


SIG = Signature(("q",), ("x", "y"), ("a", "b"))


@pytest.mark.parametrize("lam,dup", [(0, 0), (1, 0), (F(1, 2), F(1, 2)), (F(1, 4), F(1, 4)),
                                     (F(1, 4), F(1, 2)), (F(1, 2), -F(1, 8))])
def test_fault_model_rejects(lam, dup):
    with pytest.raises(FaultModelError):
        FaultModel(lam, dup)


def test_fault_model_defaults():
    m = FaultModel()
    assert m.lam == F(1, 4) and m.lam_dup == 0 and not m.dup
    assert FaultModel(F(1, 3), F(1, 6)).dup


def test_empty_channels_unchanged():
    rng = random.Random(0)
    for _ in range(20):
        assert sample_perturbation(("q", ("", "")), FaultModel(F(1, 2), F(1, 4)), rng) == ("q", ("", ""))


def test_loss_only_outputs_are_subwords():
    rng = random.Random(1)
    for _ in range(500):
        w = "".join(rng.choice("ab") for _ in range(rng.randint(0, 5)))
        q, (out,) = sample_perturbation(("q", (w,)), FaultModel(), rng)
        assert is_subword(out, w)


def test_bernoulli_loss_rate():
    rng = random.Random(2)
    model = FaultModel(F(1, 2))
    lost = sum(sample_perturbation(("q", ("a",)), model, rng)[1] == ("",) for _ in range(10 ** 4))
    assert abs(lost / 10 ** 4 - 0.5) <= 0.02


def test_distribution_sums_to_one_and_matches_support():
    for dup in (False, True):
        model = FaultModel(F(1, 3), F(1, 6) if dup else 0)
        for c in [("q", ("ab", "a")), ("q", ("", "bb")), ("q", ("aba", ""))]:
            dist = perturbation_distribution(c, model)
            assert sum(dist.values()) == 1
            assert set(dist) == perturbation_support(c, dup)


def brute_support(c, dup):
    q, ws = c
    per = []
    for w in ws:
        variants = dup_variants(w) if dup else {w}
        longest = max(len(v) for v in variants)
        per.append({u for u in words(("a", "b"), longest) if any(is_subword(u, v) for v in variants)})
    return {(q, (u1, u2)) for u1 in per[0] for u2 in per[1]}


def loss_then_dup(c):
    q, ws = c
    per = []
    for w in ws:
        subs = {u for u in words(("a", "b"), len(w)) if is_subword(u, w)}
        per.append(set().union(*(dup_variants(u) for u in subs)))
    return {(q, (u1, u2)) for u1 in per[0] for u2 in per[1]}


def test_support_matches_relation_and_is_order_insensitive():
    for w1 in words(("a", "b"), 2):
        for w2 in ["", "b"]:
            c = ("q", (w1, w2))
            for dup in (False, True):
                sup = perturbation_support(c, dup)
                assert sup == brute_support(c, dup)
                for c2 in brute_support(c, True):
                    assert perturbs_to(SIG, c, c2, dup) == (c2 in sup)
            assert perturbation_support(c, True) == loss_then_dup(c)


def test_seeded_determinism():
    ex = example("relay")
    sigma = HashedStrategy(ex.game.system, 1)
    tau = HashedStrategy(ex.game.system, 2)
    p1 = simulate(ex.game, sigma, tau, ex.start, 50, random.Random(9))
    p2 = simulate(ex.game, sigma, tau, ex.start, 50, random.Random(9))
    assert p1.configs == p2.configs and p1.moves == p2.moves


def tiny_game(goal_everything):
    rules = (Rule("p", (DFA.universal(("a",)),), Send(0, "a"), "p", "snd"),
             Rule("p", (DFA.universal(("a",)),), Internal(), "dead", "die"),
             Rule("dead", (DFA.universal(("a",)),), Internal(), "dead", "stay"))
    s = complete_deadlocks(ChannelSystem(("p", "dead"), ("x",), ("a",), rules))
    sig = s.signature
    goal = Region.full(sig) if goal_everything else Region.locations(sig, ["p"])
    return PlcsGame(s, Region.full(sig), [goal])


def test_frequency_extremes():
    g = tiny_game(True)
    sigma = HashedStrategy(g.system, 0)
    assert estimate_generalized_buchi(g, sigma, [sigma], ("p", ("",)), 50, 20, 5) == [1.0]
    g = tiny_game(False)
    die = PriorityStrategy(g.system, ["die"])
    assert estimate_generalized_buchi(g, die, [die], ("p", ("",)), 50, 20, 5) == [0.0]


def test_strategy_undefined_reports_prefix():
    g = tiny_game(False)

    class Partial:
        def choose(self, c, mode=0):
            return g.system.rule("die") if c[0] == "p" else None

    with pytest.raises(StrategyUndefined) as info:
        simulate(g, Partial(), Partial(), ("p", ("",)), 10, random.Random(0))
    assert info.value.config[0] == "dead" and len(info.value.prefix) == 2


def test_dup_mismatch_rejected():
    g = tiny_game(True)
    s = HashedStrategy(g.system, 0)
    with pytest.raises(FaultModelError):
        simulate(g, s, s, ("p", ("",)), 5, random.Random(0), FaultModel(F(1, 3), F(1, 6)))


def test_region_strategy_wins_in_simulation():
    for ex in plcs_examples():
        w = solve(ex.game).winning
        if not w.contains(ex.start):
            continue
        sigma = RegionStrategy(ex.game, w)
        taus = [HashedStrategy(ex.game.system, t) for t in range(2)]
        freqs = estimate_generalized_buchi(ex.game, sigma, taus, ex.start, 100, 200, 5, seed=3)
        assert all(f >= 0.99 for f in freqs), (ex.name, freqs)


def test_arena_simulation():
    a = FiniteArena.build({"s": ALICE, "t": ALICE},
                          {("s", "m"): {"s": F(1, 2), "t": F(1, 2)}, ("t", "m"): {"s": 1}})
    play = simulate_arena(a, [{"t"}], {"s": "m", "t": "m"}, {}, "s", 100, random.Random(4))
    assert len(play.configs) == 100 and play.goal_visits[0] > 10


def test_attractor_grows_with_horizon():
    ex = example("relay")
    sigma = HashedStrategy(ex.game.system, 1)
    short = empirical_attractor(ex.game, sigma, sigma, ex.start, 30, 50)
    long = empirical_attractor(ex.game, sigma, sigma, ex.start, 30, 400)
    assert long["median"] > short["median"]
    assert len(long["counts"]) == 30


def test_explicit_arena_rejects_unbounded_systems():
    ex = example("producer")
    with pytest.raises(ValueError):
        explicit_arena(ex.game.system, ex.game.partition, 1)
    b = bounded_examples()[0]
    arena, configs = explicit_arena(b.game.system, b.game.partition, b.bound)
    assert set(arena.states) == set(configs)
