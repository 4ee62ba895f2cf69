"""Acceptance criteria.

Each test checks one criterion at its stated tolerance and prints a single
``PASS``/``FAIL`` line, visible even under output capture.  Run directly with
``python tests/test_acceptance.py`` for just the summary lines.
"""
import doctest
import itertools
import random
import statistics
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import pytest

from asbuchi.arena import (bscc_almost_sure, compute_W, compute_W1, compute_Wprime,
                           extract_strategy, memoryless_strategies, product_chain, random_arena)
from asbuchi.corpus import bounded_examples, plcs_examples
from asbuchi.fixpoint import SetLattice, verify_contractive_identity
from asbuchi.oracle import oracle_win
from asbuchi.region import Region, Signature
from asbuchi.simulator import (FaultModel, HashedStrategy, empirical_attractor, explicit_arena,
                               perturbation_support, perturbs_to, sample_perturbation,
                               simulate_arena)
from asbuchi.solver import solve

sys.path.insert(0, str(Path(__file__).parent))
from oracles import (dup_variants, extension, is_subword, random_region, seeded,  # noqa: E402
                     universe, words)

README = Path(__file__).resolve().parents[1] / "README.md"


@pytest.fixture
def report(request):
    capman = request.config.pluginmanager.getplugin("capturemanager")

    def emit(ok, label, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {label}: {detail}"
        if capman is not None:
            with capman.global_and_fixture_disabled():
                print("\n" + line)
        else:
            print(line)
        assert ok, line
    return emit


def corpus(n=200, seed=2024):
    rng = random.Random(seed)
    return [random_arena(rng, max_states=8, max_moves=3) for _ in range(n)]


# 1 ---------------------------------------------------------------------------------------


def test_1_oracle_equivalence(report):
    t0 = time.time()
    arenas = corpus()
    bad = [k for k, (a, g) in enumerate(arenas)
           if not compute_W(a, g) == compute_Wprime(a, g) == oracle_win(a, g)]
    dt = time.time() - t0
    report(not bad and dt < 300, "1 oracle equivalence",
           f"{len(arenas) - len(bad)}/{len(arenas)} arenas with W = W' = oracle in {dt:.1f}s")


# 2 ---------------------------------------------------------------------------------------


def random_monotone_operator(rng, base):
    subsets = [frozenset(c) for r in range(len(base) + 1) for c in itertools.combinations(base, r)]
    gens = {e: [(rng.choice(subsets), rng.choice(subsets)) for _ in range(rng.randint(0, 3))]
            for e in base}
    return lambda x, z: frozenset(e for e in base if any(a <= x and b <= z for a, b in gens[e]))


def test_2_single_buchi_collapse(report):
    t0 = time.time()
    single = [(a, g) for a, g in corpus() if len(g) == 1]
    extra = [random_arena(random.Random(k), r=1) for k in range(100)]
    bad = sum(compute_W1(a, g[0]) != compute_W(a, g) for a, g in single + extra)
    rng = random.Random(7)
    ops_ok = 0
    for _ in range(50):
        lat = SetLattice(range(4))
        lat.register("f", random_monotone_operator(rng, range(4)), 2)
        ops_ok += verify_contractive_identity("f", lat)
    dt = time.time() - t0
    report(bad == 0 and ops_ok == 50 and dt < 60, "2 single-Büchi collapse",
           f"W1 = W on {len(single) + len(extra) - bad}/{len(single) + len(extra)} r=1 arenas, "
           f"contractive identity on {ops_ok}/50 operators, {dt:.1f}s")


# 3 ---------------------------------------------------------------------------------------


def test_3_strategy_soundness(report):
    t0 = time.time()
    sub = [(a, g) for a, g in corpus() if compute_W(a, g)][:20]
    exact_fail = checks = 0
    worst = 1.0
    for n, (arena, goals) in enumerate(sub):
        w = compute_W(arena, goals)
        sigma = extract_strategy(arena, goals, w)
        taus = list(memoryless_strategies(arena, arena.bob_states))
        for tau in taus:
            chain, goal = product_chain(arena, sigma, tau)
            for c in w:
                checks += 1
                exact_fail += not bscc_almost_sure(chain, (c, 0), goal)
        rng = random.Random(n)
        starts = sorted(w)
        wins = 0
        for p in range(1000):
            play = simulate_arena(arena, goals, sigma, rng.choice(taus), rng.choice(starts),
                                  200, random.Random(n * 1_000_003 + p))
            wins += play.wins(5)
        worst = min(worst, wins / 1000)
    dt = time.time() - t0
    report(len(sub) == 20 and exact_fail == 0 and worst >= 0.99 and dt < 600,
           "3 strategy soundness",
           f"{checks - exact_fail}/{checks} exact (c, tau) checks on {len(sub)} arenas, "
           f"worst simulated frequency {worst:.3f} (>= 0.99), {dt:.1f}s")


# 4 ---------------------------------------------------------------------------------------


SIG1 = Signature(("p", "q"), ("x",), ("a", "b"))
SIG2 = Signature(("p", "q"), ("x", "y"), ("a", "b"))


def has_superword(dfa, w):
    seen, todo = {(0, 0)}, [(0, 0)]
    while todo:
        s, k = todo.pop()
        if k == len(w) and s in dfa.accepting:
            return True
        for i, a in enumerate(dfa.alphabet):
            nxt = (dfa.delta[s][i], k + 1 if k < len(w) and w[k] == a else k)
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return False


def down_member(region, c):
    q, (w,) = c
    return any(bq == q and has_superword(langs[0], w) for bq, langs in region.blocks())


def region_case(seed):
    """One randomized case: laws on two channels, extensional checks on one."""
    rng = seeded(seed)
    r, s = random_region(rng, SIG2), random_region(rng, SIG2)
    lo, hi = r & s, r | s
    for c in (Region.up_closure, Region.down_closure):
        if not (r <= c(r) and c(c(r)) == c(r) and c(lo) <= c(hi)):
            return False
    for k in (Region.down_interior, Region.up_interior):
        if not (k(r) <= r and k(k(r)) == k(r) and k(lo) <= k(hi)):
            return False
    if r.down_interior() != ~(~r).up_closure() or r.up_interior() != ~(~r).down_closure():
        return False
    once = r.up_closure().dup_preimage()
    if not (once == once.up_closure() == r.dup_preimage().up_closure()):
        return False
    if (r == s) != ((r - s) | (s - r)).is_empty():
        return False
    # extensional agreement, one channel, words up to length 5
    a, b = random_region(rng, SIG1), random_region(rng, SIG1)
    ea, eb, u = extension(a, 5), extension(b, 5), universe(SIG1, 5)
    if not (extension(a | b, 5) == ea | eb and extension(a & b, 5) == ea & eb
            and extension(~a, 5) == u - ea and extension(a - b, 5) == ea - eb):
        return False
    up = {c for c in u if any(c[0] == q and is_subword(v[0], c[1][0]) for q, v in ea)}
    if extension(a.up_closure(), 5) != up:
        return False
    down = a.down_closure()
    if any(down.contains(c) != down_member(a, c) for c in u):
        return False
    big = extension(a, 6)
    dup = {c for c in universe(SIG1, 3)
           if any((c[0], (v,)) in big for v in dup_variants(c[1][0]))}
    return extension(a.dup_preimage(), 3) == dup


def test_4_region_laws(report):
    t0 = time.time()
    n = 500
    bad = [seed for seed in range(n) if not region_case(seed)]
    dt = time.time() - t0
    report(not bad and dt < 120, "4 region algebra laws",
           f"{n - len(bad)}/{n} randomized cases exact, {dt:.1f}s")


# 5 ---------------------------------------------------------------------------------------


def test_5_symbolic_explicit(report):
    t0 = time.time()
    agree = []
    for ex in bounded_examples():
        game = ex.game
        w = solve(game).winning
        arena, configs = explicit_arena(game.system, game.partition, ex.bound)
        goals = [frozenset(c for c in configs if g.contains(c)) for g in game.goals]
        explicit = compute_W(arena, goals)
        agree.append((ex.name, explicit == {c for c in configs if w.contains(c)}))
    dt = time.time() - t0
    names = ", ".join(f"{n}={'ok' if ok else 'MISMATCH'}" for n, ok in agree)
    report(len(agree) == 5 and all(ok for _, ok in agree) and dt < 120,
           "5 symbolic-explicit consistency", f"{names}, {dt:.1f}s")


# 6 ---------------------------------------------------------------------------------------


def test_6_guarded_convergence(report):
    rows, ok = [], True
    for ex in plcs_examples():
        sig = ex.game.sig
        small = (len(ex.game.system.locations) - 1 <= 4 and sig.d <= 2
                 and len(sig.alphabet) <= 2 and len(ex.game.goals) <= 2)
        t0 = time.time()
        sol = solve(ex.game, budget=200)
        dt = time.time() - t0
        seq = sol.approximants
        mono = sol.trace.is_monotone(sol.lattice) and all(b <= a for a, b in zip(seq, seq[1:]))
        ok = ok and small and mono and dt < 60
        rows.append(f"{ex.name} {len(seq) - 1} steps {dt:.2f}s")
    report(ok and len(rows) >= 5, "6 guarded convergence", "; ".join(rows))


# 7 ---------------------------------------------------------------------------------------


def sampler_case(w, model, rng, sig):
    c = ("q", (w,))
    support = perturbation_support(c, model.dup)
    longest = 2 * len(w) if model.dup else len(w)
    related = {("q", (v,)) for v in words(("a", "b"), longest)
               if perturbs_to(sig, c, ("q", (v,)), model.dup)}
    missing = set(support)
    for _ in range(10 ** 5):
        if not missing:
            break
        missing.discard(sample_perturbation(c, model, rng))
    return support == related and not missing


def test_7_sampler(report):
    sig = Signature(("q",), ("x",), ("a", "b"))
    rng = random.Random(1)
    cases = ok = 0
    for model in (FaultModel(F(1, 4)), FaultModel(F(1, 4), F(1, 8))):
        for w in words(("a", "b"), 3):
            cases += 1
            ok += sampler_case(w, model, rng, sig)
    growth = []
    for ex in plcs_examples() + bounded_examples():
        sys_ = ex.game.system
        sigma, tau = HashedStrategy(sys_, 1), HashedStrategy(sys_, 2)
        m = [empirical_attractor(ex.game, sigma, tau, ex.start, 30, h, seed=5)["median"]
             for h in (50, 400)]
        growth.append((ex.name, m[0], m[1]))
    grows = all(b > a for _, a, b in growth)
    detail = ", ".join(f"{n} {a}->{b}" for n, a, b in growth)
    report(ok == cases and grows, "7 sampler well-behavedness",
           f"support = relation and fully hit on {ok}/{cases} words; F0 median {detail}")


# 8 ---------------------------------------------------------------------------------------


def test_8_precondition_docs(report):
    result = doctest.testfile(str(README), module_relative=False, verbose=False,
                              optionflags=doctest.ELLIPSIS)
    report(result.failed == 0 and result.attempted >= 8, "8 precondition documentation",
           f"{result.attempted - result.failed}/{result.attempted} README examples pass")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
