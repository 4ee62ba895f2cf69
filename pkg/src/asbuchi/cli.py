"""Command-line entry point.

Exit codes: 0 success, 1 input error, 2 iteration or enumeration budget
exceeded, 3 validation failure.
"""
from __future__ import annotations

import argparse
import os
import random
import sys
from fractions import Fraction

from . import __version__
from .arena import ArenaError, compute_W, compute_W1, compute_Wprime, random_arena
from .fixpoint import IterationBudgetExceeded
from .formats import (ParseError, format_config, format_region, parse_arena, parse_config,
                      parse_region, parse_system, read_text)
from .kernels import BudgetExceeded
from .oracle import DEFAULT_BUDGET, oracle_win
from .region import RegionError
from .simulator import (FaultModel, FaultModelError, HashedStrategy, StrategyUndefined,
                        simulate)
from .solver import (DEFAULT_OUTER_BUDGET, GameError, PlcsGame, RegionStrategy, solve,
                     strategy_regions)

EXIT_OK, EXIT_INPUT, EXIT_BUDGET, EXIT_INVALID = 0, 1, 2, 3


class InputError(Exception):
    pass


def _fraction(text):
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def _game_args(p):
    p.add_argument("system", help="channel system file")
    p.add_argument("--goals", nargs="+", required=True, metavar="REGION",
                   help="goal region files R1 ... Rr")
    p.add_argument("--partition", metavar="REGION",
                   help="region file for Alice's configurations (default: location owners)")
    p.add_argument("--dup", action="store_true", help="messages may also be duplicated")
    p.add_argument("--budget", type=int, default=DEFAULT_OUTER_BUDGET,
                   help="iteration budget per fixpoint (default: %(default)s)")
    p.add_argument("--trace", metavar="FILE", help="write the approximant trace dump to FILE")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="asbuchi",
        description="Almost-sure generalized Büchi games on finite arenas and lossy channel systems.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute the winning region of a channel-system game")
    _game_args(p)
    p.add_argument("--compact", action="store_true", help="print regex lines instead of DFA dumps")

    p = sub.add_parser("member", help="is a configuration in the winning region?")
    _game_args(p)
    p.add_argument("--config", required=True, help='configuration "q;w1;w2"')

    p = sub.add_parser("strategy", help="print the strategy regions V_i^d")
    _game_args(p)
    p.add_argument("--compact", action="store_true", help="print regex lines instead of DFA dumps")

    p = sub.add_parser("simulate", help="sample plays of the winning strategy against Bob")
    _game_args(p)
    p.add_argument("--config", required=True, help='start configuration "q;w1;w2"')
    p.add_argument("--plays", type=int, default=1000)
    p.add_argument("--horizon", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lambda", dest="lam", type=_fraction, default=Fraction(1, 4),
                   help="per-message loss probability (default 1/4)")
    p.add_argument("--lambda-dup", dest="lam_dup", type=_fraction, default=Fraction(0),
                   help="per-message duplication probability (default 0)")
    p.add_argument("--opponents", type=int, default=3,
                   help="number of hashed memoryless Bob strategies (default 3)")
    p.add_argument("-k", type=int, default=5, help="visits per goal counted as success")
    p.add_argument("--trace-dir", help="write one file per play with its configurations")

    p = sub.add_parser("validate-finite",
                       help="cross-check the finite-arena engine against the oracle")
    p.add_argument("corpus", nargs="?", help="directory of arena files")
    p.add_argument("--random", type=int, metavar="N", help="check N random arenas instead")
    p.add_argument("--max-states", type=int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="oracle profile budget per arena")
    return parser


# -- game loading ----------------------------------------------------------------------


def load_game(args) -> PlcsGame:
    system = parse_system(read_text(args.system))
    sig = system.signature
    goals = [parse_region(read_text(path), sig) for path in args.goals]
    partition = (parse_region(read_text(args.partition), sig) if args.partition
                 else system.location_partition())
    return PlcsGame(system, partition, tuple(goals), args.dup)


def _solve(args, game):
    sol = solve(game, args.budget)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(sol.trace.dump(sol.lattice) + "\n")
    return sol


def cmd_solve(args, out):
    game = load_game(args)
    sol = _solve(args, game)
    out.write(f"# winning region, {len(sol.approximants) - 1} outer iterations\n")
    out.write(format_region(sol.winning, dumps=not args.compact))
    return EXIT_OK


def cmd_member(args, out):
    game = load_game(args)
    c = parse_config(args.config, game.sig)
    sol = _solve(args, game)
    out.write("yes\n" if sol.winning.contains(c) else "no\n")
    return EXIT_OK


def cmd_strategy(args, out):
    game = load_game(args)
    sol = _solve(args, game)
    for (i, name), region in strategy_regions(game, sol.winning, args.budget).items():
        if region.is_empty():
            continue
        out.write(f"# V_{i} {name}\n")
        out.write(format_region(region, dumps=not args.compact))
    return EXIT_OK


class _WithFallback:
    def __init__(self, primary, fallback):
        self.primary, self.fallback = primary, fallback

    def choose(self, c, mode=0):
        return self.primary.choose(c, mode) or self.fallback.choose(c, mode)

    def next_mode(self, mode, c):
        return self.primary.next_mode(mode, c)


def cmd_simulate(args, out):
    if args.dup != (args.lam_dup > 0):
        raise InputError("--dup requires --lambda-dup > 0 and vice versa")
    model = FaultModel(args.lam, args.lam_dup)
    game = load_game(args)
    c0 = parse_config(args.config, game.sig)
    sol = _solve(args, game)
    if not sol.winning.contains(c0):
        out.write(f"# start {format_config(c0)} is outside the winning region; "
                  "Alice falls back to a hashed choice\n")
    sigma = _WithFallback(RegionStrategy(game, sol.winning, args.budget),
                          HashedStrategy(game.system, -1))
    if args.trace_dir:
        os.makedirs(args.trace_dir, exist_ok=True)
    for t in range(args.opponents):
        tau = HashedStrategy(game.system, t)
        wins, visits, f0 = 0, [0] * len(game.goals), []
        for p in range(args.plays):
            rng = random.Random((args.seed + t) * 1_000_003 + p)
            play = simulate(game, sigma, tau, c0, args.horizon, rng, model)
            wins += play.wins(args.k)
            visits = [v + w for v, w in zip(visits, play.goal_visits)]
            f0.append(play.f0_visits)
            if args.trace_dir:
                path = os.path.join(args.trace_dir, f"tau{t}_play{p}.txt")
                with open(path, "w", encoding="utf-8") as fh:
                    for c, m in zip(play.configs, play.moves):
                        fh.write(f"{format_config(c)} {m}\n")
        mean = ",".join(f"R{i}:{v / args.plays:.2f}" for i, v in enumerate(visits, 1))
        f0.sort()
        out.write(f"tau=hash{t} plays={args.plays} horizon={args.horizon} "
                  f"freq(k={args.k})={wins / args.plays:.4f} mean_visits={mean} "
                  f"f0_median={f0[len(f0) // 2]}\n")
    return EXIT_OK


def _arena_cases(args):
    if args.random is not None:
        rng = random.Random(args.seed)
        for k in range(args.random):
            arena, goals = random_arena(rng, max_states=args.max_states)
            yield f"random-{k}", arena, goals
        return
    if not args.corpus:
        raise InputError("give a corpus directory or --random N")
    try:
        names = sorted(os.listdir(args.corpus))
    except OSError as exc:
        raise InputError(f"cannot list {args.corpus}: {exc.strerror}") from None
    for name in names:
        if name.endswith(".arena"):
            arena, goals = parse_arena(read_text(os.path.join(args.corpus, name)))
            yield name, arena, goals


def cmd_validate_finite(args, out):
    failed = budget = 0
    for name, arena, goals in _arena_cases(args):
        w, wp = compute_W(arena, goals), compute_Wprime(arena, goals)
        ok = w == wp
        if len(goals) == 1:
            ok = ok and compute_W1(arena, goals[0]) == w
        try:
            ok = ok and oracle_win(arena, goals, args.budget) == w
        except BudgetExceeded:
            budget += 1
            out.write(f"BUDGET {name}\n")
            continue
        failed += not ok
        out.write(f"{'PASS' if ok else 'FAIL'} {name} |W|={len(w)}\n")
    if failed:
        return EXIT_INVALID
    return EXIT_BUDGET if budget else EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "member": cmd_member,
    "strategy": cmd_strategy,
    "simulate": cmd_simulate,
    "validate-finite": cmd_validate_finite,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (IterationBudgetExceeded, BudgetExceeded) as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except StrategyUndefined as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (InputError, ParseError, GameError, RegionError, ArenaError, FaultModelError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
