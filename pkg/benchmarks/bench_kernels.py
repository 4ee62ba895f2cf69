"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--seed 0]

Each kernel runs on the same seeded inputs under both backends; the outputs
are checked for equality before timing.
"""
import argparse
import importlib
import random
import sys
import timeit

from asbuchi import _kernels_py as py


def dfa_inputs(rng, count=200, n=40, k=2):
    out = []
    for _ in range(count):
        flat = [rng.randrange(n) for _ in range(n * k)]
        acc = [rng.random() < 0.4 for _ in range(n)]
        out.append((n, k, flat, acc))
    return out


def chain_inputs(rng, count=200, n=60):
    out = []
    for _ in range(count):
        succ = []
        for _ in range(n):
            mask = 0
            for t in rng.sample(range(n), rng.randint(1, 3)):
                mask |= 1 << t
            succ.append(mask)
        goal = sum(1 << s for s in range(n) if rng.random() < 0.2)
        out.append((n, succ, goal))
    return out


def game_inputs(rng, count=20, n=8):
    out = []
    for _ in range(count):
        alice = [rng.random() < 0.5 for _ in range(n)]
        supports = [[sum(1 << t for t in rng.sample(range(n), rng.randint(1, 2)))
                     for _ in range(rng.randint(1, 3))] for _ in range(n)]
        goal = sum(1 << s for s in range(n) if rng.random() < 0.3)
        out.append((n, alice, supports, goal, (1 << n) - 1, 10 ** 8))
    return out


KERNELS = [
    ("minimize_dfa", dfa_inputs),
    ("chain_win_mask", chain_inputs),
    ("enumerate_profiles", game_inputs),
]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    try:
        cy = importlib.import_module("asbuchi._kernels")
    except ImportError:
        print("compiled extension not built; only the Python backend is available")
        cy = None
    print(f"{'kernel':<20} {'python (s)':>11} {'cython (s)':>11} {'speedup':>8}")
    for name, make in KERNELS:
        inputs = make(random.Random(args.seed))
        fn_py = getattr(py, name)

        def run_py():
            return [fn_py(*a) for a in inputs]

        t_py = min(timeit.repeat(run_py, number=1, repeat=args.repeat))
        if cy is None:
            print(f"{name:<20} {t_py:>11.4f} {'-':>11} {'-':>8}")
            continue
        fn_cy = getattr(cy, name)

        def run_cy():
            return [fn_cy(*a) for a in inputs]

        if [_norm(x) for x in run_py()] != [_norm(x) for x in run_cy()]:
            print(f"{name}: backends disagree", file=sys.stderr)
            return 1
        t_cy = min(timeit.repeat(run_cy, number=1, repeat=args.repeat))
        print(f"{name:<20} {t_py:>11.4f} {t_cy:>11.4f} {t_py / t_cy:>7.1f}x")
    return 0


def _norm(x):
    if isinstance(x, tuple):
        return tuple(_norm(v) for v in x)
    try:
        return list(x)
    except TypeError:
        return x


if __name__ == "__main__":
    sys.exit(main())
