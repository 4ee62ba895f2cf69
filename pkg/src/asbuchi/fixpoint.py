"""Evaluation of closed mu-calculus terms over an arbitrary complete lattice.

Terms are built from named monotone operators, variables, constants and the
two fixpoint binders.  Fixpoints are computed by plain iteration from bottom
(``Mu``) or top (``Nu``) until two consecutive approximants are equal; nested
fixpoints are recomputed from scratch for every outer approximant.

Operators are registered on a :class:`Lattice` together with a variance tag
per argument:

``plain``  ordinary monotone argument
``up``     argument sits under an upward closure or upward interior
``down``   argument sits under a downward closure or downward interior
``neg``    argument is complemented (antitone)

The tags drive :func:`check_guarded` and the positivity check.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable

__all__ = [
    "Op",
    "Var",
    "Mu",
    "Nu",
    "Const",
    "Lattice",
    "SetLattice",
    "Operator",
    "ApproximantTrace",
    "FixpointRun",
    "TermError",
    "IterationBudgetExceeded",
    "NonMonotoneError",
    "evaluate",
    "check_term",
    "check_guarded",
    "free_vars",
    "unfold",
    "substitute",
    "verify_contractive_identity",
]

VARIANCES = ("plain", "up", "down", "neg")
BUILTINS = ("meet", "join")


class TermError(ValueError):
    """Malformed term: free variable, unknown operator or negative occurrence."""


class IterationBudgetExceeded(RuntimeError):
    def __init__(self, path, budget):
        super().__init__(f"fixpoint {path} did not converge within {budget} iterations")
        self.path = path
        self.budget = budget


class NonMonotoneError(RuntimeError):
    pass


# -- terms ---------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    value: Any = field(compare=False)
    label: str = "c"

    def __eq__(self, other):
        return isinstance(other, Const) and self.label == other.label and self.value is other.value

    def __hash__(self):
        return hash((self.label, id(self.value)))

    def __str__(self):
        return self.label


@dataclass(frozen=True)
class Op:
    name: str
    args: tuple = ()
    variance: tuple | None = None

    def __init__(self, name, *args, variance=None):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "variance", None if variance is None else tuple(variance))
        if self.variance is not None and len(self.variance) != len(self.args):
            raise TermError(f"{name}: {len(self.args)} args but {len(self.variance)} variances")

    def __str__(self):
        return f"{self.name}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Mu:
    var: str
    body: Any

    def __str__(self):
        return f"μ{self.var}.{self.body}"


@dataclass(frozen=True)
class Nu:
    var: str
    body: Any

    def __str__(self):
        return f"ν{self.var}.{self.body}"


Fix = (Mu, Nu)


# -- lattices ------------------------------------------------------------------


@dataclass(frozen=True)
class Operator:
    fn: Callable
    variance: tuple[str, ...]

    @property
    def arity(self):
        return len(self.variance)


class Lattice:
    """Base class for complete lattices with decidable equality.

    Subclasses provide ``bottom``, ``top``, ``join``, ``meet`` and ``equal``;
    ``size`` is a cheap size metric used in trace dumps.
    """

    bottom: Any
    top: Any

    def __init__(self):
        self.operators: dict[str, Operator] = {}

    def join(self, a, b):
        raise NotImplementedError

    def meet(self, a, b):
        raise NotImplementedError

    def equal(self, a, b) -> bool:
        return a == b

    def leq(self, a, b) -> bool:
        return self.equal(self.meet(a, b), a)

    def size(self, a) -> int:
        return 0

    def register(self, name: str, fn: Callable, variance: Iterable[str] | int):
        if isinstance(variance, int):
            variance = ("plain",) * variance
        variance = tuple(variance)
        for v in variance:
            if v not in VARIANCES:
                raise ValueError(f"unknown variance {v!r}")
        self.operators[name] = Operator(fn, variance)
        return self

    def resolve(self, name: str, arity: int) -> Operator:
        if name in self.operators:
            op = self.operators[name]
            if op.arity != arity:
                raise TermError(f"operator {name} expects {op.arity} args, got {arity}")
            return op
        if name == "meet":
            return Operator(lambda *xs: _fold(self.meet, xs, self.top), ("plain",) * arity)
        if name == "join":
            return Operator(lambda *xs: _fold(self.join, xs, self.bottom), ("plain",) * arity)
        raise TermError(f"unknown operator {name!r}")

    def apply(self, name, *args):
        """Build an ``Op`` node carrying the registered variance."""
        return Op(name, *args, variance=self.resolve(name, len(args)).variance)


def _fold(f, xs, unit):
    acc = unit
    for x in xs:
        acc = f(acc, x)
    return acc


class SetLattice(Lattice):
    """Powerset of a finite universe; elements are frozensets."""

    def __init__(self, universe: Iterable):
        super().__init__()
        self.universe = frozenset(universe)
        self.bottom = frozenset()
        self.top = self.universe

    def join(self, a, b):
        return a | b

    def meet(self, a, b):
        return a & b

    def leq(self, a, b):
        return a <= b

    def complement(self, a):
        return self.universe - a

    def size(self, a):
        return len(a)


# -- traces --------------------------------------------------------------------


@dataclass
class FixpointRun:
    path: str
    kind: str  # "mu" or "nu"
    elements: list = field(default_factory=list)

    @property
    def convergence_index(self) -> int:
        return len(self.elements) - 1


@dataclass
class ApproximantTrace:
    runs: list[FixpointRun] = field(default_factory=list)

    @property
    def convergence_index(self) -> int:
        """Iterations of the outermost fixpoint (the last run recorded)."""
        return self.runs[-1].convergence_index if self.runs else 0

    def outermost(self) -> FixpointRun | None:
        top = [r for r in self.runs if "/" not in r.path]
        return top[-1] if top else None

    def dump(self, lattice: Lattice) -> str:
        return "\n".join(
            f"{run.path} {i} {lattice.size(e)}"
            for run in self.runs
            for i, e in enumerate(run.elements)
        )

    def is_monotone(self, lattice: Lattice) -> bool:
        for run in self.runs:
            for prev, nxt in zip(run.elements, run.elements[1:]):
                ok = lattice.leq(prev, nxt) if run.kind == "mu" else lattice.leq(nxt, prev)
                if not ok:
                    return False
        return True


# -- static checks -------------------------------------------------------------


def free_vars(term) -> set[str]:
    if isinstance(term, Var):
        return {term.name}
    if isinstance(term, Const):
        return set()
    if isinstance(term, Op):
        out = set()
        for a in term.args:
            out |= free_vars(a)
        return out
    if isinstance(term, Fix):
        return free_vars(term.body) - {term.var}
    raise TermError(f"not a term: {term!r}")


def _variance(term: Op, lattice: Lattice | None):
    if term.variance is not None:
        return term.variance
    if lattice is not None:
        return lattice.resolve(term.name, len(term.args)).variance
    return ("plain",) * len(term.args)


def check_term(term, lattice: Lattice | None = None) -> None:
    """Raise :class:`TermError` unless ``term`` is closed, resolvable and positive."""
    fv = free_vars(term)
    if fv:
        raise TermError(f"free variables {sorted(fv)}")

    def walk(t, parity):
        if isinstance(t, Var):
            if parity.get(t.name, 0) % 2:
                raise TermError(f"variable {t.name} occurs negatively")
        elif isinstance(t, Op):
            if lattice is not None:
                lattice.resolve(t.name, len(t.args))
            for a, v in zip(t.args, _variance(t, lattice)):
                walk(a, {k: p + (v == "neg") for k, p in parity.items()})
        elif isinstance(t, Fix):
            walk(t.body, {**parity, t.var: 0})

    walk(term, {})


def check_guarded(term, lattice: Lattice | None = None) -> bool:
    """True iff every mu-bound variable is upward-guarded in its body and every
    nu-bound variable downward-guarded.

    Under an odd number of complementations an upward guard acts as a
    downward one and vice versa.
    """
    flip = {"up": "down", "down": "up"}

    def walk(t, scope):
        # scope: var -> (binder kind, guards seen since binder, negation parity)
        if isinstance(t, Var):
            if t.name not in scope:
                return True
            kind, seen, _ = scope[t.name]
            return ("up" if kind == "mu" else "down") in seen
        if isinstance(t, Const):
            return True
        if isinstance(t, Op):
            for a, v in zip(t.args, _variance(t, lattice)):
                inner = {}
                for k, (kind, seen, par) in scope.items():
                    if v == "neg":
                        inner[k] = (kind, seen, par ^ 1)
                    elif v in flip:
                        inner[k] = (kind, seen | {flip[v] if par else v}, par)
                    else:
                        inner[k] = (kind, seen, par)
                if not walk(a, inner):
                    return False
            return True
        if isinstance(t, Fix):
            kind = "mu" if isinstance(t, Mu) else "nu"
            return walk(t.body, {**scope, t.var: (kind, frozenset(), 0)})
        raise TermError(f"not a term: {t!r}")

    return walk(term, {})


# -- substitution ----------------------------------------------------------------

_fresh = itertools.count()


def substitute(term, name: str, replacement):
    """Capture-avoiding substitution of ``replacement`` for free ``name``."""
    if isinstance(term, Var):
        return replacement if term.name == name else term
    if isinstance(term, Const):
        return term
    if isinstance(term, Op):
        return Op(term.name, *(substitute(a, name, replacement) for a in term.args),
                  variance=term.variance)
    if isinstance(term, Fix):
        if term.var == name:
            return term
        body, var = term.body, term.var
        if var in free_vars(replacement):
            new = f"{var}'{next(_fresh)}"
            body = substitute(body, var, Var(new))
            var = new
        return type(term)(var, substitute(body, name, replacement))
    raise TermError(f"not a term: {term!r}")


def unfold(term):
    """``μX.φ(X)`` to ``φ(μX.φ(X))``, dually for ν."""
    if not isinstance(term, Fix):
        raise TermError("unfold needs a fixpoint term at the root")
    return substitute(term.body, term.var, term)


# -- evaluation ------------------------------------------------------------------


class _Evaluator:
    def __init__(self, lattice, max_iterations, trace, check_monotone):
        self.lattice = lattice
        self.budget = max_iterations
        self.trace = trace
        self.check_monotone = check_monotone
        self.ops: dict[tuple[str, int], Operator] = {}

    def op(self, name, arity):
        key = (name, arity)
        if key not in self.ops:
            self.ops[key] = self.lattice.resolve(name, arity)
        return self.ops[key]

    def eval(self, t, env, path):
        if isinstance(t, Var):
            return env[t.name]
        if isinstance(t, Const):
            return t.value
        if isinstance(t, Op):
            args = [self.eval(a, env, path) for a in t.args]
            return self.op(t.name, len(args)).fn(*args)
        if isinstance(t, Fix):
            return self.fix(t, env, path)
        raise TermError(f"not a term: {t!r}")

    def fix(self, t, env, path):
        lat = self.lattice
        kind = "mu" if isinstance(t, Mu) else "nu"
        here = f"{path}/{kind}{t.var}" if path else f"{kind}{t.var}"
        run = FixpointRun(here, kind)
        cur = lat.bottom if kind == "mu" else lat.top
        run.elements.append(cur)
        for k in range(1, self.budget + 1 if self.budget is not None else 1 << 62):
            nxt = self.eval(t.body, {**env, t.var: cur}, f"{here}#{k}")
            run.elements.append(nxt)
            if lat.equal(cur, nxt):
                if self.trace is not None:
                    self.trace.runs.append(run)
                return nxt
            if self.check_monotone:
                ok = lat.leq(cur, nxt) if kind == "mu" else lat.leq(nxt, cur)
                if not ok:
                    raise NonMonotoneError(f"approximants of {here} not monotone at step {k}")
            cur = nxt
        raise IterationBudgetExceeded(here, self.budget)


def evaluate(term, lattice: Lattice, max_iterations: int | None = 1000,
             check_monotone: bool = True, trace: bool = True):
    """Evaluate a closed term; returns ``(element, ApproximantTrace)``.

    ``max_iterations`` bounds each individual fixpoint iteration (``None`` for
    unbounded).  Raises :class:`TermError` for malformed terms,
    :class:`IterationBudgetExceeded` when a fixpoint fails to stabilize and
    :class:`NonMonotoneError` when an approximant chain is not monotone.
    """
    check_term(term, lattice)
    tr = ApproximantTrace() if trace else None
    value = _Evaluator(lattice, max_iterations, tr, check_monotone).eval(term, {}, "")
    return value, tr if tr is not None else ApproximantTrace()


def verify_contractive_identity(f: str, lattice: Lattice, max_iterations: int | None = 1000) -> bool:
    """Compare ``νX.μZ.(X ∩ f(X,Z))`` with ``νX.μZ.f(X,Z)`` for a binary operator ``f``.

    Monotonicity violations surface as :class:`NonMonotoneError`.
    """
    X, Z = Var("X"), Var("Z")
    lhs = Nu("X", Mu("Z", Op("meet", X, Op(f, X, Z))))
    rhs = Nu("X", Mu("Z", Op(f, X, Z)))
    a, _ = evaluate(lhs, lattice, max_iterations, trace=False)
    b, _ = evaluate(rhs, lattice, max_iterations, trace=False)
    return lattice.equal(a, b)
