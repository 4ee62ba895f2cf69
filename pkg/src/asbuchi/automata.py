"""Minimal deterministic automata over small message alphabets.

Every :class:`DFA` is complete, minimal and canonically numbered (breadth-first
from the initial state, letters in sorted order), so two automata accept the
same language exactly when they compare equal.  All constructions return new
canonical automata; instances are immutable and hashable.
"""
from __future__ import annotations

from collections import deque
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from . import kernels

__all__ = [
    "DFA",
    "RegexError",
    "parse_regex",
    "union",
    "intersect",
    "difference",
    "complement",
    "up_closure",
    "down_closure",
    "dup_preimage",
    "quotient_right_letter",
    "prepend_letter",
    "to_regex",
]


class RegexError(ValueError):
    pass


class DFA:
    __slots__ = ("alphabet", "n", "accepting", "delta", "_key", "_hash")

    def __init__(self, alphabet, n, accepting, delta):
        # callers outside this module go through the constructors below
        self.alphabet = tuple(alphabet)
        self.n = n
        self.accepting = frozenset(accepting)
        self.delta = tuple(tuple(row) for row in delta)
        self._key = (self.alphabet, n, tuple(sorted(self.accepting)), self.delta)
        self._hash = hash(self._key)

    # -- construction -----------------------------------------------------

    @classmethod
    def empty(cls, alphabet: Sequence[str]) -> "DFA":
        alphabet = tuple(sorted(alphabet))
        return cls(alphabet, 1, (), [[0] * len(alphabet)])

    @classmethod
    def universal(cls, alphabet: Sequence[str]) -> "DFA":
        alphabet = tuple(sorted(alphabet))
        return cls(alphabet, 1, (0,), [[0] * len(alphabet)])

    @classmethod
    def epsilon(cls, alphabet: Sequence[str]) -> "DFA":
        return cls.from_words(alphabet, [""])

    @classmethod
    def from_words(cls, alphabet: Sequence[str], words: Iterable[Sequence[str]]) -> "DFA":
        alphabet = tuple(sorted(alphabet))
        trie: list[dict[str, int]] = [{}]
        final = set()
        for w in words:
            s = 0
            for a in w:
                if a not in alphabet:
                    raise ValueError(f"letter {a!r} not in alphabet {alphabet}")
                nxt = trie[s].get(a)
                if nxt is None:
                    trie.append({})
                    nxt = trie[s][a] = len(trie) - 1
                s = nxt
            final.add(s)
        return _from_nfa(alphabet, {0}, final, lambda s, a: (trie[s][a],) if a in trie[s] else ())

    @classmethod
    def from_regex(cls, alphabet: Sequence[str], text: str) -> "DFA":
        return parse_regex(text, alphabet)

    @classmethod
    def from_table(cls, alphabet, n, initial, accepting, transitions) -> "DFA":
        """Build from an explicit (possibly partial) transition table.

        ``transitions`` maps ``(src, letter)`` to ``dst``; missing entries go
        to an implicit rejecting sink.
        """
        alphabet = tuple(sorted(alphabet))
        if not 0 <= initial < n or not all(0 <= s < n for s in accepting):
            raise ValueError("initial or accepting state out of range")
        for (s, a), t in transitions.items():
            if a not in alphabet or not (0 <= s < n and 0 <= t < n):
                raise ValueError(f"bad transition {s} {a} {t}")
        return _from_nfa(
            alphabet,
            {initial},
            set(accepting),
            lambda s, a: (transitions[s, a],) if (s, a) in transitions else (),
        )

    # -- queries ----------------------------------------------------------

    def __eq__(self, other):
        return isinstance(other, DFA) and self._key == other._key

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"DFA({to_regex(self)!r} over {''.join(self.alphabet)})"

    def letter_index(self, a: str) -> int:
        try:
            return self.alphabet.index(a)
        except ValueError:
            raise ValueError(f"letter {a!r} not in alphabet {self.alphabet}") from None

    def run(self, word: Sequence[str], state: int = 0) -> int:
        for a in word:
            state = self.delta[state][self.letter_index(a)]
        return state

    def accepts(self, word: Sequence[str]) -> bool:
        return self.run(word) in self.accepting

    __contains__ = accepts

    def is_empty(self) -> bool:
        # canonical form keeps only reachable states
        return not self.accepting

    def is_universal(self) -> bool:
        return len(self.accepting) == self.n

    def is_subset(self, other: "DFA") -> bool:
        return difference(self, other).is_empty()

    def words(self, max_len: int) -> Iterator[str]:
        """Accepted words up to ``max_len``, shortest first, then lexicographic."""
        frontier = [("", 0)]
        for _ in range(max_len + 1):
            nxt = []
            for w, s in frontier:
                if s in self.accepting:
                    yield w
                for k, a in enumerate(self.alphabet):
                    nxt.append((w + a, self.delta[s][k]))
            frontier = nxt

    def dump(self) -> str:
        lines = [f"states {self.n}", "initial 0"]
        lines.append(" ".join(["accepting", *map(str, sorted(self.accepting))]))
        for s in range(self.n):
            for k, a in enumerate(self.alphabet):
                lines.append(f"trans {s} {a} {self.delta[s][k]}")
        return "\n".join(lines)


# -- core machinery ----------------------------------------------------------


def _from_nfa(alphabet, initial, final, succ, eps=None) -> DFA:
    """Subset construction followed by minimization.

    ``succ(state, letter)`` yields NFA successors; ``eps(state)`` (optional)
    yields epsilon successors.
    """
    def closure(states):
        if eps is None:
            return frozenset(states)
        seen = set(states)
        stack = list(states)
        while stack:
            s = stack.pop()
            for t in eps(s):
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return frozenset(seen)

    start = closure(initial)
    index = {start: 0}
    order = [start]
    delta: list[list[int]] = []
    i = 0
    while i < len(order):
        cur = order[i]
        row = []
        for a in alphabet:
            tgt = set()
            for s in cur:
                tgt.update(succ(s, a))
            tgt = closure(tgt)
            j = index.get(tgt)
            if j is None:
                j = index[tgt] = len(order)
                order.append(tgt)
            row.append(j)
        delta.append(row)
        i += 1
    accepting = [j for j, sset in enumerate(order) if not sset.isdisjoint(final)]
    return _minimal(alphabet, len(order), accepting, delta)


def _minimal(alphabet, n, accepting, delta) -> DFA:
    k = len(alphabet)
    flat = [t for row in delta for t in row] if k else []
    acc = [0] * n
    for s in accepting:
        acc[s] = 1
    m, acc2, flat2 = kernels.minimize_dfa(n, k, flat, acc)
    rows = [flat2[s * k:(s + 1) * k] for s in range(m)]
    return DFA(alphabet, m, [s for s in range(m) if acc2[s]], rows)


def _check_alphabets(*dfas: DFA) -> tuple[str, ...]:
    alpha = dfas[0].alphabet
    for d in dfas[1:]:
        if d.alphabet != alpha:
            raise ValueError(f"alphabet mismatch: {alpha} vs {d.alphabet}")
    return alpha


def _product(x: DFA, y: DFA, accept) -> DFA:
    alpha = _check_alphabets(x, y)
    k = len(alpha)
    index = {(0, 0): 0}
    order = [(0, 0)]
    delta = []
    i = 0
    while i < len(order):
        p, q = order[i]
        row = []
        for c in range(k):
            t = (x.delta[p][c], y.delta[q][c])
            j = index.get(t)
            if j is None:
                j = index[t] = len(order)
                order.append(t)
            row.append(j)
        delta.append(row)
        i += 1
    acc = [j for j, (p, q) in enumerate(order) if accept(p in x.accepting, q in y.accepting)]
    return _minimal(alpha, len(order), acc, delta)


@lru_cache(maxsize=None)
def union(x: DFA, y: DFA) -> DFA:
    if x == y or y.is_empty() or x.is_universal():
        return x
    if x.is_empty() or y.is_universal():
        return y
    return _product(x, y, lambda a, b: a or b)


@lru_cache(maxsize=None)
def intersect(x: DFA, y: DFA) -> DFA:
    if x == y or y.is_universal() or x.is_empty():
        return x
    if x.is_universal() or y.is_empty():
        return y
    return _product(x, y, lambda a, b: a and b)


@lru_cache(maxsize=None)
def difference(x: DFA, y: DFA) -> DFA:
    return _product(x, y, lambda a, b: a and not b)


@lru_cache(maxsize=None)
def complement(x: DFA) -> DFA:
    # complete DFAs complement by flipping acceptance; minimal stays minimal
    return DFA(x.alphabet, x.n, [s for s in range(x.n) if s not in x.accepting], x.delta)


@lru_cache(maxsize=None)
def up_closure(x: DFA) -> DFA:
    """Supersequence closure: every letter may also be read as a self-loop."""
    alpha = x.alphabet

    def succ(s, a):
        return (s, x.delta[s][alpha.index(a)])

    return _from_nfa(alpha, {0}, x.accepting, succ)


@lru_cache(maxsize=None)
def down_closure(x: DFA) -> DFA:
    """Subword closure: every transition may also be skipped silently."""
    alpha = x.alphabet

    def succ(s, a):
        return (x.delta[s][alpha.index(a)],)

    def eps(s):
        return x.delta[s]

    return _from_nfa(alpha, {0}, x.accepting, succ, eps)


@lru_cache(maxsize=None)
def dup_preimage(x: DFA) -> DFA:
    """Words u with some v in the language obtained by replacing each a in u by a or aa."""
    alpha = x.alphabet

    def succ(s, a):
        c = alpha.index(a)
        t = x.delta[s][c]
        return (t, x.delta[t][c])

    return _from_nfa(alpha, {0}, x.accepting, succ)


@lru_cache(maxsize=None)
def quotient_right_letter(x: DFA, a: str) -> DFA:
    """{w | w.a in L}."""
    c = x.letter_index(a)
    acc = [s for s in range(x.n) if x.delta[s][c] in x.accepting]
    return _minimal(x.alphabet, x.n, acc, [list(r) for r in x.delta])


@lru_cache(maxsize=None)
def prepend_letter(a: str, x: DFA) -> DFA:
    """{a.w | w in L}."""
    c = x.letter_index(a)
    k = len(x.alphabet)
    # new initial 0, old states shifted by one, rejecting sink last
    n = x.n + 2
    sink = n - 1
    delta = [[sink] * k]
    delta[0][c] = 1
    for row in x.delta:
        delta.append([t + 1 for t in row])
    delta.append([sink] * k)
    return _minimal(x.alphabet, n, [s + 1 for s in x.accepting], delta)


# -- regular expressions -------------------------------------------------------

_SPECIAL = set("|*+?().")
_EPS = {"ε"}
_EMPTY = {"∅"}


class _Nfa:
    def __init__(self):
        self.trans: list[list[tuple[str | None, int]]] = []

    def new(self):
        self.trans.append([])
        return len(self.trans) - 1


class _RegexParser:
    def __init__(self, text, alphabet):
        self.toks = [ch for ch in text if not ch.isspace()]
        self.pos = 0
        self.alphabet = alphabet
        self.nfa = _Nfa()

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self):
        ch = self.peek()
        self.pos += 1
        return ch

    def error(self, msg):
        return RegexError(f"{msg} at position {self.pos} in {''.join(self.toks)!r}")

    # each production returns an NFA fragment (start, end)
    def alt(self):
        frags = [self.concat()]
        while self.peek() == "|":
            self.take()
            frags.append(self.concat())
        if len(frags) == 1:
            return frags[0]
        s, e = self.nfa.new(), self.nfa.new()
        for fs, fe in frags:
            self.nfa.trans[s].append((None, fs))
            self.nfa.trans[fe].append((None, e))
        return s, e

    def concat(self):
        s = e = self.nfa.new()
        while self.peek() is not None and self.peek() not in "|)":
            fs, fe = self.repeat()
            self.nfa.trans[e].append((None, fs))
            e = fe
        return s, e

    def repeat(self):
        fs, fe = self.atom()
        while self.peek() in ("*", "+", "?"):
            op = self.take()
            s, e = self.nfa.new(), self.nfa.new()
            self.nfa.trans[s].append((None, fs))
            self.nfa.trans[fe].append((None, e))
            if op in "*?":
                self.nfa.trans[s].append((None, e))
            if op in "*+":
                self.nfa.trans[fe].append((None, fs))
            fs, fe = s, e
        return fs, fe

    def atom(self):
        ch = self.take()
        if ch is None:
            raise self.error("unexpected end of expression")
        if ch == "(":
            frag = self.alt()
            if self.take() != ")":
                raise self.error("missing ')'")
            return frag
        s, e = self.nfa.new(), self.nfa.new()
        if ch in _EPS:
            self.nfa.trans[s].append((None, e))
        elif ch in _EMPTY:
            pass
        elif ch == ".":
            for a in self.alphabet:
                self.nfa.trans[s].append((a, e))
        elif ch in _SPECIAL:
            raise self.error(f"unexpected {ch!r}")
        elif ch in self.alphabet:
            self.nfa.trans[s].append((ch, e))
        else:
            raise self.error(f"letter {ch!r} not in alphabet")
        return s, e


def parse_regex(text: str, alphabet: Sequence[str]) -> DFA:
    """Compile a regular expression (letters, ``.``, ``|``, ``*``, ``+``, ``?``,
    parentheses, ``ε``/``()`` for the empty word, ``∅`` for the empty set)."""
    alphabet = tuple(sorted(alphabet))
    for a in alphabet:
        if len(a) != 1 or a in _SPECIAL or a in _EPS or a in _EMPTY or a.isspace():
            raise RegexError(f"unsupported letter {a!r}: letters must be single plain characters")
    p = _RegexParser(text, alphabet)
    s, e = p.alt()
    if p.pos != len(p.toks):
        raise p.error("trailing input")
    trans = p.nfa.trans

    def succ(q, a):
        return [t for lab, t in trans[q] if lab == a]

    def eps(q):
        return [t for lab, t in trans[q] if lab is None]

    return _from_nfa(alphabet, {s}, {e}, succ, eps)


# -- back-rendering -------------------------------------------------------------


def _alt(x, y):
    if x is None:
        return y
    if y is None or x == y:
        return x
    return f"{x}|{y}"


def _cat(x, y):
    if x is None or y is None:
        return None
    if x == "ε":
        return y
    if y == "ε":
        return x
    return _group(x) + _group(y)


def _star(x):
    if x is None or x == "ε":
        return "ε"
    if x.endswith("*") and _atomic(x[:-1]):
        return x
    return (x if _atomic(x) else f"({x})") + "*"


def _atomic(x):
    if len(x) == 1:
        return True
    if x.startswith("(") and x.endswith(")"):
        depth = 0
        for i, ch in enumerate(x):
            depth += ch == "("
            depth -= ch == ")"
            if depth == 0 and i < len(x) - 1:
                return False
        return True
    return False


def _group(x):
    """Parenthesize ``x`` if it has a top-level alternation."""
    depth = 0
    for ch in x:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "|" and depth == 0:
            return f"({x})"
    return x


@lru_cache(maxsize=None)
def to_regex(x: DFA) -> str:
    """Regular expression for the language of ``x`` by state elimination."""
    if x.is_empty():
        return "∅"
    if x.is_universal():
        return "." + "*"
    # prune the rejecting sink to keep expressions short
    live = _coreachable(x)
    n = x.n
    init, final = n, n + 1
    edge: dict[tuple[int, int], str | None] = {}

    def add(p, q, r):
        edge[p, q] = _alt(edge.get((p, q)), r)

    add(init, 0, "ε")
    for s in range(n):
        if s not in live:
            continue
        if s in x.accepting:
            add(s, final, "ε")
        by_target: dict[int, list[str]] = {}
        for c, a in enumerate(x.alphabet):
            t = x.delta[s][c]
            if t in live:
                by_target.setdefault(t, []).append(a)
        for t, letters in by_target.items():
            lab = "." if len(letters) == len(x.alphabet) and len(letters) > 1 else "|".join(letters)
            if len(letters) > 1 and lab != ".":
                lab = f"({lab})"
            add(s, t, lab)
    for s in sorted(live, reverse=True):
        loop = edge.pop((s, s), None)
        ins = [(p, r) for (p, q), r in edge.items() if q == s]
        outs = [(q, r) for (p, q), r in edge.items() if p == s]
        for p, _ in ins:
            del edge[p, s]
        for q, _ in outs:
            del edge[s, q]
        mid = _star(loop) if loop is not None else "ε"
        for p, rin in ins:
            for q, rout in outs:
                add(p, q, _cat(_cat(rin, mid), rout))
    return edge.get((init, final)) or "∅"


def _coreachable(x: DFA) -> set[int]:
    rev: dict[int, set[int]] = {}
    for s in range(x.n):
        for t in x.delta[s]:
            rev.setdefault(t, set()).add(s)
    seen = set(x.accepting)
    todo = deque(seen)
    while todo:
        t = todo.popleft()
        for s in rev.get(t, ()):
            if s not in seen:
                seen.add(s)
                todo.append(s)
    return seen
