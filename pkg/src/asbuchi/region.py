"""Regular regions: finite unions of ``{q} × L1 × ... × Ld`` blocks.

Per location the set is stored in a canonical nested form.  For ``d`` channels
it is a frozenset of pairs ``(L, rest)`` where the languages ``L`` (channel 1)
are pairwise disjoint and non-empty and the ``rest`` parts (a canonical
``d-1``-channel set) are pairwise distinct and non-empty; the zero-channel set
is just ``True``.  Grouping first-channel words by their section makes the
form unique, so region equality is structural equality.  Flattening the
nesting yields pairwise disjoint product blocks.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Callable, Iterable, Iterator, Sequence

from . import automata as fa
from .automata import DFA
from .fixpoint import Lattice

__all__ = ["Signature", "Region", "RegionError", "RegionLattice", "Config"]

Config = tuple  # (location, (w1, ..., wd))


class RegionError(ValueError):
    pass


@dataclass(frozen=True)
class Signature:
    locations: tuple
    channels: tuple
    alphabet: tuple

    def __post_init__(self):
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "alphabet", tuple(sorted(self.alphabet)))
        if len(set(self.locations)) != len(self.locations):
            raise RegionError("duplicate location")
        if len(set(self.channels)) != len(self.channels):
            raise RegionError("duplicate channel")

    @property
    def d(self) -> int:
        return len(self.channels)

    def universal(self) -> DFA:
        return DFA.universal(self.alphabet)

    def lang(self, regex: str) -> DFA:
        return fa.parse_regex(regex, self.alphabet)

    def word(self, w: str) -> DFA:
        return DFA.from_words(self.alphabet, [w])

    def with_location(self, q) -> "Signature":
        if q in self.locations:
            raise RegionError(f"location {q} already present")
        return Signature(self.locations + (q,), self.channels, self.alphabet)


# -- canonical nested sets -----------------------------------------------------------


def _empty(d):
    return False if d == 0 else frozenset()


def _is_empty(a, d):
    return not a


@lru_cache(maxsize=None)
def _full(d, alphabet):
    if d == 0:
        return True
    return frozenset({(DFA.universal(alphabet), _full(d - 1, alphabet))})


def _normalize(pairs, d):
    groups: dict = {}
    for lang, rest in pairs:
        if lang.is_empty() or _is_empty(rest, d - 1):
            continue
        prev = groups.get(rest)
        groups[rest] = lang if prev is None else fa.union(prev, lang)
    return frozenset((lang, rest) for rest, lang in groups.items())


def _cover(a):
    return reduce(fa.union, (lang for lang, _ in a))


@lru_cache(maxsize=None)
def _union(a, b, d):
    if d == 0:
        return a or b
    if not a:
        return b
    if not b or a == b:
        return a
    pieces = []
    cover_a, cover_b = _cover(a), _cover(b)
    for lang, rest in a:
        for lang2, rest2 in b:
            both = fa.intersect(lang, lang2)
            if not both.is_empty():
                pieces.append((both, _union(rest, rest2, d - 1)))
        pieces.append((fa.difference(lang, cover_b), rest))
    for lang2, rest2 in b:
        pieces.append((fa.difference(lang2, cover_a), rest2))
    return _normalize(pieces, d)


@lru_cache(maxsize=None)
def _inter(a, b, d):
    if d == 0:
        return a and b
    if a == b:
        return a
    pieces = []
    for lang, rest in a:
        for lang2, rest2 in b:
            both = fa.intersect(lang, lang2)
            if not both.is_empty():
                pieces.append((both, _inter(rest, rest2, d - 1)))
    return _normalize(pieces, d)


@lru_cache(maxsize=None)
def _compl(a, d, alphabet):
    if d == 0:
        return not a
    if not a:
        return _full(d, alphabet)
    pieces = [(lang, _compl(rest, d - 1, alphabet)) for lang, rest in a]
    pieces.append((fa.complement(_cover(a)), _full(d - 1, alphabet)))
    return _normalize(pieces, d)


def _contains(a, words, d):
    if d == 0:
        return bool(a)
    for lang, rest in a:
        if lang.accepts(words[0]):
            return _contains(rest, words[1:], d - 1)
    return False


def _blocks(a, d) -> Iterator[tuple]:
    if d == 0:
        if a:
            yield ()
        return
    for lang, rest in sorted(a, key=_pair_key):
        for tail in _blocks(rest, d - 1):
            yield (lang,) + tail


def _pair_key(pair):
    lang, rest = pair
    return (lang.n, fa.to_regex(lang))


def _from_block(langs, d):
    if d == 0:
        return True
    if any(lang.is_empty() for lang in langs):
        return _empty(d)
    return frozenset({(langs[0], _from_block(langs[1:], d - 1))})


def _size(a, d):
    if d == 0:
        return 1 if a else 0
    return sum(lang.n + _size(rest, d - 1) for lang, rest in a)


# -- regions ----------------------------------------------------------------------------


class Region:
    """An immutable regular set of configurations ``(location, (w1, ..., wd))``."""

    __slots__ = ("sig", "parts", "_hash")

    def __init__(self, sig: Signature, parts: dict):
        self.sig = sig
        self.parts = {q: p for q, p in parts.items() if not _is_empty(p, sig.d)}
        for q in self.parts:
            if q not in sig.locations:
                raise RegionError(f"unknown location {q!r}")
        self._hash = hash((sig, frozenset(self.parts.items())))

    # -- constructors

    @classmethod
    def empty(cls, sig: Signature) -> "Region":
        return cls(sig, {})

    @classmethod
    def full(cls, sig: Signature) -> "Region":
        return cls(sig, {q: _full(sig.d, sig.alphabet) for q in sig.locations})

    @classmethod
    def block(cls, sig: Signature, location, langs: Sequence[DFA] | None = None) -> "Region":
        """``{location} × L1 × ... × Ld``; ``langs=None`` means all contents."""
        if langs is None:
            langs = [sig.universal()] * sig.d
        langs = tuple(langs)
        if len(langs) != sig.d:
            raise RegionError(f"expected {sig.d} channel languages, got {len(langs)}")
        for lang in langs:
            if lang.alphabet != sig.alphabet:
                raise RegionError("channel language over the wrong alphabet")
        if location not in sig.locations:
            raise RegionError(f"unknown location {location!r}")
        return cls(sig, {location: _from_block(langs, sig.d)})

    @classmethod
    def from_blocks(cls, sig: Signature, blocks: Iterable[tuple]) -> "Region":
        out = cls.empty(sig)
        for q, langs in blocks:
            out = out | cls.block(sig, q, langs)
        return out

    @classmethod
    def locations(cls, sig: Signature, locs: Iterable) -> "Region":
        return cls.from_blocks(sig, ((q, None) for q in locs))

    @classmethod
    def singleton(cls, sig: Signature, config: Config) -> "Region":
        q, words = config
        return cls.block(sig, q, [sig.word(w) for w in words])

    # -- equality and hashing

    def __eq__(self, other):
        return isinstance(other, Region) and self.sig == other.sig and self.parts == other.parts

    def __hash__(self):
        return self._hash

    def __repr__(self):
        body = "; ".join(
            f"{q}:" + ",".join(fa.to_regex(lang) for lang in langs) for q, langs in self.blocks()
        )
        return f"Region({body or '∅'})"

    def _check(self, other: "Region"):
        if not isinstance(other, Region) or other.sig != self.sig:
            raise RegionError("region signature mismatch")

    # -- Boolean algebra

    def union(self, other: "Region") -> "Region":
        self._check(other)
        d = self.sig.d
        parts = dict(self.parts)
        for q, p in other.parts.items():
            parts[q] = _union(parts[q], p, d) if q in parts else p
        return Region(self.sig, parts)

    def intersect(self, other: "Region") -> "Region":
        self._check(other)
        d = self.sig.d
        return Region(self.sig, {
            q: _inter(p, other.parts[q], d) for q, p in self.parts.items() if q in other.parts
        })

    def complement(self) -> "Region":
        sig = self.sig
        return Region(sig, {
            q: _compl(self.parts.get(q, _empty(sig.d)), sig.d, sig.alphabet) for q in sig.locations
        })

    def difference(self, other: "Region") -> "Region":
        return self.intersect(other.complement())

    __or__ = union
    __and__ = intersect
    __invert__ = complement
    __sub__ = difference

    def is_empty(self) -> bool:
        return not self.parts

    def is_full(self) -> bool:
        return self == Region.full(self.sig)

    def equals(self, other: "Region") -> bool:
        self._check(other)
        return self == other

    def issubset(self, other: "Region") -> bool:
        return self.difference(other).is_empty()

    __le__ = issubset

    def contains(self, config: Config) -> bool:
        q, words = config
        if len(words) != self.sig.d:
            raise RegionError(f"configuration has {len(words)} channels, expected {self.sig.d}")
        p = self.parts.get(q)
        return p is not None and _contains(p, tuple(words), self.sig.d)

    __contains__ = contains

    def restrict(self, locs: Iterable) -> "Region":
        locs = set(locs)
        return Region(self.sig, {q: p for q, p in self.parts.items() if q in locs})

    # -- views

    def blocks(self) -> Iterator[tuple]:
        """Pairwise disjoint ``(location, (L1, ..., Ld))`` blocks in a fixed order."""
        for q in self.sig.locations:
            if q in self.parts:
                for langs in _blocks(self.parts[q], self.sig.d):
                    yield q, langs

    def size(self) -> int:
        return sum(_size(p, self.sig.d) for p in self.parts.values())

    def members(self, max_len: int) -> Iterator[Config]:
        """All member configurations whose channel words have length ≤ ``max_len``."""
        for q, langs in self.blocks():
            yield from ((q, ws) for ws in _word_tuples(langs, max_len))

    # -- channel-wise transformers

    def map_channels(self, fn: Callable[[DFA], DFA]) -> "Region":
        """Apply a per-channel language transformer to every block."""
        out = Region.empty(self.sig)
        for q, langs in self.blocks():
            out = out | Region.block(self.sig, q, [fn(lang) for lang in langs])
        return out

    def up_closure(self) -> "Region":
        return self.map_channels(fa.up_closure)

    def down_closure(self) -> "Region":
        return self.map_channels(fa.down_closure)

    def down_interior(self) -> "Region":
        return self.complement().up_closure().complement()

    def up_interior(self) -> "Region":
        return self.complement().down_closure().complement()

    def dup_preimage(self) -> "Region":
        return self.map_channels(fa.dup_preimage)


def _word_tuples(langs, max_len):
    if not langs:
        yield ()
        return
    heads = list(langs[0].words(max_len))
    for tail in _word_tuples(langs[1:], max_len):
        for h in heads:
            yield (h,) + tail


class RegionLattice(Lattice):
    """Regions of a fixed signature, with closures and interiors registered as
    guard-tagged operators."""

    def __init__(self, sig: Signature):
        super().__init__()
        self.sig = sig
        self.bottom = Region.empty(sig)
        self.top = Region.full(sig)
        self.register("C_up", Region.up_closure, ("up",))
        self.register("K_up", Region.up_interior, ("up",))
        self.register("C_down", Region.down_closure, ("down",))
        self.register("K_down", Region.down_interior, ("down",))
        self.register("T_dup", Region.dup_preimage, ("plain",))
        self.register("neg", Region.complement, ("neg",))

    def join(self, a, b):
        return a | b

    def meet(self, a, b):
        return a & b

    def leq(self, a, b):
        return a <= b

    def size(self, a):
        return a.size()
