"""Channel systems with regular guards.

A configuration is ``(location, (w1, ..., wd))`` with one word per channel.
A rule ``q -> q'`` is enabled when the location matches, every channel word
lies in the corresponding guard language and, for a receive, the channel
starts with the received letter.  Sends append at the tail, receives take the
head.  Message perturbations are not part of a step; they are applied by the
game layer (see :func:`combined_pre`) and the simulator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from . import automata as fa
from .automata import DFA
from .region import Config, Region, RegionError, Signature

__all__ = [
    "Send",
    "Recv",
    "Internal",
    "Rule",
    "ChannelSystem",
    "SystemError_",
    "respects_guard",
    "step",
    "pre_rule",
    "wpre_rule",
    "enabled_region",
    "complete_deadlocks",
    "is_deadlock_free",
    "combined_pre",
]

ALICE = "A"
BOB = "B"


class SystemError_(ValueError):
    """Malformed channel system or rule."""


@dataclass(frozen=True)
class Send:
    channel: int
    letter: str

    def __str__(self):
        return f"!{self.letter}"


@dataclass(frozen=True)
class Recv:
    channel: int
    letter: str

    def __str__(self):
        return f"?{self.letter}"


@dataclass(frozen=True)
class Internal:
    def __str__(self):
        return "nop"


@dataclass(frozen=True)
class Rule:
    source: str
    guard: tuple
    op: object
    target: str
    name: str = ""

    def __str__(self):
        return self.name or f"{self.source}->{self.target}"


@dataclass(frozen=True, eq=False)
class ChannelSystem:
    locations: tuple
    channels: tuple
    alphabet: tuple
    rules: tuple
    owners: Mapping[str, str] = field(default_factory=dict)
    sink: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "alphabet", tuple(sorted(self.alphabet)))
        object.__setattr__(self, "owners", dict(self.owners))
        if not self.rules:
            raise SystemError_("system has no rules")
        if not self.locations:
            raise SystemError_("system has no locations")
        for letter in self.alphabet:
            if len(letter) != 1:
                raise SystemError_(f"letters must be single characters, got {letter!r}")
        known = set(self.locations)
        named = []
        for k, rule in enumerate(self.rules):
            if rule.source not in known or rule.target not in known:
                raise SystemError_(f"rule {rule}: unknown location")
            if len(rule.guard) != len(self.channels):
                raise SystemError_(f"rule {rule}: guard has {len(rule.guard)} languages, "
                                   f"expected {len(self.channels)}")
            for lang in rule.guard:
                if lang.alphabet != self.alphabet:
                    raise SystemError_(f"rule {rule}: guard over the wrong alphabet")
            if isinstance(rule.op, (Send, Recv)):
                if not 0 <= rule.op.channel < len(self.channels):
                    raise SystemError_(f"rule {rule}: channel index out of range")
                if rule.op.letter not in self.alphabet:
                    raise SystemError_(f"rule {rule}: unknown letter {rule.op.letter!r}")
            elif not isinstance(rule.op, Internal):
                raise SystemError_(f"rule {rule}: unknown operation {rule.op!r}")
            named.append(rule if rule.name else Rule(rule.source, rule.guard, rule.op,
                                                     rule.target, f"d{k}"))
        if len({r.name for r in named}) != len(named):
            raise SystemError_("duplicate rule names")
        object.__setattr__(self, "rules", tuple(named))
        for q, who in self.owners.items():
            if q not in known or who not in (ALICE, BOB):
                raise SystemError_(f"bad owner declaration for {q!r}")

    def __eq__(self, other):
        return isinstance(other, ChannelSystem) and all(
            getattr(self, f) == getattr(other, f)
            for f in ("locations", "channels", "alphabet", "rules", "owners", "sink"))

    __hash__ = None

    @property
    def signature(self) -> Signature:
        return Signature(self.locations, self.channels, self.alphabet)

    @property
    def d(self) -> int:
        return len(self.channels)

    def owner(self, q) -> str:
        return self.owners.get(q, ALICE)

    def rules_at(self, q) -> tuple:
        return tuple(r for r in self.rules if r.source == q)

    def rule(self, name) -> Rule:
        for r in self.rules:
            if r.name == name:
                return r
        raise KeyError(name)

    def trivial_guard(self) -> tuple:
        return (DFA.universal(self.alphabet),) * self.d

    def conf(self) -> Region:
        return Region.full(self.signature)

    def location_partition(self) -> Region:
        """Alice's configurations as declared by location owners."""
        return Region.locations(self.signature,
                                (q for q in self.locations if self.owner(q) == ALICE))

    def enabled(self, c: Config) -> tuple:
        return tuple(r for r in self.rules if step(c, r) is not None)


# -- concrete semantics -------------------------------------------------------------------


def respects_guard(c: Config, guard: Iterable[DFA]) -> bool:
    _, words = c
    return all(lang.accepts(w) for lang, w in zip(guard, words))


def step(c: Config, rule: Rule) -> Config | None:
    """Successor of ``c`` under ``rule``, or None when the rule is not enabled."""
    q, words = c
    if q != rule.source or not respects_guard(c, rule.guard):
        return None
    op = rule.op
    if isinstance(op, Internal):
        return rule.target, tuple(words)
    words = list(words)
    if isinstance(op, Send):
        words[op.channel] += op.letter
    else:
        if not words[op.channel].startswith(op.letter):
            return None
        words[op.channel] = words[op.channel][1:]
    return rule.target, tuple(words)


# -- symbolic pre-images ---------------------------------------------------------------------


def _guard_region(system: ChannelSystem, rule: Rule) -> Region:
    return Region.block(system.signature, rule.source, rule.guard)


def pre_rule(system: ChannelSystem, rule: Rule, R: Region) -> Region:
    """``{c | c -rule-> c' for some c' in R}``."""
    sig = system.signature
    if R.sig != sig:
        raise RegionError("region signature mismatch")
    op = rule.op
    out = Region.empty(sig)
    for q, langs in R.blocks():
        if q != rule.target:
            continue
        langs = list(langs)
        if isinstance(op, Send):
            langs[op.channel] = fa.quotient_right_letter(langs[op.channel], op.letter)
        elif isinstance(op, Recv):
            langs[op.channel] = fa.prepend_letter(op.letter, langs[op.channel])
        out = out | Region.block(sig, rule.source, langs)
    return out & _guard_region(system, rule)


def wpre_rule(system: ChannelSystem, rule: Rule, R: Region) -> Region:
    """Configurations all of whose ``rule``-successors lie in ``R`` (vacuous when
    the rule is disabled)."""
    return ~pre_rule(system, rule, ~R)


def enabled_region(system: ChannelSystem, rule: Rule) -> Region:
    return pre_rule(system, rule, system.conf())


def combined_pre(system: ChannelSystem, rule: Rule, X: Region, dup: bool = False) -> Region:
    """One game move followed by a perturbation can reach ``X``."""
    Y = X.up_closure()
    if dup:
        Y = Y.dup_preimage()
    return pre_rule(system, rule, Y)


# -- deadlock completion -------------------------------------------------------------------


def _stuck(system: ChannelSystem, q) -> Region:
    sig = system.signature
    live = Region.empty(sig)
    for rule in system.rules_at(q):
        live = live | enabled_region(system, rule)
    return Region.locations(sig, [q]) - live


def is_deadlock_free(system: ChannelSystem) -> bool:
    return all(_stuck(system, q).is_empty() for q in system.locations)


def complete_deadlocks(system: ChannelSystem, sink: str = "sink") -> ChannelSystem:
    """Add a sink location with a trivially guarded self-loop and, per original
    location, rules to the sink guarded by the blocks of that location's deadlock
    region.  A location without deadlocks gets one rule with an empty guard."""
    while sink in system.locations:
        sink += "_"
    empty = (DFA.empty(system.alphabet),) * system.d
    rules = list(system.rules)
    for q in system.locations:
        blocks = [langs for _, langs in _stuck(system, q).blocks()] or [empty]
        for k, langs in enumerate(blocks):
            suffix = f".{k}" if len(blocks) > 1 else ""
            rules.append(Rule(q, tuple(langs), Internal(), sink, f"{q}>{sink}{suffix}"))
    rules.append(Rule(sink, system.trivial_guard(), Internal(), sink, f"{sink}>{sink}"))
    owners = dict(system.owners)
    owners[sink] = ALICE
    return ChannelSystem(system.locations + (sink,), system.channels, system.alphabet,
                         tuple(rules), owners, sink)
