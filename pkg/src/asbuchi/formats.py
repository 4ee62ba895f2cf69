"""Plain-text formats for arenas, channel systems and regions.

Arena files::

    state s0 owner=A
    move s0 go -> s1:1/2 s0:1/2
    goal 1 = s1

System files::

    channels c1 c2
    alphabet a b
    location p owner=A
    location q owner=B
    rule p -> q guard c1:a*,c2:b* op c1!a
    rule q -> p op c2?b name=back

Omitted guards default to all contents.  Unless a ``deadlock-free`` line is
present and the claim actually holds, a sink location is added on load.

Region files hold one block per line, ``q`` (all contents at ``q``) or
``q:re1,re2`` (one expression per channel), or DFA dump blocks as written by
:func:`format_region`.  ``#`` starts a comment everywhere.
"""
from __future__ import annotations

import re
from fractions import Fraction

from . import automata as fa
from .arena import ALICE, BOB, ArenaError, FiniteArena, check_preconditions
from .automata import DFA, RegexError
from .lcs import ChannelSystem, Internal, Recv, Rule, Send, SystemError_, complete_deadlocks, \
    is_deadlock_free
from .region import Region, RegionError, Signature

__all__ = ["ParseError", "parse_arena", "format_arena", "parse_system", "format_system",
           "parse_region", "format_region", "parse_config", "format_config", "read_text"]


class ParseError(ValueError):
    def __init__(self, msg, line=None):
        super().__init__(f"line {line}: {msg}" if line else msg)
        self.line = line


def read_text(path) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc


def _lines(text):
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line


# -- arenas ---------------------------------------------------------------------------------


def parse_arena(text: str):
    """Returns ``(arena, goals)``; raises :class:`ParseError` on syntax or
    validation problems."""
    owner, moves, goals = {}, {}, {}
    for n, line in _lines(text):
        tok = line.split()
        if tok[0] == "state":
            m = re.fullmatch(r"state\s+(\S+)\s+owner=([AB])", line)
            if not m:
                raise ParseError("expected 'state <id> owner=A|B'", n)
            if m[1] in owner:
                raise ParseError(f"duplicate state {m[1]}", n)
            owner[m[1]] = m[2]
        elif tok[0] == "move":
            if len(tok) < 5 or tok[3] != "->":
                raise ParseError("expected 'move <state> <move> -> t:p ...'", n)
            s, mv = tok[1], tok[2]
            if (s, mv) in moves:
                raise ParseError(f"duplicate move {mv} at {s}", n)
            row = {}
            for item in tok[4:]:
                t, _, p = item.partition(":")
                try:
                    prob = Fraction(p)
                except (ValueError, ZeroDivisionError):
                    raise ParseError(f"bad probability {p!r}", n) from None
                row[t] = row.get(t, 0) + prob
            moves[s, mv] = row
        elif tok[0] == "goal":
            m = re.fullmatch(r"goal\s+(\d+)\s*=\s*(.*)", line)
            if not m:
                raise ParseError("expected 'goal <i> = <states>'", n)
            goals[int(m[1])] = frozenset(m[2].split())
        else:
            raise ParseError(f"unknown directive {tok[0]!r}", n)
    for (s, mv), row in moves.items():
        if s not in owner:
            raise ParseError(f"move {mv} on undeclared state {s}")
        for t in row:
            if t not in owner:
                raise ParseError(f"state {s} move {mv}: unknown successor {t}")
    if sorted(goals) != list(range(1, len(goals) + 1)) or not goals:
        raise ParseError("goals must be numbered 1..r with r >= 1")
    for i, g in goals.items():
        if not g or not g <= set(owner):
            raise ParseError(f"goal {i} is empty or mentions unknown states")
    try:
        arena = FiniteArena.build(owner, moves)
    except ArenaError as exc:
        raise ParseError(str(exc)) from None
    report = check_preconditions(arena)
    if not report.ok:
        raise ParseError("; ".join(report.problems))
    return arena, tuple(goals[i] for i in sorted(goals))


def format_arena(arena: FiniteArena, goals) -> str:
    out = [f"state {s} owner={arena.owner[s]}" for s in arena.states]
    for s in arena.states:
        for m in arena.moves[s]:
            row = " ".join(f"{t}:{p}" for t, p in sorted(arena.dist[s, m].items(), key=str))
            out.append(f"move {s} {m} -> {row}")
    for i, g in enumerate(goals, 1):
        out.append(f"goal {i} = " + " ".join(sorted(map(str, g))))
    return "\n".join(out) + "\n"


# -- channel systems ---------------------------------------------------------------------------


_OP = re.compile(r"(\S+?)([!?])(\S)")


def parse_system(text: str, complete: bool = True) -> ChannelSystem:
    channels = alphabet = None
    locations, owners, raw_rules = [], {}, []
    declared_free, sink = False, None
    for n, line in _lines(text):
        tok = line.split()
        head = tok[0]
        if head == "channels":
            channels = tuple(tok[1:])
        elif head == "alphabet":
            alphabet = tuple(tok[1:])
        elif head == "location":
            m = re.fullmatch(r"location\s+(\S+)(?:\s+owner=([AB]))?", line)
            if not m:
                raise ParseError("expected 'location <id> [owner=A|B]'", n)
            if m[1] in owners:
                raise ParseError(f"duplicate location {m[1]}", n)
            locations.append(m[1])
            owners[m[1]] = m[2] or ALICE
        elif head == "rule":
            raw_rules.append((n, line))
        elif head == "deadlock-free":
            declared_free = True
        elif head == "sink":
            if len(tok) != 2:
                raise ParseError("expected 'sink <location>'", n)
            sink = tok[1]
        else:
            raise ParseError(f"unknown directive {head!r}", n)
    if channels is None or alphabet is None:
        raise ParseError("missing 'channels' or 'alphabet' declaration")
    if not alphabet:
        raise ParseError("alphabet is empty")
    alphabet = tuple(sorted(alphabet))
    rules = [_parse_rule(n, line, channels, alphabet, set(locations)) for n, line in raw_rules]
    try:
        system = ChannelSystem(tuple(locations), channels, alphabet, tuple(rules), owners,
                               sink if sink in locations else None)
    except SystemError_ as exc:
        raise ParseError(str(exc)) from None
    if complete and not (declared_free and is_deadlock_free(system)):
        system = complete_deadlocks(system)
    return system


def _parse_rule(n, line, channels, alphabet, locations):
    m = re.fullmatch(r"rule\s+(\S+)\s*->\s*(\S+)(?:\s+guard\s+(.*?))?\s+op\s+(\S+)"
                     r"(?:\s+name=(\S+))?", line)
    if not m:
        raise ParseError("expected 'rule <q> -> <q'> [guard ...] op <op> [name=<id>]'", n)
    src, dst, guard_text, op_text, name = m.groups()
    for q in (src, dst):
        if q not in locations:
            raise ParseError(f"unknown location {q!r}", n)
    guard = [DFA.universal(alphabet)] * len(channels)
    if guard_text:
        for item in guard_text.split(","):
            ch, sep, expr = item.partition(":")
            ch = ch.strip()
            if not sep or ch not in channels:
                raise ParseError(f"bad guard item {item.strip()!r}", n)
            try:
                guard[channels.index(ch)] = fa.parse_regex(expr, alphabet)
            except RegexError as exc:
                raise ParseError(f"guard on {ch}: {exc}", n) from None
    if op_text == "nop":
        op = Internal()
    else:
        om = _OP.fullmatch(op_text)
        if not om:
            raise ParseError(f"bad operation {op_text!r}", n)
        if om[1] not in channels:
            raise ParseError(f"unknown channel {om[1]!r}", n)
        if om[3] not in alphabet:
            raise ParseError(f"unknown letter {om[3]!r}", n)
        cls = Send if om[2] == "!" else Recv
        op = cls(channels.index(om[1]), om[3])
    return Rule(src, tuple(guard), op, dst, name or "")


def _format_op(system, op):
    if isinstance(op, Internal):
        return "nop"
    sym = "!" if isinstance(op, Send) else "?"
    return f"{system.channels[op.channel]}{sym}{op.letter}"


def format_system(system: ChannelSystem) -> str:
    out = ["channels " + " ".join(system.channels), "alphabet " + " ".join(system.alphabet)]
    out += [f"location {q} owner={system.owner(q)}" for q in system.locations]
    if system.sink is not None:
        out.append(f"sink {system.sink}")
    for r in system.rules:
        guard = ",".join(f"{ch}:{fa.to_regex(lang)}" for ch, lang in zip(system.channels, r.guard))
        guard = f" guard {guard}" if system.d else ""
        out.append(f"rule {r.source} -> {r.target}{guard} op {_format_op(system, r.op)} name={r.name}")
    if is_deadlock_free(system):
        out.append("deadlock-free")
    return "\n".join(out) + "\n"


# -- regions ------------------------------------------------------------------------------------


def parse_region(text: str, sig: Signature) -> Region:
    """Parse compact ``q:re,...`` lines and ``block`` dumps into a region."""
    out = Region.empty(sig)
    lines = list(_lines(text))
    k = 0
    try:
        while k < len(lines):
            n, line = lines[k]
            if line.startswith("block "):
                q = line.split()[1]
                langs, k = _parse_dump_block(lines, k + 1, sig)
                out = out | _block(sig, q, langs, n)
                continue
            q, sep, rest = line.partition(":")
            q = q.strip()
            if not sep:
                out = out | _block(sig, q, None, n)
            else:
                exprs = rest.split(",")
                if len(exprs) != sig.d:
                    raise ParseError(f"expected {sig.d} channel expressions", n)
                try:
                    langs = [fa.parse_regex(e, sig.alphabet) for e in exprs]
                except RegexError as exc:
                    raise ParseError(str(exc), n) from None
                out = out | _block(sig, q, langs, n)
            k += 1
    except RegionError as exc:
        raise ParseError(str(exc)) from None
    return out


def _block(sig, q, langs, n):
    if q not in sig.locations:
        raise ParseError(f"unknown location {q!r}", n)
    return Region.block(sig, q, langs)


def _parse_dump_block(lines, k, sig):
    langs = {}
    while k < len(lines):
        n, line = lines[k]
        if line == "end":
            break
        if not line.startswith("channel "):
            raise ParseError("expected 'channel <name>' or 'end'", n)
        ch = line.split()[1]
        if ch not in sig.channels:
            raise ParseError(f"unknown channel {ch!r}", n)
        body = []
        k += 1
        while k < len(lines) and lines[k][1].split()[0] in ("states", "initial", "accepting", "trans"):
            body.append(lines[k])
            k += 1
        langs[ch] = _parse_dump(body, sig.alphabet, n)
    else:
        raise ParseError("unterminated block (missing 'end')")
    if set(langs) != set(sig.channels):
        raise ParseError("block must define every channel", lines[k][0])
    return [langs[ch] for ch in sig.channels], k + 1


def _parse_dump(body, alphabet, n0):
    n_states, initial, accepting, trans = None, 0, set(), {}
    for n, line in body:
        tok = line.split()
        try:
            if tok[0] == "states":
                n_states = int(tok[1])
            elif tok[0] == "initial":
                initial = int(tok[1])
            elif tok[0] == "accepting":
                accepting = {int(t) for t in tok[1:]}
            else:
                trans[int(tok[1]), tok[2]] = int(tok[3])
        except (IndexError, ValueError):
            raise ParseError(f"malformed DFA line {line!r}", n) from None
    if n_states is None:
        raise ParseError("DFA dump without 'states'", n0)
    try:
        return DFA.from_table(alphabet, n_states, initial, accepting, trans)
    except ValueError as exc:
        raise ParseError(f"bad DFA dump: {exc}", n0) from None


def format_region(region: Region, dumps: bool = True) -> str:
    """Blocks in a fixed order.  With ``dumps`` each block is written as DFA
    dumps annotated with a regex rendering; otherwise as compact lines."""
    sig = region.sig
    out = []
    for q, langs in region.blocks():
        if not dumps:
            out.append(f"{q}:" + ",".join(fa.to_regex(l) for l in langs) if sig.d else q)
            continue
        out.append(f"block {q}")
        for ch, lang in zip(sig.channels, langs):
            out.append(f"channel {ch}  # regex (best effort): {fa.to_regex(lang)}")
            out.extend("  " + ln for ln in lang.dump().splitlines())
        out.append("end")
    if not out:
        out.append("# empty region")
    return "\n".join(out) + "\n"


# -- configurations -----------------------------------------------------------------------------


def parse_config(text: str, sig: Signature):
    """``"q;w1;w2"`` to ``(q, (w1, w2))``."""
    parts = text.split(";")
    q, words = parts[0].strip(), tuple(w.strip() for w in parts[1:])
    if q not in sig.locations:
        raise ParseError(f"unknown location {q!r}")
    if len(words) != sig.d:
        raise ParseError(f"configuration needs {sig.d} channel words")
    for w in words:
        if any(ch not in sig.alphabet for ch in w):
            raise ParseError(f"word {w!r} uses letters outside the alphabet")
    return q, words


def format_config(c) -> str:
    return ";".join([str(c[0]), *c[1]])
