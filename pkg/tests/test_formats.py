import re

import pytest
from hypothesis import given, settings, strategies as st

from asbuchi import formats
from asbuchi.arena import random_arena
from asbuchi.corpus import DATA, plcs_examples
from asbuchi.formats import (ParseError, format_arena, format_config, format_region,
                             format_system, parse_arena, parse_config, parse_region, parse_system)

from oracles import random_region, seeded


def relay_sig():
    return next(e for e in plcs_examples() if e.name == "relay").game.sig


def doc_system():
    return re.search(r"System files::\n\n(.*?)\n\n", formats.__doc__, re.S)[1]


def test_documented_system_loads_with_one_sink():
    s = parse_system(doc_system())
    assert s.locations == ("p", "q", "sink") and s.sink == "sink"
    assert s.owner("q") == "B"
    assert s.rule("back").source == "q"


def test_no_rules():
    with pytest.raises(ParseError, match="system has no rules"):
        parse_system("channels c\nalphabet a\nlocation p\n")


@pytest.mark.parametrize("text,line", [
    ("channels c\nalphabet a\nlocation p\nrule p -> z op nop\n", 4),
    ("channels c\nalphabet a\nlocation p\n\nrule p -> p op d!a\n", 5),
    ("channels c\nalphabet a\nlocation p\nrule p -> p op c!b\n", 4),
    ("channels c\nalphabet a\nlocation p\nrule p -> p guard c:(a op nop\n", 4),
    ("channels c\nalphabet a\nbogus\n", 3),
    ("channels c\nalphabet a\nlocation p\nlocation p\n", 4),
])
def test_system_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as info:
        parse_system(text)
    assert info.value.line == line and str(info.value).startswith(f"line {line}:")


def test_declared_deadlock_free_skips_sink():
    text = "channels c\nalphabet a\nlocation p\nrule p -> p op nop\ndeadlock-free\n"
    assert parse_system(text).sink is None
    # a false claim is ignored and the sink is added anyway
    text = "channels c\nalphabet a\nlocation p\nrule p -> p op c?a\ndeadlock-free\n"
    assert parse_system(text).sink == "sink"


@pytest.mark.parametrize("ex", plcs_examples(), ids=lambda e: e.name)
def test_system_round_trip(ex):
    s = ex.game.system
    assert parse_system(format_system(s)) == s


def test_arena_row_error_names_state_and_move():
    text = "state s owner=A\nstate t owner=B\nmove s go -> t:1/2 s:1/3\nmove t m -> t:1\ngoal 1 = t\n"
    with pytest.raises(ParseError) as info:
        parse_arena(text)
    assert "s move go" in str(info.value) and "5/6" in str(info.value)


@pytest.mark.parametrize("text", [
    "state s owner=C\n",
    "state s owner=A\nmove s m -> t:1\ngoal 1 = s\n",
    "state s owner=A\nmove s m -> s:1\n",
    "state s owner=A\nmove s m -> s:1\ngoal 2 = s\n",
    "state s owner=A\nmove s m -> s:x\ngoal 1 = s\n",
    "state s owner=A\nstate t owner=A\nmove s m -> s:1\ngoal 1 = s\n",
])
def test_arena_errors(text):
    with pytest.raises(ParseError):
        parse_arena(text)


def test_arena_round_trip():
    rng = seeded(3)
    for _ in range(30):
        a, goals = random_arena(rng)
        b, goals2 = parse_arena(format_arena(a, goals))
        assert b.owner == a.owner and b.dist == a.dist and goals2 == tuple(goals)


def test_shipped_arena_files_parse():
    for path in sorted((DATA / "arenas").glob("*.arena")):
        arena, goals = parse_arena(path.read_text())
        assert arena.states and goals


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6), st.booleans())
def test_region_round_trip(seed, dumps):
    sig = relay_sig()
    r = random_region(seeded(seed), sig)
    assert parse_region(format_region(r, dumps), sig) == r


def test_region_errors():
    sig = relay_sig()
    with pytest.raises(ParseError):
        parse_region("nowhere\n", sig)
    with pytest.raises(ParseError):
        parse_region(f"{sig.locations[0]}:a*\n", sig)
    with pytest.raises(ParseError):
        parse_region(f"block {sig.locations[0]}\nchannel {sig.channels[0]}\n  states 1\n", sig)


def test_config_round_trip():
    sig = relay_sig()
    c = parse_config(f"{sig.locations[0]};ab;", sig)
    assert c == (sig.locations[0], ("ab", ""))
    assert parse_config(format_config(c), sig) == c
    with pytest.raises(ParseError):
        parse_config(f"{sig.locations[0]};ab", sig)
    with pytest.raises(ParseError):
        parse_config(f"{sig.locations[0]};zz;", sig)
