"""Loaders for the example games shipped with the package.

``plcs``     channel-system games (with sends; some use duplication)
``bounded``  send-free channel-system games with a channel-length bound
``arenas``   small finite arenas
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

from .formats import parse_arena, parse_config, parse_region, parse_system, read_text
from .solver import PlcsGame

DATA = Path(__file__).with_name("data")

__all__ = ["DATA", "Example", "plcs_examples", "bounded_examples", "arena_examples", "load_example"]


@dataclass
class Example:
    name: str
    path: Path
    game: PlcsGame
    start: tuple | None = None
    bound: int | None = None


def load_example(path) -> Example:
    path = Path(path)
    system = parse_system(read_text(path / "system.lcs"))
    sig = system.signature
    goals = [parse_region(read_text(p), sig) for p in sorted(path.glob("goal*.reg"))]
    part = path / "partition.reg"
    partition = parse_region(read_text(part), sig) if part.exists() else system.location_partition()
    opts = (path / "options").read_text().split() if (path / "options").exists() else []
    game = PlcsGame(system, partition, tuple(goals), dup="dup" in opts)
    start = path / "start.cfg"
    bound = path / "bound"
    return Example(
        path.name, path, game,
        parse_config(read_text(start).strip(), sig) if start.exists() else None,
        int(read_text(bound)) if bound.exists() else None,
    )


def _examples(kind):
    base = DATA / kind
    return [load_example(base / name) for name in sorted(os.listdir(base))
            if (base / name / "system.lcs").exists()]


def plcs_examples() -> list:
    return _examples("plcs")


def bounded_examples() -> list:
    return _examples("bounded")


def arena_examples() -> list:
    """``[(name, arena, goals)]`` for the shipped arena files."""
    base = DATA / "arenas"
    return [(p.name, *parse_arena(read_text(p))) for p in sorted(base.glob("*.arena"))]
