"""Symbolic search paths and the bounded history shown to the selector.

The controller always keeps every path exact and complete. What varies is
how much of a path the relation selector gets to SEE: a history bound K
exposes only the last K hops when the routing prompt is rendered. K = 0
hides the history entirely, K = full shows everything. Bounding what is
rendered never changes what is stored.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

OPEN = "open"
FINISHED = "finished"

EMPTY_HISTORY_MARKER = "(no previous hops)"
HOP_TEMPLATE = "{src} --[{relation}]--> {dst}"


@dataclass(frozen=True)
class HistoryBound:
    """How many trailing hops the routing prompt may show. ``None`` = all."""

    hops: int | None

    def __post_init__(self) -> None:
        if self.hops is not None and self.hops < 0:
            raise ValueError(f"history bound must be >= 0 or full, got {self.hops}")

    @classmethod
    def full(cls) -> "HistoryBound":
        return cls(hops=None)

    @classmethod
    def parse(cls, text: str) -> "HistoryBound":
        text = text.strip().lower()
        if text == "full":
            return cls.full()
        return cls(hops=int(text))

    @property
    def is_full(self) -> bool:
        return self.hops is None

    def visible_count(self, path_length: int) -> int:
        """Number of trailing hops visible for a path of ``path_length`` hops."""
        if self.hops is None:
            return path_length
        return min(self.hops, path_length)

    def __str__(self) -> str:
        return "full" if self.hops is None else str(self.hops)


@dataclass(frozen=True)
class SymbolicPath:
    """An exact entity/relation chain rooted at a topic entity.

    ``hops`` is a tuple of (relation, entity) pairs. Status only ever moves
    open -> finished; instances are immutable values, so a transition is a
    new instance.
    """

    start: str
    hops: tuple[tuple[str, str], ...] = ()
    status: str = OPEN

    def __post_init__(self) -> None:
        if self.status not in (OPEN, FINISHED):
            raise ValueError(f"unknown path status {self.status!r}")

    @property
    def tail_entity(self) -> str:
        """The entity the path currently sits on."""
        return self.hops[-1][1] if self.hops else self.start

    @property
    def length(self) -> int:
        return len(self.hops)

    @property
    def is_open(self) -> bool:
        return self.status == OPEN

    def extend(self, relation: str, entity: str) -> "SymbolicPath":
        """Append one hop, returning a new open path."""
        if self.status == FINISHED:
            raise ValueError("cannot extend a finished path")
        return replace(self, hops=self.hops + ((relation, entity),))

    def finish(self) -> "SymbolicPath":
        return replace(self, status=FINISHED)

    def entity_at(self, hop_index: int) -> str:
        """Entity occupied before hop ``hop_index`` (0 = the start entity)."""
        return self.start if hop_index == 0 else self.hops[hop_index - 1][1]


def suffix(path: SymbolicPath, bound: HistoryBound) -> list[tuple[str, str, str]]:
    """Last ``bound`` hops of ``path`` as (source, relation, target) triples."""
    count = bound.visible_count(path.length)
    if count == 0:
        return []
    first = path.length - count
    out: list[tuple[str, str, str]] = []
    for i in range(first, path.length):
        relation, target = path.hops[i]
        out.append((path.entity_at(i), relation, target))
    return out


def render_history(visible_hops: list[tuple[str, str, str]]) -> str:
    """Render hops one per line, oldest first; a marker when nothing is visible."""
    if not visible_hops:
        return EMPTY_HISTORY_MARKER
    return "\n".join(
        HOP_TEMPLATE.format(src=src, relation=relation, dst=dst)
        for src, relation, dst in visible_hops
    )


def render_path(path: SymbolicPath) -> str:
    """Render the full path as one chain line, starting at the start entity."""
    parts = [path.start]
    for relation, entity in path.hops:
        parts.append(f"--[{relation}]--> {entity}")
    return " ".join(parts)
