"""Per-question triple graph with a capped, deterministic relation inventory.

Each question carries its own small subgraph as a list of (head, relation,
tail) triples. The index groups triples by head entity so the search
controller can ask two questions cheaply: which relations leave this entity,
and which tails does a given relation reach. Relation inventories are sorted
and capped so that prompt contents never depend on input order or graph size.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass(frozen=True)
class Triple:
    """One directed labeled edge. All three fields are non-empty strings."""

    head: str
    relation: str
    tail: str

    def __post_init__(self) -> None:
        for name in ("head", "relation", "tail"):
            value = getattr(self, name)
            if not isinstance(value, str) or not value.strip():
                raise ValueError(f"triple {name} must be a non-empty string, got {value!r}")


@dataclass
class GraphIndex:
    """Adjacency view of one example's triples, grouped by head entity.

    ``by_head`` preserves input triple order per head; duplicate triples are
    retained so the structure is a faithful multigraph view of the input.
    """

    triple_count: int = 0
    by_head: dict[str, list[tuple[str, str]]] = field(default_factory=dict)


def build_index(triples: list[Triple]) -> GraphIndex:
    """Group triples by head entity, preserving input order per head."""
    by_head: dict[str, list[tuple[str, str]]] = {}
    for t in triples:
        by_head.setdefault(t.head, []).append((t.relation, t.tail))
    return GraphIndex(triple_count=len(triples), by_head=by_head)


def capped_relations(index: GraphIndex, entity: str, cap: int) -> list[str]:
    """Distinct relations leaving ``entity``, sorted by code point, first ``cap``.

    Sorting before the cap makes the inventory a deterministic function of
    the triple set alone: for cap1 <= cap2 the smaller inventory is a prefix
    of the larger one. Unknown entities yield an empty list.
    """
    if cap < 1:
        raise ValueError(f"cap must be >= 1, got {cap}")
    pairs = index.by_head.get(entity)
    if not pairs:
        return []
    return sorted({relation for relation, _ in pairs})[:cap]


def tails(index: GraphIndex, entity: str, relation: str, limit: int) -> list[str]:
    """Distinct tails reached from ``entity`` via ``relation``, in input order.

    Dedupe keeps the first occurrence; the list is truncated to ``limit``.
    """
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    seen: set[str] = set()
    out: list[str] = []
    for rel, tail in index.by_head.get(entity, []):
        if rel != relation or tail in seen:
            continue
        seen.add(tail)
        out.append(tail)
        if len(out) == limit:
            break
    return out
