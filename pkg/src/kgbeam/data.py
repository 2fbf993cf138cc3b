"""Dataset ingestion: one JSON object per line, one subgraph per question.

Expected fields per record: ``id``, ``question``, ``answer`` (gold strings),
``q_entity`` (topic entities), ``a_entity`` (gold entities), ``graph`` (list
of [head, relation, tail] triples). Files whose fields are named differently
are loaded by passing an explicit alias map; nothing is ever guessed from
content. Malformed lines are hard errors naming the line number, because a
silently skipped record would corrupt paired comparisons downstream.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

from .graph import Triple

logger = logging.getLogger(__name__)

CANONICAL_FIELDS = ("id", "question", "answer", "q_entity", "a_entity", "graph")


@dataclass(frozen=True)
class ExampleRecord:
    example_id: str
    question: str
    gold_answers: tuple[str, ...]
    topic_entities: tuple[str, ...]
    answer_entities: tuple[str, ...]
    triples: tuple[Triple, ...]


@dataclass(frozen=True)
class DatasetStats:
    n: int
    avg_gold_answers: float
    single_gold_fraction: float


def _string_list(value, field_name: str, line_no: int) -> tuple[str, ...]:
    if not isinstance(value, list):
        raise ValueError(f"line {line_no}: field {field_name!r} must be a list of strings")
    out: list[str] = []
    for item in value:
        if not isinstance(item, str):
            raise ValueError(
                f"line {line_no}: field {field_name!r} contains a non-string entry: {item!r}"
            )
        cleaned = item.strip()
        if cleaned:
            out.append(cleaned)
    return tuple(out)


def load_dataset(
    path, field_aliases: dict[str, str] | None = None
) -> list[ExampleRecord]:
    """Parse a JSONL dataset file into validated example records.

    ``field_aliases`` maps canonical field names to the names actually used
    in the file, e.g. ``{"answer": "answers"}``. Duplicate example ids and
    malformed rows raise with the offending line number.
    """
    aliases = {name: name for name in CANONICAL_FIELDS}
    if field_aliases:
        unknown = set(field_aliases) - set(CANONICAL_FIELDS)
        if unknown:
            raise ValueError(f"unknown canonical fields in alias map: {sorted(unknown)}")
        aliases.update(field_aliases)

    records: list[ExampleRecord] = []
    seen_ids: set[str] = set()
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"line {line_no}: invalid JSON: {exc}") from exc
            if not isinstance(raw, dict):
                raise ValueError(f"line {line_no}: expected a JSON object")
            fields = {}
            for canonical in CANONICAL_FIELDS:
                actual = aliases[canonical]
                if actual not in raw:
                    raise ValueError(f"line {line_no}: missing field {actual!r}")
                fields[canonical] = raw[actual]

            example_id = fields["id"]
            if isinstance(example_id, int):
                example_id = str(example_id)
            if not isinstance(example_id, str) or not example_id:
                raise ValueError(f"line {line_no}: field 'id' must be a non-empty string")
            if example_id in seen_ids:
                raise ValueError(f"line {line_no}: duplicate example id {example_id!r}")
            seen_ids.add(example_id)

            question = fields["question"]
            if not isinstance(question, str) or not question.strip():
                raise ValueError(f"line {line_no}: field 'question' must be a non-empty string")

            graph = fields["graph"]
            if not isinstance(graph, list):
                raise ValueError(f"line {line_no}: field 'graph' must be a list of triples")
            triples: list[Triple] = []
            for j, item in enumerate(graph):
                if not isinstance(item, (list, tuple)) or len(item) != 3:
                    raise ValueError(
                        f"line {line_no}: graph entry {j} must have exactly 3 elements"
                    )
                head, relation, tail = item
                if not all(isinstance(part, str) and part.strip() for part in item):
                    raise ValueError(
                        f"line {line_no}: graph entry {j} must be three non-empty strings"
                    )
                triples.append(Triple(head.strip(), relation.strip(), tail.strip()))

            gold = _string_list(fields["answer"], "answer", line_no)
            if not gold:
                logger.warning("line %d: example %s has no gold answers", line_no, example_id)
            records.append(
                ExampleRecord(
                    example_id=example_id,
                    question=question.strip(),
                    gold_answers=gold,
                    topic_entities=_string_list(fields["q_entity"], "q_entity", line_no),
                    answer_entities=_string_list(fields["a_entity"], "a_entity", line_no),
                    triples=tuple(triples),
                )
            )
    return records


def write_dataset(records: list[dict], path) -> None:
    """Write raw record dicts as JSONL (the inverse of ``load_dataset``)."""
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


def dataset_stats(records: list[ExampleRecord]) -> DatasetStats:
    """Record count, mean gold-answer count, and single-gold fraction."""
    if not records:
        raise ValueError("dataset_stats requires at least one record")
    counts = [len(r.gold_answers) for r in records]
    return DatasetStats(
        n=len(records),
        avg_gold_answers=sum(counts) / len(counts),
        single_gold_fraction=sum(1 for c in counts if c == 1) / len(counts),
    )
