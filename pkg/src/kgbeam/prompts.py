"""Prompt rendering and response parsing for routing and answer extraction.

The two templates below are the wire format toward any chat backend, so they
are rendered byte-deterministically: same inputs, same bytes. Parsing is the
reverse edge and is deliberately forgiving about model formatting (case,
quotes, stray whitespace) while refusing anything ambiguous.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .paths import EMPTY_HISTORY_MARKER, SymbolicPath, render_path

STOP_TOKEN = "STOP"
NO_PATHS_MARKER = "(no paths found)"
NO_RELEVANT_PATH_PHRASE = "no relevant path"

SELECT_STOP = "stop"
SELECT_RELATIONS = "relations"

ROUTING_TEMPLATE = (
    "Question: {question}\n"
    "Path history:\n"
    "{history}\n"
    "Current entity: {entity}\n"
    "Candidate relations:\n"
    "{candidates}\n"
    "Select up to {width} relations from the candidate list that help answer "
    "the question. Reply with one relation name per line, copied exactly from "
    "the list. Reply with the single token STOP if no candidate helps."
)

EXTRACTION_TEMPLATE = (
    "Question: {question}\n"
    "Paths:\n"
    "{paths}\n"
    "Answer the question using only the paths above. Reply with the answer "
    "entity names separated by commas. Reply exactly \"no relevant path\" if "
    "the paths do not contain the answer."
)

DIRECT_ANSWER_TEMPLATE = (
    "Question: {question}\n"
    "Answer the question. Reply with the answer entity names only, separated "
    "by commas."
)

_ROUTING_INSTRUCTION_PREFIX = "Select up to "
_EXTRACTION_INSTRUCTION_PREFIX = "Answer the question using only "


@dataclass(frozen=True)
class RelationSelection:
    """Parsed routing response: an explicit stop, or 0..width relation names."""

    kind: str
    relations: tuple[str, ...] = ()

    @property
    def is_stop(self) -> bool:
        return self.kind == SELECT_STOP


@dataclass(frozen=True)
class AnswerParse:
    """Parsed extraction response. ``failure`` marks a no-relevant-path reply."""

    answers: tuple[str, ...]
    failure: bool


def render_routing_prompt(
    question: str,
    history_text: str,
    entity: str,
    candidates: list[str],
    width: int,
) -> str:
    """Render the relation-selection prompt. Candidates must be non-empty."""
    if not candidates:
        raise ValueError("routing prompt requires at least one candidate relation")
    if width < 1:
        raise ValueError(f"width must be >= 1, got {width}")
    return ROUTING_TEMPLATE.format(
        question=question,
        history=history_text,
        entity=entity,
        candidates="\n".join(candidates),
        width=width,
    )


def parse_relation_selection(
    response: str, candidates: list[str], width: int
) -> RelationSelection:
    """Map a routing response onto the displayed candidate list.

    A response that is exactly STOP (any case) is a stop. Otherwise each
    non-blank line is matched against the candidates: case-insensitive exact
    match first, then case-insensitive substring containment in either
    direction, accepted only when exactly one candidate matches. Matches are
    collected in response order, deduplicated, and truncated to ``width``.
    Lines that match nothing or match ambiguously are dropped; if nothing
    matches the selection is empty and the beam will finish.
    """
    if response.strip().upper() == STOP_TOKEN:
        return RelationSelection(kind=SELECT_STOP)
    lowered = [(candidate, candidate.lower()) for candidate in candidates]
    chosen: list[str] = []
    for raw_line in response.splitlines():
        line = raw_line.strip().lower()
        if not line:
            continue
        match = None
        for candidate, low in lowered:
            if line == low:
                match = candidate
                break
        if match is None:
            contained = [c for c, low in lowered if line in low or low in line]
            if len(contained) == 1:
                match = contained[0]
        if match is not None and match not in chosen:
            chosen.append(match)
            if len(chosen) == width:
                break
    return RelationSelection(kind=SELECT_RELATIONS, relations=tuple(chosen))


def render_extraction_prompt(
    question: str, retained: list[SymbolicPath], budget: int
) -> str:
    """Render the answer-extraction prompt over the first ``budget`` paths."""
    if budget < 1:
        raise ValueError(f"extraction budget must be >= 1, got {budget}")
    shown = retained[: min(budget, len(retained))]
    block = "\n".join(render_path(p) for p in shown) if shown else NO_PATHS_MARKER
    return EXTRACTION_TEMPLATE.format(question=question, paths=block)


def render_direct_prompt(question: str) -> str:
    """Render the graph-free direct-answer prompt (question text only)."""
    return DIRECT_ANSWER_TEMPLATE.format(question=question)


def parse_answers(response: str) -> AnswerParse:
    """Split an extraction response into an ordered, deduplicated answer list.

    Splits on commas and newlines, trims whitespace and surrounding quotes,
    drops empties, and deduplicates case-insensitively keeping the first
    occurrence. A response equal to or containing the no-relevant-path phrase
    yields an empty list with the failure flag set.
    """
    if NO_RELEVANT_PATH_PHRASE in response.lower():
        return AnswerParse(answers=(), failure=True)
    answers: list[str] = []
    seen: set[str] = set()
    for piece in re.split(r"[,\n]", response):
        cleaned = piece.strip().strip("\"'").strip()
        if not cleaned or cleaned.lower() in seen:
            continue
        seen.add(cleaned.lower())
        answers.append(cleaned)
    return AnswerParse(answers=tuple(answers), failure=False)


@dataclass(frozen=True)
class RoutingFields:
    """Fields recovered from a rendered routing prompt.

    Scripted and random selectors are driven purely by prompt text, exactly
    like a remote model: whatever the prompt does not show (for example hops
    beyond the history bound) is invisible to them. This inverse parser gives
    them structured access to our own rendered format.
    """

    question: str
    history_lines: tuple[str, ...]
    entity: str
    candidates: tuple[str, ...]
    width: int

    @property
    def last_visible_hop(self) -> str | None:
        """Most recent rendered hop line, or None when history is hidden/empty."""
        if self.history_lines == (EMPTY_HISTORY_MARKER,):
            return None
        return self.history_lines[-1] if self.history_lines else None


def parse_routing_fields(prompt: str) -> RoutingFields:
    """Recover the structured fields of a prompt rendered by this module."""
    lines = prompt.split("\n")
    if not lines[0].startswith("Question: "):
        raise ValueError("not a routing prompt: missing question field")
    question = lines[0][len("Question: "):]
    try:
        history_start = lines.index("Path history:") + 1
        entity_index = next(
            i for i, ln in enumerate(lines) if ln.startswith("Current entity: ")
        )
        candidates_start = lines.index("Candidate relations:") + 1
        instruction_index = next(
            i for i, ln in enumerate(lines) if ln.startswith(_ROUTING_INSTRUCTION_PREFIX)
        )
    except (ValueError, StopIteration) as exc:
        raise ValueError("not a routing prompt: missing labeled field") from exc
    width_match = re.match(r"Select up to (\d+) relations", lines[instruction_index])
    if width_match is None:
        raise ValueError("not a routing prompt: missing width instruction")
    return RoutingFields(
        question=question,
        history_lines=tuple(lines[history_start:entity_index]),
        entity=lines[entity_index][len("Current entity: "):],
        candidates=tuple(lines[candidates_start:instruction_index]),
        width=int(width_match.group(1)),
    )


def parse_extraction_fields(prompt: str) -> tuple[str, tuple[str, ...]]:
    """Recover (question, rendered path lines) from an extraction prompt."""
    lines = prompt.split("\n")
    if not lines[0].startswith("Question: "):
        raise ValueError("not an extraction prompt: missing question field")
    question = lines[0][len("Question: "):]
    try:
        paths_start = lines.index("Paths:") + 1
        instruction_index = next(
            i
            for i, ln in enumerate(lines)
            if ln.startswith(_EXTRACTION_INSTRUCTION_PREFIX)
        )
    except (ValueError, StopIteration) as exc:
        raise ValueError("not an extraction prompt: missing paths block") from exc
    path_lines = tuple(lines[paths_start:instruction_index])
    if path_lines == (NO_PATHS_MARKER,):
        path_lines = ()
    return question, path_lines
