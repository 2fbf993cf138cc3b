"""Beam search over a question's triple graph, guided by a relation selector.

The controller owns every path exactly and symbolically. At each hop it asks
the selector, one batched prompt per open beam, which outgoing relations to
follow; the prompt shows only the bounded suffix of the beam's history. The
selector therefore decides *where to go next* while the controller guarantees
*everything claimed about the graph is true*: retained paths are verbatim
chains of input triples, never generated text.

Cost obeys fixed budgets: at most ``beam_budget`` prompts per hop, at most
``depth_limit`` hops, at most ``width ** 2`` children per expanded beam.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .backends import (
    EXTRACTION_MAX_OUTPUT,
    ROUTING_MAX_OUTPUT,
    TAG_EXTRACTION,
    TAG_ROUTING,
    AnswerOutcome,
    Backend,
    SelectorRequest,
)
from .graph import GraphIndex, capped_relations, tails
from .paths import HistoryBound, SymbolicPath, render_history, render_path, suffix
from .prompts import (
    RelationSelection,
    parse_answers,
    parse_relation_selection,
    render_extraction_prompt,
    render_routing_prompt,
)


@dataclass(frozen=True)
class SearchConfig:
    depth_limit: int = 5
    width: int = 3
    beam_budget: int = 16
    relation_cap: int = 50
    history_bound: HistoryBound = field(default_factory=HistoryBound.full)
    extraction_budget: int = 8

    def __post_init__(self) -> None:
        for name in ("depth_limit", "width", "beam_budget", "relation_cap", "extraction_budget"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")


@dataclass
class SearchTrace:
    """Accounting for one search: prompt counts, visible history, cost."""

    per_hop_prompt_count: list[int] = field(default_factory=list)
    per_hop_visible_hops: list[int] = field(default_factory=list)
    per_hop_retained: list[int] = field(default_factory=list)
    final_depth: int = 0
    retained_paths: list[SymbolicPath] = field(default_factory=list)
    llm_calls: int = 0
    input_tokens: int = 0
    output_tokens: int = 0
    error: str | None = None


@dataclass(frozen=True)
class HopRecord:
    """What one hop did, for observers (logging, invariant checks)."""

    hop_index: int
    prompted: tuple[SymbolicPath, ...]
    candidates: tuple[tuple[str, ...], ...]
    selections: tuple[RelationSelection, ...]
    children_by_parent: tuple[tuple[SymbolicPath, ...], ...]
    retained: tuple[SymbolicPath, ...]


def expand_beam(
    path: SymbolicPath,
    relations: list[str],
    index: GraphIndex,
    width: int,
    tail_chooser=None,
) -> list[SymbolicPath]:
    """Children of ``path``: selection order major, tail order minor.

    Each relation contributes its first ``width`` distinct tails, so a beam
    yields at most ``width ** 2`` children. A relation absent at the current
    entity is a contract violation (the routing parser only returns displayed
    candidates) and raises. ``tail_chooser`` replaces the first-tails rule
    with a single sampled tail per relation, for the random control.
    """
    children: list[SymbolicPath] = []
    for relation in relations:
        reachable = tails(index, path.tail_entity, relation, width)
        if not reachable:
            raise ValueError(
                f"relation {relation!r} has no tails at entity {path.tail_entity!r}"
            )
        if tail_chooser is not None:
            children.append(path.extend(relation, tail_chooser(reachable)))
        else:
            children.extend(path.extend(relation, t) for t in reachable)
    return children


def clip_beams(paths: list[SymbolicPath], budget: int) -> list[SymbolicPath]:
    """Keep at most ``budget`` paths, open before finished, order stable."""
    if budget < 1:
        raise ValueError(f"beam budget must be >= 1, got {budget}")
    open_paths = [p for p in paths if p.is_open]
    finished = [p for p in paths if not p.is_open]
    return (open_paths + finished)[:budget]


def run_search(
    question: str,
    topic_entities: list[str],
    index: GraphIndex,
    config: SearchConfig,
    backend: Backend,
    hop_observer=None,
) -> tuple[list[SymbolicPath], SearchTrace]:
    """Run the bounded beam search and return (retained paths, trace).

    One open zero-hop path is seeded per topic entity, including entities
    absent from the graph (those finish at the first hop for lack of an
    inventory). Each hop batches one routing prompt per open beam that has
    candidate relations, applies the parsed selections, carries previously
    finished paths forward, and clips to the beam budget. Finished paths are
    never prompted again. The history bound changes prompt text only; it
    never touches the stored paths.
    """
    trace = SearchTrace()
    if not topic_entities:
        trace.error = "no topic entities"
        return [], trace
    # Clip the seeds too: the per-hop prompt count must never exceed the
    # beam budget even for questions with many topic entities.
    paths: list[SymbolicPath] = clip_beams(
        [SymbolicPath(start=e) for e in topic_entities], config.beam_budget
    )
    chooser = backend.choose_tail if backend.random_tails else None

    for hop in range(config.depth_limit):
        open_entries = [
            (p, capped_relations(index, p.tail_entity, config.relation_cap))
            for p in paths
            if p.is_open
        ]
        if not open_entries:
            break

        requests: list[SelectorRequest] = []
        visible_total = 0
        for path, candidates in open_entries:
            if not candidates:
                continue
            visible = suffix(path, config.history_bound)
            visible_total += len(visible)
            requests.append(
                SelectorRequest(
                    prompt=render_routing_prompt(
                        question,
                        render_history(visible),
                        path.tail_entity,
                        candidates,
                        config.width,
                    ),
                    max_output=ROUTING_MAX_OUTPUT,
                    temperature=0.0,
                    tag=TAG_ROUTING,
                )
            )
        responses = backend.select_batch(requests) if requests else []

        trace.per_hop_prompt_count.append(len(requests))
        trace.per_hop_visible_hops.append(visible_total)
        trace.llm_calls += len(responses)
        for response in responses:
            trace.input_tokens += response.input_token_estimate
            trace.output_tokens += response.output_token_estimate
            if response.error and trace.error is None:
                trace.error = response.error

        # Previously finished paths ride along ahead of this hop's output.
        next_paths = [p for p in paths if not p.is_open]
        response_index = 0
        prompted: list[SymbolicPath] = []
        prompted_candidates: list[tuple[str, ...]] = []
        selections: list[RelationSelection] = []
        children_by_parent: list[tuple[SymbolicPath, ...]] = []
        for path, candidates in open_entries:
            if not candidates:
                next_paths.append(path.finish())
                continue
            response = responses[response_index]
            response_index += 1
            selection = parse_relation_selection(response.text, candidates, config.width)
            prompted.append(path)
            prompted_candidates.append(tuple(candidates))
            selections.append(selection)
            if selection.is_stop or not selection.relations:
                next_paths.append(path.finish())
                children_by_parent.append(())
                continue
            children = expand_beam(
                path, list(selection.relations), index, config.width, tail_chooser=chooser
            )
            if children:
                next_paths.extend(children)
            else:
                next_paths.append(path.finish())
            children_by_parent.append(tuple(children))

        paths = clip_beams(next_paths, config.beam_budget)
        trace.per_hop_retained.append(len(paths))
        if hop_observer is not None:
            hop_observer(
                HopRecord(
                    hop_index=hop,
                    prompted=tuple(prompted),
                    candidates=tuple(prompted_candidates),
                    selections=tuple(selections),
                    children_by_parent=tuple(children_by_parent),
                    retained=tuple(paths),
                )
            )

    trace.retained_paths = paths
    trace.final_depth = max((p.length for p in paths), default=0)
    return paths, trace


def extract_answers(
    question: str,
    retained: list[SymbolicPath],
    config: SearchConfig,
    backend: Backend,
) -> AnswerOutcome:
    """One extraction call over the first ``extraction_budget`` retained paths.

    An empty retained set short-circuits to an empty, flagged outcome without
    spending a call. The history bound plays no role here: extraction always
    sees full paths.
    """
    if not retained:
        return AnswerOutcome(answers=(), failure=True, response=None)
    request = SelectorRequest(
        prompt=render_extraction_prompt(question, retained, config.extraction_budget),
        max_output=EXTRACTION_MAX_OUTPUT,
        temperature=0.0,
        tag=TAG_EXTRACTION,
    )
    response = backend.select_batch([request])[0]
    parsed = parse_answers(response.text)
    failure = parsed.failure or not parsed.answers or response.error is not None
    return AnswerOutcome(answers=parsed.answers, failure=failure, response=response)


def render_retained(retained: list[SymbolicPath]) -> list[str]:
    """Full-chain renderings of retained paths, for audit rows."""
    return [render_path(p) for p in retained]
