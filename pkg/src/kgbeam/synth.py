"""Synthetic benchmark graphs with a planted answer chain, plus their oracle.

Each generated example hides a unique relation chain of ``plant_depth`` hops
from the topic entity to the gold answer, surrounded by distractor relations
fanning out to dead-end entities. Because the right chain is known by
construction, a scripted oracle can drive the search perfectly, which turns
end-to-end controller correctness into an exact, fast test: follow the
script and the answer must come out.

The repeated-entity ambiguity mode plants a chain that revisits the topic
entity, so the correct outgoing relation at that entity depends on the
previous hop. An oracle keyed on the *visible* history then solves the
benchmark only when at least one hop of history is shown; with the history
hidden it keeps replaying the first-visit action and never escapes.

Names are deterministic functions of (seed, example index); keep
``branching`` comfortably below the controller's relation cap or the planted
relation may be capped out of the prompt.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass, field

from .backends import Backend, SelectorRequest, TAG_DIRECT, TAG_EXTRACTION, TAG_ROUTING
from .paths import HOP_TEMPLATE
from .prompts import (
    NO_RELEVANT_PATH_PHRASE,
    STOP_TOKEN,
    parse_extraction_fields,
    parse_routing_fields,
)

AMBIGUITY_NONE = "none"
AMBIGUITY_REPEATED = "repeated-entity"


@dataclass(frozen=True)
class SynthSpec:
    seed: int = 42
    example_count: int = 100
    plant_depth: int = 5
    branching: int = 3
    tail_fanout: int = 2
    ambiguity_mode: str = AMBIGUITY_NONE

    def __post_init__(self) -> None:
        if self.example_count < 1:
            raise ValueError("example_count must be >= 1")
        if self.plant_depth < 1:
            raise ValueError("plant_depth must be >= 1")
        if self.branching < 0:
            raise ValueError("branching must be >= 0")
        if self.tail_fanout < 1:
            raise ValueError("tail_fanout must be >= 1")
        if self.ambiguity_mode not in (AMBIGUITY_NONE, AMBIGUITY_REPEATED):
            raise ValueError(f"unknown ambiguity mode {self.ambiguity_mode!r}")
        if self.ambiguity_mode == AMBIGUITY_REPEATED and self.plant_depth < 2:
            raise ValueError("repeated-entity ambiguity requires plant_depth >= 2")


@dataclass
class ExampleScript:
    """Per-example routing script: what the ideal selector would answer.

    ``by_entity`` keys entities whose correct relation is history-free;
    ``by_state`` keys (entity, last visible hop line) for entities whose
    correct relation depends on how they were reached, with ``None`` meaning
    the prompt showed no history. Unscripted states mean stop.
    """

    question: str
    gold: str
    by_entity: dict[str, str] = field(default_factory=dict)
    by_state: dict[tuple[str, str | None], str] = field(default_factory=dict)

    def route(self, entity: str, last_visible_hop: str | None) -> str | None:
        if (entity, last_visible_hop) in self.by_state:
            return self.by_state[(entity, last_visible_hop)]
        return self.by_entity.get(entity)


ScriptBook = dict[str, ExampleScript]


def generate(spec: SynthSpec) -> tuple[list[dict], ScriptBook]:
    """Build ``example_count`` dataset records and their routing scripts."""
    records: list[dict] = []
    book: ScriptBook = {}
    for i in range(spec.example_count):
        record, script = _generate_one(spec, i)
        records.append(record)
        book[script.question] = script
    return records, book


def _generate_one(spec: SynthSpec, i: int) -> tuple[dict, ExampleScript]:
    rng = random.Random(f"{spec.seed}:{i}")
    topic = f"e{i}_0"

    # The planted chain as a list of entities, hop t goes chain[t-1] -> chain[t].
    if spec.ambiguity_mode == AMBIGUITY_REPEATED:
        chain = [topic, topic] + [f"e{i}_{t}" for t in range(2, spec.plant_depth + 1)]
    else:
        chain = [topic] + [f"e{i}_{t}" for t in range(1, spec.plant_depth + 1)]
    gold = chain[-1]

    triples: list[list[str]] = []
    for t in range(1, len(chain)):
        triples.append([chain[t - 1], f"rel_plant_{t}", chain[t]])

    next_entity = spec.plant_depth + 1
    noise_index = 0
    on_path = list(dict.fromkeys(chain[:-1]))
    for entity in on_path:
        for _ in range(spec.branching):
            relation = f"rel_noise_{noise_index}"
            noise_index += 1
            for _ in range(spec.tail_fanout):
                triples.append([entity, relation, f"e{i}_{next_entity}"])
                next_entity += 1
    rng.shuffle(triples)

    question = f"Which entity does the planted relation chain starting at {topic} reach?"
    record = {
        "id": f"synth-{spec.seed}-{i}",
        "question": question,
        "answer": [gold],
        "q_entity": [topic],
        "a_entity": [gold],
        "graph": triples,
    }

    script = ExampleScript(question=question, gold=gold)
    if spec.ambiguity_mode == AMBIGUITY_REPEATED:
        # The revisited topic needs history to pick the right exit; the
        # kept-hidden variant replays the first-visit action forever.
        first_hop_line = HOP_TEMPLATE.format(src=topic, relation="rel_plant_1", dst=topic)
        script.by_state[(topic, None)] = "rel_plant_1"
        script.by_state[(topic, first_hop_line)] = "rel_plant_2"
        for t in range(3, len(chain)):
            script.by_entity[chain[t - 1]] = f"rel_plant_{t}"
    else:
        for t in range(1, len(chain)):
            script.by_entity[chain[t - 1]] = f"rel_plant_{t}"
    return record, script


class OracleBackend(Backend):
    """Plays each example's script from prompt text alone.

    Like any chat model, it sees nothing but the rendered prompt: current
    entity, the visible history lines, and the displayed candidates. Routing
    answers the scripted relation verbatim or STOP when unscripted;
    extraction answers the gold entity when some rendered path reaches it,
    otherwise the no-relevant-path phrase.
    """

    def __init__(self, book: ScriptBook) -> None:
        super().__init__()
        self.book = dict(book)

    def _script_for(self, question: str) -> ExampleScript:
        try:
            return self.book[question]
        except KeyError:
            raise KeyError(f"no script for question {question!r}") from None

    def _respond(self, request: SelectorRequest) -> str:
        if request.tag == TAG_ROUTING:
            fields = parse_routing_fields(request.prompt)
            script = self._script_for(fields.question)
            relation = script.route(fields.entity, fields.last_visible_hop)
            return relation if relation is not None else STOP_TOKEN
        if request.tag == TAG_EXTRACTION:
            question, path_lines = parse_extraction_fields(request.prompt)
            script = self._script_for(question)
            for line in path_lines:
                if script.gold in path_entities(line):
                    return script.gold
            return NO_RELEVANT_PATH_PHRASE
        if request.tag == TAG_DIRECT:
            # Graph-free mode has no prompt hook to find the script reliably,
            # and the oracle's whole point is reading the graph; refuse.
            return NO_RELEVANT_PATH_PHRASE
        raise ValueError(f"unknown request tag {request.tag!r}")


def path_entities(rendered: str) -> list[str]:
    """Entities of a rendered path line, in visit order."""
    return re.split(r" --\[[^\]]*\]--> ", rendered)


def oracle_backend(book: ScriptBook) -> OracleBackend:
    return OracleBackend(book)


def scripts_to_json(book: ScriptBook) -> list[dict]:
    out = []
    for script in book.values():
        out.append(
            {
                "question": script.question,
                "gold": script.gold,
                "entity_steps": script.by_entity,
                "state_steps": [
                    {"entity": entity, "prev": prev, "relation": relation}
                    for (entity, prev), relation in script.by_state.items()
                ],
            }
        )
    return out


def scripts_from_json(items: list[dict]) -> ScriptBook:
    book: ScriptBook = {}
    for item in items:
        script = ExampleScript(
            question=item["question"],
            gold=item["gold"],
            by_entity=dict(item.get("entity_steps", {})),
            by_state={
                (step["entity"], step["prev"]): step["relation"]
                for step in item.get("state_steps", [])
            },
        )
        book[script.question] = script
    return book


def write_scripts(book: ScriptBook, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(scripts_to_json(book), handle, indent=2)
        handle.write("\n")


def read_scripts(path) -> ScriptBook:
    with open(path, "r", encoding="utf-8") as handle:
        return scripts_from_json(json.load(handle))
