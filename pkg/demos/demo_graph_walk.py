"""
Walking a question subgraph with a scripted relation selector
=============================================================

A miniature end-to-end tour: build a labeled directed graph from triples,
ask a question, and let the beam controller walk the graph while a scripted
stand-in plays the role of the language model. Everything the "model" sees
is plain prompt text, and everything it answers travels back as plain text,
so the whole loop is inspectable from the terminal.
"""

from kgbeam.backends import Backend, TAG_ROUTING
from kgbeam.graph import Triple, build_index, capped_relations, tails
from kgbeam.paths import HistoryBound, render_history, suffix
from kgbeam.prompts import STOP_TOKEN, parse_routing_fields, render_routing_prompt
from kgbeam.search import SearchConfig, extract_answers, render_retained, run_search

# ---------------------------------------------------------------------------
# A tiny knowledge graph about a fictional film, as (head, relation, tail)
# triples. Real datasets ship one such subgraph per question.

triples = [
    Triple("Midnight Harbor", "directed_by", "Ana Flores"),
    Triple("Midnight Harbor", "released_in", "1998"),
    Triple("Midnight Harbor", "starring", "Tom Vega"),
    Triple("Midnight Harbor", "starring", "Mira Chen"),
    Triple("Ana Flores", "born_in", "Lisbon"),
    Triple("Ana Flores", "also_directed", "Salt Road"),
    Triple("Tom Vega", "born_in", "Caracas"),
    Triple("Salt Road", "released_in", "2003"),
]
index = build_index(triples)

print("triples in graph:", index.triple_count)
print("relations at 'Midnight Harbor':", capped_relations(index, "Midnight Harbor", 50))
print("tails of starring:", tails(index, "Midnight Harbor", "starring", 3))

# ---------------------------------------------------------------------------
# This is the routing prompt the controller renders at the first hop. A
# selector backend receives nothing else: whatever it wants to know about
# the walk has to be read back out of this text, exactly like a real model.

question = "Where was the director of Midnight Harbor born?"
first_prompt = render_routing_prompt(
    question,
    render_history([]),
    "Midnight Harbor",
    capped_relations(index, "Midnight Harbor", 50),
    width=3,
)
print("\n--- routing prompt at hop 0 ---")
print(first_prompt)
print("--- end prompt ---")


# ---------------------------------------------------------------------------
# Our stand-in model parses the prompt and follows a two-line script: at the
# film pick directed_by, at the director pick born_in. At the city there are
# no outgoing relations, so the controller finishes the beam on its own.
# The extraction prompt (recognized by its tag) always gets the city.

class DemoSelector(Backend):
    """Replies by looking up the current entity parsed from the prompt."""

    script = {"Midnight Harbor": "directed_by", "Ana Flores": "born_in"}

    def _respond(self, request) -> str:
        if request.tag == TAG_ROUTING:
            fields = parse_routing_fields(request.prompt)
            return self.script.get(fields.entity, STOP_TOKEN)
        return "Lisbon"


backend = DemoSelector()
config = SearchConfig(depth_limit=3, width=3, beam_budget=16)
retained, trace = run_search(question, ["Midnight Harbor"], index, config, backend)

print("\nretained paths after the walk:")
for line in render_retained(retained):
    print(" ", line)

# ---------------------------------------------------------------------------
# Answer extraction renders the retained full paths into one final prompt
# and asks once. The trace kept count of every call and token estimate.

outcome = extract_answers(question, retained, config, backend)

print("\npredicted answers:", list(outcome.answers))
print("routing prompts sent:", trace.llm_calls)
print("estimated routing input tokens:", trace.input_tokens)
print("final depth reached:", trace.final_depth)

# ---------------------------------------------------------------------------
# The history bound is purely a prompt-rendering concern. Rendering the
# two-hop path under different bounds shows what the selector would see;
# the stored path is symbolic and never truncated.

best = retained[0]
for bound in (HistoryBound(0), HistoryBound(1), HistoryBound.full()):
    print(f"\nhistory shown at bound {bound}:")
    print(render_history(suffix(best, bound)))
