"""Prompt rendering determinism and response parsing behavior."""

from __future__ import annotations

import random

import pytest

from kgbeam.paths import HistoryBound, SymbolicPath, render_history, suffix
from kgbeam.prompts import (
    NO_PATHS_MARKER,
    RelationSelection,
    parse_answers,
    parse_extraction_fields,
    parse_relation_selection,
    parse_routing_fields,
    render_extraction_prompt,
    render_routing_prompt,
)


def _prompt(**overrides) -> str:
    args = {
        "question": "who founded the company?",
        "history_text": "A --[founded_by]--> B",
        "entity": "B",
        "candidates": ["born_in", "founded_by", "spouse"],
        "width": 3,
    }
    args.update(overrides)
    return render_routing_prompt(**args)


def test_routing_prompt_contains_labeled_fields_in_order() -> None:
    prompt = _prompt()
    q = prompt.index("Question: ")
    h = prompt.index("Path history:")
    e = prompt.index("Current entity: ")
    c = prompt.index("Candidate relations:")
    assert q < h < e < c
    assert "up to 3 relations" in prompt
    assert "STOP" in prompt
    assert "born_in\nfounded_by\nspouse" in prompt


def test_routing_prompt_is_byte_deterministic() -> None:
    assert _prompt() == _prompt()
    a = render_routing_prompt("q?", "(no previous hops)", "E", ["r1", "r2"], 2)
    b = render_routing_prompt("q?", "(no previous hops)", "E", ["r1", "r2"], 2)
    assert a == b


def test_routing_prompt_requires_candidates_and_width() -> None:
    with pytest.raises(ValueError):
        _prompt(candidates=[])
    with pytest.raises(ValueError):
        _prompt(width=0)


def test_parse_stop_any_case_and_padding() -> None:
    candidates = ["a", "b"]
    for text in ("STOP", "stop", " Stop ", "\nSTOP\n"):
        selection = parse_relation_selection(text, candidates, 3)
        assert selection.is_stop
        assert selection.relations == ()


def test_parse_exact_lines_in_response_order() -> None:
    candidates = ["born_in", "founded_by", "spouse"]
    selection = parse_relation_selection("spouse\nborn_in", candidates, 3)
    assert not selection.is_stop
    assert selection.relations == ("spouse", "born_in")


def test_parse_case_insensitive_exact_match() -> None:
    selection = parse_relation_selection("FOUNDED_BY", ["founded_by", "spouse"], 3)
    assert selection.relations == ("founded_by",)


def test_parse_unique_substring_both_directions() -> None:
    candidates = ["people.person.spouse_s", "location.country.capital"]
    # Response line contained in exactly one candidate.
    s1 = parse_relation_selection("spouse", candidates, 3)
    assert s1.relations == ("people.person.spouse_s",)
    # Candidate contained in the response line.
    s2 = parse_relation_selection(
        "the answer is location.country.capital here", candidates, 3
    )
    assert s2.relations == ("location.country.capital",)


def test_parse_ambiguous_substring_is_dropped() -> None:
    candidates = ["rel_a_one", "rel_a_two"]
    selection = parse_relation_selection("rel_a", candidates, 3)
    assert selection.relations == ()


def test_parse_garbage_yields_empty_selection() -> None:
    selection = parse_relation_selection("no idea, sorry!", ["alpha", "beta"], 3)
    assert not selection.is_stop
    assert selection.relations == ()


def test_parse_dedupes_and_truncates_to_width() -> None:
    candidates = ["r1", "r2", "r3", "r4"]
    selection = parse_relation_selection("r1\nr1\nr3\nr4\nr2", candidates, 2)
    assert selection.relations == ("r1", "r3")


def test_parse_results_are_verbatim_candidates() -> None:
    rng = random.Random(31)
    for _ in range(50):
        candidates = [f"rel_{i}" for i in range(rng.randint(1, 8))]
        lines = [rng.choice(candidates + ["junk", "STOP maybe"]) for _ in range(5)]
        selection = parse_relation_selection("\n".join(lines), candidates, 3)
        if not selection.is_stop:
            assert len(selection.relations) <= 3
            assert all(r in candidates for r in selection.relations)
            assert len(set(selection.relations)) == len(selection.relations)


def test_extraction_prompt_budget_and_marker() -> None:
    paths = []
    for i in range(12):
        paths.append(SymbolicPath(start=f"s{i}").extend("r", f"t{i}"))
    prompt = render_extraction_prompt("q?", paths, 8)
    shown = [line for line in prompt.split("\n") if " --[r]--> " in line]
    assert len(shown) == 8
    assert shown[0] == "s0 --[r]--> t0"
    assert shown[-1] == "s7 --[r]--> t7"

    empty = render_extraction_prompt("q?", [], 8)
    assert NO_PATHS_MARKER in empty
    with pytest.raises(ValueError):
        render_extraction_prompt("q?", paths, 0)


def test_parse_answers_splits_trims_and_dedupes() -> None:
    parsed = parse_answers(' "Paris" , lyon\nPARIS, , Marseille ')
    assert parsed.answers == ("Paris", "lyon", "Marseille")
    assert not parsed.failure


def test_parse_answers_no_relevant_path_flags_failure() -> None:
    for text in ("no relevant path", "There is NO RELEVANT PATH here."):
        parsed = parse_answers(text)
        assert parsed.answers == ()
        assert parsed.failure
    assert parse_answers("").answers == ()
    assert not parse_answers("").failure


def test_prompt_length_monotone_in_history_bound() -> None:
    rng = random.Random(8)
    for _ in range(30):
        hop_count = rng.randint(1, 8)
        path = SymbolicPath(start="e0_0")
        for i in range(hop_count):
            path = path.extend(f"rel_plant_{i}", f"e0_{i + 1}")
        lengths = []
        for k in list(range(hop_count + 1)) + [None]:
            bound = HistoryBound(k) if k is not None else HistoryBound.full()
            prompt = render_routing_prompt(
                "which entity?",
                render_history(suffix(path, bound)),
                path.tail_entity,
                ["rel_a", "rel_b"],
                3,
            )
            lengths.append(len(prompt))
        assert lengths == sorted(lengths)


def test_routing_fields_round_trip() -> None:
    prompt = _prompt()
    fields = parse_routing_fields(prompt)
    assert fields.question == "who founded the company?"
    assert fields.entity == "B"
    assert fields.candidates == ("born_in", "founded_by", "spouse")
    assert fields.width == 3
    assert fields.history_lines == ("A --[founded_by]--> B",)
    assert fields.last_visible_hop == "A --[founded_by]--> B"

    hidden = _prompt(history_text="(no previous hops)")
    assert parse_routing_fields(hidden).last_visible_hop is None

    multi = _prompt(history_text="A --[r1]--> B\nB --[r2]--> C")
    parsed = parse_routing_fields(multi)
    assert parsed.history_lines == ("A --[r1]--> B", "B --[r2]--> C")
    assert parsed.last_visible_hop == "B --[r2]--> C"


def test_extraction_fields_round_trip() -> None:
    paths = [SymbolicPath(start="A").extend("r", "B")]
    question, lines = parse_extraction_fields(render_extraction_prompt("q?", paths, 8))
    assert question == "q?"
    assert lines == ("A --[r]--> B",)
    question, lines = parse_extraction_fields(render_extraction_prompt("q?", [], 8))
    assert lines == ()


def test_field_parsers_reject_other_prompts() -> None:
    with pytest.raises(ValueError):
        parse_routing_fields("hello world")
    with pytest.raises(ValueError):
        parse_extraction_fields(_prompt())


def test_relation_selection_value_type() -> None:
    selection = RelationSelection(kind="relations", relations=("a",))
    assert not selection.is_stop
    assert RelationSelection(kind="stop").is_stop
