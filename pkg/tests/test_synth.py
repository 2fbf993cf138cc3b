"""Tests for the planted-chain benchmark generator and its oracle selector."""

from __future__ import annotations

import json

import pytest

from kgbeam.backends import RandomBackend, SelectorRequest, TAG_DIRECT, TAG_ROUTING
from kgbeam.graph import Triple, build_index
from kgbeam.metrics import set_f1
from kgbeam.paths import EMPTY_HISTORY_MARKER, HistoryBound, render_history
from kgbeam.prompts import (
    NO_RELEVANT_PATH_PHRASE,
    STOP_TOKEN,
    parse_answers,
    parse_relation_selection,
    render_extraction_prompt,
    render_routing_prompt,
)
from kgbeam.search import SearchConfig, extract_answers, run_search
from kgbeam.synth import (
    AMBIGUITY_REPEATED,
    OracleBackend,
    SynthSpec,
    generate,
    oracle_backend,
    path_entities,
    read_scripts,
    write_scripts,
)


def _index_for(record: dict):
    return build_index([Triple(*t) for t in record["graph"]])


def _solve(record: dict, backend, config: SearchConfig) -> tuple[float, list]:
    index = _index_for(record)
    retained, _ = run_search(
        record["question"], record["q_entity"], index, config, backend
    )
    outcome = extract_answers(record["question"], retained, config, backend)
    return set_f1(list(outcome.answers), record["answer"]), retained


def test_same_seed_is_byte_identical() -> None:
    spec = SynthSpec(seed=7, example_count=5, plant_depth=3)
    records_a, book_a = generate(spec)
    records_b, book_b = generate(spec)
    assert json.dumps(records_a, sort_keys=True) == json.dumps(records_b, sort_keys=True)
    assert book_a == book_b


def test_different_seed_differs() -> None:
    a, _ = generate(SynthSpec(seed=1, example_count=3))
    b, _ = generate(SynthSpec(seed=2, example_count=3))
    assert json.dumps(a) != json.dumps(b)


def test_triple_counts_match_construction() -> None:
    spec = SynthSpec(seed=7, example_count=4, plant_depth=5, branching=3, tail_fanout=2)
    records, _ = generate(spec)
    for record in records:
        # One planted triple per hop plus branching*fanout distractors per
        # distinct on-path entity (the gold terminal has no outgoing edges).
        assert len(record["graph"]) == 5 + 5 * 3 * 2
        heads = {t[0] for t in record["graph"]}
        assert record["a_entity"][0] not in heads


def test_repeated_entity_mode_revisits_topic() -> None:
    spec = SynthSpec(
        seed=3,
        example_count=2,
        plant_depth=4,
        branching=2,
        tail_fanout=1,
        ambiguity_mode=AMBIGUITY_REPEATED,
    )
    records, book = generate(spec)
    for record in records:
        topic = record["q_entity"][0]
        assert [topic, "rel_plant_1", topic] in record["graph"]
        # Chain visits the topic twice, so distinct on-path entities = depth-1.
        assert len(record["graph"]) == 4 + (4 - 1) * 2 * 1
        script = book[record["question"]]
        assert (topic, None) in script.by_state


def test_branching_zero_is_pure_chain_solved_by_random_walk() -> None:
    spec = SynthSpec(seed=11, example_count=3, plant_depth=4, branching=0)
    records, book = generate(spec)
    config = SearchConfig(depth_limit=4)
    oracle = oracle_backend(book)
    for record in records:
        assert len(record["graph"]) == 4
        # Forced moves: a relation-randomizing selector walks the chain too.
        index = _index_for(record)
        retained, _ = run_search(
            record["question"], record["q_entity"], index, config, RandomBackend(5)
        )
        assert any(p.tail_entity == record["answer"][0] for p in retained)
        outcome = extract_answers(record["question"], retained, config, oracle)
        assert list(outcome.answers) == record["answer"]


def test_oracle_solves_generated_set_exactly() -> None:
    spec = SynthSpec(seed=42, example_count=12, plant_depth=5, branching=3, tail_fanout=2)
    records, book = generate(spec)
    backend = oracle_backend(book)
    config = SearchConfig(depth_limit=5)
    for record in records:
        f1, retained = _solve(record, backend, config)
        assert f1 == 1.0
        assert any(len(p.hops) == 5 for p in retained)


def test_oracle_retained_gold_path_identical_across_bounds() -> None:
    spec = SynthSpec(seed=9, example_count=4, plant_depth=4, branching=2)
    records, book = generate(spec)
    backend = oracle_backend(book)
    for record in records:
        index = _index_for(record)
        rendered_sets = []
        for bound in (HistoryBound(0), HistoryBound(1), HistoryBound(2), HistoryBound.full()):
            config = SearchConfig(depth_limit=4, history_bound=bound)
            retained, _ = run_search(
                record["question"], record["q_entity"], index, config, backend
            )
            rendered_sets.append({(p.start, p.hops, p.is_open) for p in retained})
        assert all(s == rendered_sets[0] for s in rendered_sets[1:])


def test_ambiguity_needs_one_hop_of_history() -> None:
    spec = SynthSpec(
        seed=21,
        example_count=6,
        plant_depth=4,
        branching=2,
        ambiguity_mode=AMBIGUITY_REPEATED,
    )
    records, book = generate(spec)
    backend = oracle_backend(book)
    for record in records:
        hidden = SearchConfig(depth_limit=4, history_bound=HistoryBound(0))
        one_hop = SearchConfig(depth_limit=4, history_bound=HistoryBound(1))
        f1_hidden, _ = _solve(record, backend, hidden)
        f1_one, _ = _solve(record, backend, one_hop)
        assert f1_hidden == 0.0
        assert f1_one == 1.0


def test_oracle_routing_always_parses_clean() -> None:
    spec = SynthSpec(seed=13, example_count=5, plant_depth=3, branching=3)
    records, book = generate(spec)
    backend = oracle_backend(book)
    width = 3
    for record in records:
        index = _index_for(record)
        script = book[record["question"]]
        for entity, relation in script.by_entity.items():
            candidates = sorted({r for r, _ in index.by_head[entity]})
            prompt = render_routing_prompt(
                record["question"],
                render_history([]),
                entity,
                candidates,
                width,
            )
            response = backend.select_batch(
                [SelectorRequest(prompt=prompt, max_output=64, temperature=0.0, tag=TAG_ROUTING)]
            )[0]
            parsed = parse_relation_selection(response.text, candidates, width)
            assert parsed.kind == "relations"
            assert parsed.relations == (relation,)


def test_oracle_stops_when_unscripted() -> None:
    spec = SynthSpec(seed=13, example_count=1, plant_depth=2, branching=1)
    records, book = generate(spec)
    backend = oracle_backend(book)
    prompt = render_routing_prompt(
        records[0]["question"], EMPTY_HISTORY_MARKER, "never_visited", ["rel_x"], 3
    )
    response = backend.select_batch(
        [SelectorRequest(prompt=prompt, max_output=64, temperature=0.0, tag=TAG_ROUTING)]
    )[0]
    assert response.text == STOP_TOKEN


def test_oracle_extraction_declines_when_gold_unreached() -> None:
    spec = SynthSpec(seed=5, example_count=1, plant_depth=3, branching=2)
    records, book = generate(spec)
    backend = oracle_backend(book)
    prompt = render_extraction_prompt(
        records[0]["question"],
        [],
        8,
    )
    response = backend.select_batch(
        [SelectorRequest(prompt=prompt, max_output=64, temperature=0.0, tag="extraction")]
    )[0]
    assert response.text == NO_RELEVANT_PATH_PHRASE
    parsed = parse_answers(response.text)
    assert parsed.failure and parsed.answers == ()


def test_oracle_rejects_unknown_question() -> None:
    _, book = generate(SynthSpec(seed=1, example_count=1))
    backend = OracleBackend(book)
    prompt = render_routing_prompt("Who?", EMPTY_HISTORY_MARKER, "x", ["rel"], 3)
    response = backend.select_batch(
        [SelectorRequest(prompt=prompt, max_output=64, temperature=0.0, tag=TAG_ROUTING)]
    )[0]
    assert response.error is not None and "no script" in response.error


def test_oracle_direct_mode_declines() -> None:
    records, book = generate(SynthSpec(seed=1, example_count=1))
    backend = OracleBackend(book)
    response = backend.select_batch(
        [
            SelectorRequest(
                prompt=f"Question: {records[0]['question']}",
                max_output=64,
                temperature=0.0,
                tag=TAG_DIRECT,
            )
        ]
    )[0]
    assert response.text == NO_RELEVANT_PATH_PHRASE


def test_scripts_round_trip_through_json(tmp_path) -> None:
    spec = SynthSpec(
        seed=17,
        example_count=4,
        plant_depth=3,
        branching=2,
        ambiguity_mode=AMBIGUITY_REPEATED,
    )
    _, book = generate(spec)
    target = tmp_path / "scripts.json"
    write_scripts(book, target)
    loaded = read_scripts(target)
    assert loaded == book


def test_path_entities_split() -> None:
    line = "a --[r1]--> b --[r2]--> c"
    assert path_entities(line) == ["a", "b", "c"]
    assert path_entities("solo") == ["solo"]


def test_spec_validation() -> None:
    with pytest.raises(ValueError):
        SynthSpec(example_count=0)
    with pytest.raises(ValueError):
        SynthSpec(plant_depth=0)
    with pytest.raises(ValueError):
        SynthSpec(branching=-1)
    with pytest.raises(ValueError):
        SynthSpec(tail_fanout=0)
    with pytest.raises(ValueError):
        SynthSpec(ambiguity_mode="nope")
    with pytest.raises(ValueError):
        SynthSpec(ambiguity_mode=AMBIGUITY_REPEATED, plant_depth=1)


def test_record_shape_matches_dataset_contract() -> None:
    records, _ = generate(SynthSpec(seed=4, example_count=2))
    for record in records:
        assert set(record) == {"id", "question", "answer", "q_entity", "a_entity", "graph"}
        assert record["id"].startswith("synth-4-")
        assert all(len(t) == 3 for t in record["graph"])
        assert record["answer"] == record["a_entity"]
