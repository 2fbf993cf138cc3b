"""End-to-end acceptance suite.

Each test here is one releasable guarantee, written to run on a laptop in
seconds with no network access: exact oracle correctness across history
bounds, the closed-form cost accounting, the ambiguity separation that
motivates bounded history, published statistics values, fuzzed budget
invariants, checkpoint determinism, and the random-selector control. Run
with ``pytest -v tests/test_acceptance.py`` to get one pass/fail line per
guarantee.
"""

from __future__ import annotations

import json
import random
import shutil
import string
import time
from pathlib import Path

import numpy as np
import pytest

from invariant_tools import run_checked_search
from kgbeam.backends import BackendConfig, RandomBackend
from kgbeam.data import dataset_stats, load_dataset, write_dataset
from kgbeam.graph import Triple, build_index
from kgbeam.harness import ROWS_FILENAME, RunConfig, run_eval, summarize
from kgbeam.metrics import bootstrap_ci, hits_at_1, normalize, set_f1, sign_test
from kgbeam.paths import HistoryBound
from kgbeam.search import SearchConfig, extract_answers, run_search
from kgbeam.synth import (
    AMBIGUITY_REPEATED,
    SynthSpec,
    generate,
    oracle_backend,
    write_scripts,
)

BOUNDS = (HistoryBound(0), HistoryBound(1), HistoryBound(2), HistoryBound.full())


def _bound_cap(bound: HistoryBound, hop: int) -> int:
    return hop if bound.is_full else min(bound.hops, hop)


def _index_for(record: dict):
    return build_index([Triple(*t) for t in record["graph"]])


@pytest.fixture(scope="module")
def bound_sweep():
    """Run 200 planted-chain examples under every history bound once.

    Returns per-bound, per-example outcomes plus the wall-clock time of the
    whole sweep; several acceptance tests read different facets of it.
    """
    spec = SynthSpec(seed=42, example_count=200, plant_depth=5, branching=3, tail_fanout=2)
    records, book = generate(spec)
    backend = oracle_backend(book)
    results: dict[str, list[dict]] = {}
    started = time.perf_counter()
    for bound in BOUNDS:
        config = SearchConfig(depth_limit=5, history_bound=bound)
        rows = []
        for record in records:
            retained, trace = run_search(
                record["question"], record["q_entity"], _index_for(record), config, backend
            )
            outcome = extract_answers(record["question"], retained, config, backend)
            predicted = list(outcome.answers)
            rows.append(
                {
                    "hits": hits_at_1(predicted, record["answer"]),
                    "f1": set_f1(predicted, record["answer"]),
                    "retained_set": {(p.start, p.hops, p.is_open) for p in retained},
                    "routing_tokens": trace.input_tokens,
                    "prompts": list(trace.per_hop_prompt_count),
                    "visible": list(trace.per_hop_visible_hops),
                }
            )
        results[str(bound)] = rows
    elapsed = time.perf_counter() - started
    return results, elapsed


def test_oracle_correctness_every_bound_scores_one(bound_sweep) -> None:
    results, elapsed = bound_sweep
    for bound in BOUNDS:
        rows = results[str(bound)]
        assert len(rows) == 200
        hits = sum(r["hits"] for r in rows) / len(rows)
        f1 = sum(r["f1"] for r in rows) / len(rows)
        assert hits == 1.0, f"Hits@1 {hits} != 1.000 at bound {bound}"
        assert f1 == 1.0, f"F1 {f1} != 1.000 at bound {bound}"
    assert elapsed < 30.0, f"sweep took {elapsed:.1f}s, budget is 30s"


def test_bound_isolation_same_paths_monotone_tokens_exact_accounting(bound_sweep) -> None:
    results, _ = bound_sweep
    per_bound = [results[str(bound)] for bound in BOUNDS]

    # The bound changes only what the prompt displays: retained paths are
    # identical across all four settings, example by example.
    for rows in per_bound[1:]:
        for row, base_row in zip(rows, per_bound[0]):
            assert row["retained_set"] == base_row["retained_set"]

    # Showing more history can only grow the routing prompt.
    totals = [sum(r["routing_tokens"] for r in rows) for rows in per_bound]
    for row_sets in zip(*per_bound):
        tokens = [r["routing_tokens"] for r in row_sets]
        assert tokens == sorted(tokens)
    assert totals[0] < totals[1] < totals[2] < totals[3]

    # Rendered history hops match the closed form sum_t prompts(t)*min(K,t).
    for bound, rows in zip(BOUNDS, per_bound):
        for row in rows:
            expected = sum(
                prompts * _bound_cap(bound, hop)
                for hop, prompts in enumerate(row["prompts"])
            )
            assert sum(row["visible"]) == expected


def test_ambiguity_separation_needs_visible_history() -> None:
    spec = SynthSpec(
        seed=77,
        example_count=100,
        plant_depth=5,
        branching=3,
        tail_fanout=2,
        ambiguity_mode=AMBIGUITY_REPEATED,
    )
    records, book = generate(spec)
    backend = oracle_backend(book)

    def mean_f1(bound: HistoryBound) -> float:
        config = SearchConfig(depth_limit=5, history_bound=bound)
        scores = []
        for record in records:
            retained, _ = run_search(
                record["question"], record["q_entity"], _index_for(record), config, backend
            )
            outcome = extract_answers(record["question"], retained, config, backend)
            scores.append(set_f1(list(outcome.answers), record["answer"]))
        return sum(scores) / len(scores)

    hidden = mean_f1(HistoryBound(0))
    for bound in (HistoryBound(1), HistoryBound(2), HistoryBound.full()):
        assert mean_f1(bound) - hidden >= 0.9


def test_sign_test_reproduces_published_values() -> None:
    assert sign_test(247, 218) == pytest.approx(0.194, abs=0.005)
    assert sign_test(235, 196) == pytest.approx(0.067, abs=0.005)
    assert sign_test(297, 262) == pytest.approx(0.150, abs=0.005)
    assert round(sign_test(132, 132), 3) == 1.000
    assert round(sign_test(151, 152), 3) == 1.000


def test_budget_invariants_hold_across_fuzzed_runs() -> None:
    # Every run re-derives each hop from scratch inside the observer; any
    # budget or bookkeeping violation raises there.
    for seed in range(1000):
        run_checked_search(seed)


def test_checkpoint_resume_is_byte_identical_and_costs_reconstruct(tmp_path) -> None:
    spec = SynthSpec(seed=11, example_count=50, plant_depth=3, branching=2)
    records, book = generate(spec)
    dataset = tmp_path / "bench.jsonl"
    scripts = tmp_path / "bench.scripts.json"
    write_dataset(records, dataset)
    write_scripts(book, scripts)

    def config(out: Path, **kwargs) -> RunConfig:
        return RunConfig(
            dataset_path=str(dataset),
            out_dir=str(out),
            search=SearchConfig(depth_limit=3),
            backend=BackendConfig(kind="scripted"),
            scripts_path=str(scripts),
            **kwargs,
        )

    straight = tmp_path / "straight"
    run_eval(config(straight))

    interrupted = tmp_path / "interrupted"
    run_eval(config(interrupted, limit=20))
    archived = tmp_path / "segment-1.jsonl"
    shutil.copy(interrupted / ROWS_FILENAME, archived)
    run_eval(config(interrupted, resume=True))

    def canonical_lines(path: Path) -> list[str]:
        out = []
        for line in path.read_text(encoding="utf-8").splitlines():
            row = json.loads(line)
            row.pop("duration")
            out.append(json.dumps(row, sort_keys=True))
        return out

    assert canonical_lines(interrupted / ROWS_FILENAME) == canonical_lines(
        straight / ROWS_FILENAME
    )

    merged = summarize(interrupted / ROWS_FILENAME, extra_segments=[archived])
    baseline = summarize(straight / ROWS_FILENAME)
    assert merged.n == baseline.n == 50
    assert merged.f1 == baseline.f1
    assert merged.llm_calls == baseline.llm_calls
    assert merged.input_tokens == baseline.input_tokens
    assert merged.output_tokens == baseline.output_tokens


def test_metric_units_and_bootstrap_scaling() -> None:
    assert set_f1(["a", "b"], ["b", "c"]) == pytest.approx(0.5)

    rng = random.Random(8)
    alphabet = string.ascii_letters + string.digits + string.punctuation + " \t"
    for _ in range(10_000):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 25)))
        once = normalize(text)
        assert normalize(once) == once

    low, high = bootstrap_ci([0.7] * 25)
    assert high - low == 0.0
    assert low == pytest.approx(0.7)
    assert bootstrap_ci([0.5] * 25) == (0.5, 0.5)

    base = np.random.default_rng(12).normal(0.5, 0.2, size=120).tolist()
    low1, high1 = bootstrap_ci(base, resamples=4000, seed=2)
    low4, high4 = bootstrap_ci(base * 4, resamples=4000, seed=2)
    ratio = (high1 - low1) / (high4 - low4)
    assert 1.5 <= ratio <= 2.5


def test_random_selector_trails_oracle_by_wide_margin() -> None:
    spec = SynthSpec(seed=5, example_count=500, plant_depth=5, branching=4, tail_fanout=2)
    records, book = generate(spec)
    oracle = oracle_backend(book)
    rnd = RandomBackend(7)
    config = SearchConfig(depth_limit=5)

    def mean_f1(routing_backend) -> float:
        scores = []
        for record in records:
            retained, _ = run_search(
                record["question"],
                record["q_entity"],
                _index_for(record),
                config,
                routing_backend,
            )
            outcome = extract_answers(record["question"], retained, config, oracle)
            scores.append(set_f1(list(outcome.answers), record["answer"]))
        return sum(scores) / len(scores)

    oracle_f1 = mean_f1(oracle)
    random_f1 = mean_f1(rnd)
    assert oracle_f1 == 1.0
    assert random_f1 <= oracle_f1 - 0.3, f"gap only {oracle_f1 - random_f1:.3f}"


@pytest.mark.parametrize(
    "env_name, default_path, expected",
    [
        ("KGBEAM_WEBQSP", "data/webqsp_test.jsonl", (1628, 10.20, 0.500)),
        ("KGBEAM_CWQ", "data/cwq_test.jsonl", (3531, 1.89, 0.758)),
    ],
)
def test_benchmark_profile_when_files_present(
    env_name: str, default_path: str, expected, monkeypatch
) -> None:
    import os

    path = Path(os.environ.get(env_name, default_path))
    if not path.exists():
        pytest.skip(f"benchmark file not present: {path}")
    stats = dataset_stats(load_dataset(path))
    n, avg, single = expected
    assert stats.n == n
    assert round(stats.avg_gold_answers, 2) == avg
    assert round(stats.single_gold_fraction, 3) == single
