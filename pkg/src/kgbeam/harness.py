"""Checkpointed evaluation runs over a dataset, plus summaries and comparisons.

A run writes exactly one JSON line per completed example, flushed and
synced before the next example starts, so a killed run loses at most the
example in flight. Restarting with ``resume`` skips every id already on
disk and appends the rest; two fresh runs of the same deterministic config
produce byte-identical row files apart from the duration field. Summaries
read rows back rather than trusting in-memory state, which is what makes a
crashed run's results reconstructible from its segments.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from tqdm import tqdm

from .backends import (
    Backend,
    BackendConfig,
    KIND_DIRECT,
    KIND_RANDOM,
    KIND_REMOTE,
    KIND_SCRIPTED,
    RandomBackend,
    RemoteChatBackend,
    direct_answer,
)
from .data import ExampleRecord, load_dataset
from .graph import build_index
from .metrics import (
    CardinalitySplit,
    DepthDiagnostics,
    ExampleScore,
    PairedComparison,
    cardinality_split,
    depth_diagnostics,
    hits_at_1,
    paired_comparison,
    set_f1,
)
from .search import SearchConfig, extract_answers, render_retained, run_search
from .synth import read_scripts, oracle_backend

METHOD_BPC = "bpc"
METHOD_RANDOM = "random"
METHOD_DIRECT = "cot"

ROWS_FILENAME = "rows.jsonl"
SUMMARY_FILENAME = "summary.json"
PARTIAL_SUMMARY_FILENAME = "summary.partial.json"


@dataclass(frozen=True)
class RunConfig:
    dataset_path: str
    out_dir: str
    method: str = METHOD_BPC
    search: SearchConfig = field(default_factory=SearchConfig)
    backend: BackendConfig = field(default_factory=BackendConfig)
    seed: int = 42
    limit: int | None = None
    resume: bool = False
    summary_interval: int = 50
    scripts_path: str | None = None
    progress: bool = False

    def __post_init__(self) -> None:
        if self.method not in (METHOD_BPC, METHOD_RANDOM, METHOD_DIRECT):
            raise ValueError(f"unknown method {self.method!r}")
        if self.summary_interval < 1:
            raise ValueError("summary_interval must be >= 1")


@dataclass
class RunRow:
    """One completed example: predictions, scores, audit trail, cost."""

    example_id: str
    predicted_answers: list[str]
    gold_count: int
    hits_at_1: int
    f1: float
    retained_path_renderings: list[str]
    final_depth: int
    llm_calls: int
    input_tokens: int
    output_tokens: int
    duration: float
    error: str | None = None
    failure_flag: bool = False

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, raw: dict) -> "RunRow":
        return cls(**raw)


@dataclass
class RunSummary:
    n: int
    hits_at_1: float
    f1: float
    llm_calls: int
    input_tokens: int
    output_tokens: int
    duration: float
    error_count: int
    failure_count: int
    method: str | None = None
    seed: int | None = None
    config: dict | None = None
    notes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def _config_echo(config: RunConfig) -> dict:
    echo = asdict(config)
    echo["search"]["history_bound"] = str(config.search.history_bound)
    return echo


def build_backend(config: RunConfig) -> Backend:
    """Construct the configured selector backend for a run."""
    kind = config.backend.kind
    if kind in (KIND_REMOTE, KIND_DIRECT):
        return RemoteChatBackend(config.backend)
    if kind == KIND_RANDOM:
        return RandomBackend(config.backend.seed)
    if kind == KIND_SCRIPTED:
        if not config.scripts_path:
            raise ValueError("scripted backend requires a scripts file")
        return oracle_backend(read_scripts(config.scripts_path))
    raise ValueError(f"unknown backend kind {kind!r}")


def _read_rows(path) -> list[RunRow]:
    rows: list[RunRow] = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                rows.append(RunRow.from_dict(json.loads(line)))
            except (json.JSONDecodeError, TypeError) as exc:
                raise ValueError(f"{path}: line {line_no}: bad row: {exc}") from exc
    return rows


def _score_example(
    record: ExampleRecord,
    config: RunConfig,
    routing_backend: Backend,
    answer_backend: Backend,
) -> RunRow:
    started = time.perf_counter()
    gold = list(record.gold_answers)
    if config.method == METHOD_DIRECT:
        outcome = direct_answer(record.question, answer_backend)
        predicted = list(outcome.answers)
        return RunRow(
            example_id=record.example_id,
            predicted_answers=predicted,
            gold_count=len(gold),
            hits_at_1=hits_at_1(predicted, gold),
            f1=set_f1(predicted, gold),
            retained_path_renderings=[],
            final_depth=0,
            llm_calls=outcome.llm_calls,
            input_tokens=outcome.input_tokens,
            output_tokens=outcome.output_tokens,
            duration=time.perf_counter() - started,
            error=outcome.error,
            failure_flag=outcome.failure,
        )

    index = build_index(list(record.triples))
    retained, trace = run_search(
        record.question,
        list(record.topic_entities),
        index,
        config.search,
        routing_backend,
    )
    outcome = extract_answers(record.question, retained, config.search, answer_backend)
    predicted = list(outcome.answers)
    error = trace.error or outcome.error
    return RunRow(
        example_id=record.example_id,
        predicted_answers=predicted,
        gold_count=len(gold),
        hits_at_1=hits_at_1(predicted, gold),
        f1=set_f1(predicted, gold),
        retained_path_renderings=render_retained(retained),
        final_depth=trace.final_depth,
        llm_calls=trace.llm_calls + outcome.llm_calls,
        input_tokens=trace.input_tokens + outcome.input_tokens,
        output_tokens=trace.output_tokens + outcome.output_tokens,
        duration=time.perf_counter() - started,
        error=error,
        failure_flag=outcome.failure or not predicted,
    )


def run_eval(
    config: RunConfig,
    records: list[ExampleRecord] | None = None,
    backend: Backend | None = None,
) -> RunSummary:
    """Execute a run with per-example checkpointing; returns the summary.

    ``records`` and ``backend`` may be supplied directly (tests, notebooks);
    otherwise they are built from the config. For the random-control method
    the random selector handles routing while the configured backend still
    performs answer extraction, mirroring how the control is defined.
    """
    if records is None:
        records = load_dataset(config.dataset_path)
    if backend is None:
        backend = build_backend(config)
    routing_backend = backend
    if config.method == METHOD_RANDOM and not backend.random_tails:
        routing_backend = RandomBackend(config.seed)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows_path = out_dir / ROWS_FILENAME

    done_ids: set[str] = set()
    if rows_path.exists() and rows_path.stat().st_size > 0:
        if not config.resume:
            raise FileExistsError(
                f"{rows_path} already has rows; pass resume=True or use a fresh directory"
            )
        for row in _read_rows(rows_path):
            done_ids.add(row.example_id)

    todo = records[: config.limit] if config.limit is not None else records
    pending = [r for r in todo if r.example_id not in done_ids]
    iterator = tqdm(pending, desc="examples", disable=not config.progress)

    completed_this_segment = 0
    with open(rows_path, "a", encoding="utf-8") as handle:
        for record in iterator:
            try:
                row = _score_example(record, config, routing_backend, backend)
            except Exception as exc:
                row = RunRow(
                    example_id=record.example_id,
                    predicted_answers=[],
                    gold_count=len(record.gold_answers),
                    hits_at_1=0,
                    f1=set_f1([], list(record.gold_answers)),
                    retained_path_renderings=[],
                    final_depth=0,
                    llm_calls=0,
                    input_tokens=0,
                    output_tokens=0,
                    duration=0.0,
                    error=str(exc),
                    failure_flag=True,
                )
            handle.write(json.dumps(row.to_dict(), ensure_ascii=False) + "\n")
            handle.flush()
            os.fsync(handle.fileno())
            completed_this_segment += 1
            if completed_this_segment % config.summary_interval == 0:
                partial = summarize(rows_path)
                partial.notes.append("partial summary; run still in progress")
                _write_summary(out_dir / PARTIAL_SUMMARY_FILENAME, partial)

    summary = summarize(rows_path)
    summary.method = config.method
    summary.seed = config.seed
    summary.config = _config_echo(config)
    _write_summary(out_dir / SUMMARY_FILENAME, summary)
    return summary


def _write_summary(path, summary: RunSummary) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(summary.to_dict(), handle, indent=2, ensure_ascii=False)
        handle.write("\n")


def summarize(rows_path, extra_segments: list | tuple = ()) -> RunSummary:
    """Aggregate a row file; optionally merge cost from other segments.

    Accuracy metrics come from the primary (complete) row file alone, which
    must not contain duplicate ids. Cost fields are summed over the union of
    rows across the primary file and every extra segment, deduplicated by
    example id, so archived partial segments can be folded in without double
    counting.
    """
    rows = _read_rows(rows_path)
    seen: set[str] = set()
    for row in rows:
        if row.example_id in seen:
            raise ValueError(f"duplicate example id in {rows_path}: {row.example_id!r}")
        seen.add(row.example_id)
    if not rows:
        raise ValueError(f"no rows in {rows_path}")

    cost_rows = list(rows)
    cost_ids = set(seen)
    notes: list[str] = []
    for segment in extra_segments:
        added = 0
        for row in _read_rows(segment):
            if row.example_id in cost_ids:
                continue
            cost_ids.add(row.example_id)
            cost_rows.append(row)
            added += 1
        notes.append(f"merged cost of {added} extra rows from {segment}")

    return RunSummary(
        n=len(rows),
        hits_at_1=sum(r.hits_at_1 for r in rows) / len(rows),
        f1=sum(r.f1 for r in rows) / len(rows),
        llm_calls=sum(r.llm_calls for r in cost_rows),
        input_tokens=sum(r.input_tokens for r in cost_rows),
        output_tokens=sum(r.output_tokens for r in cost_rows),
        duration=sum(r.duration for r in cost_rows),
        error_count=sum(1 for r in rows if r.error),
        failure_count=sum(1 for r in rows if r.failure_flag),
        notes=notes,
    )


def rows_to_scores(rows: list[RunRow]) -> list[ExampleScore]:
    return [
        ExampleScore(
            example_id=row.example_id,
            hits_at_1=row.hits_at_1,
            f1=row.f1,
            gold_count=row.gold_count,
            predicted_count=len(row.predicted_answers),
            failure_flag=row.failure_flag,
            depth=row.final_depth,
        )
        for row in rows
    ]


@dataclass(frozen=True)
class ComparisonReport:
    paired: PairedComparison
    cardinality: CardinalitySplit
    depth_a: DepthDiagnostics
    depth_b: DepthDiagnostics

    def to_dict(self) -> dict:
        return {
            "paired": asdict(self.paired),
            "cardinality": asdict(self.cardinality),
            "depth_a": asdict(self.depth_a),
            "depth_b": asdict(self.depth_b),
        }


def compare_runs(
    rows_path_a,
    rows_path_b,
    resamples: int = 10_000,
    seed: int = 42,
    depth_limit: int = 5,
) -> ComparisonReport:
    """Paired statistics between two runs over the same example ids."""
    rows_a = _read_rows(rows_path_a)
    rows_b = _read_rows(rows_path_b)
    scores_a = rows_to_scores(rows_a)
    scores_b = rows_to_scores(rows_b)

    def _no_answer(row: RunRow) -> bool:
        return row.failure_flag or not row.predicted_answers

    return ComparisonReport(
        paired=paired_comparison(scores_a, scores_b, resamples=resamples, seed=seed),
        cardinality=cardinality_split(scores_a, scores_b),
        depth_a=depth_diagnostics(
            [r.final_depth for r in rows_a], depth_limit, [_no_answer(r) for r in rows_a]
        ),
        depth_b=depth_diagnostics(
            [r.final_depth for r in rows_b], depth_limit, [_no_answer(r) for r in rows_b]
        ),
    )
