"""Bounded-history beam search for knowledge-graph question answering.

A controller walks a question's triple graph with exact symbolic paths while
an LLM (or a scripted/random stand-in) picks which relations to follow; the
routing prompt reveals only a bounded suffix of each path's history. Around
the controller: answer-set metrics, seeded bootstrap and sign-test
statistics, a checkpointed JSONL evaluation harness, and a synthetic
benchmark generator whose planted chains make end-to-end behavior exactly
testable.
"""

from .backends import (
    AnswerOutcome,
    Backend,
    BackendConfig,
    RandomBackend,
    RemoteChatBackend,
    ScriptedBackend,
    SelectorRequest,
    SelectorResponse,
    direct_answer,
    estimate_tokens,
    random_relation_choice,
)
from .data import DatasetStats, ExampleRecord, dataset_stats, load_dataset, write_dataset
from .graph import GraphIndex, Triple, build_index, capped_relations, tails
from .harness import (
    ComparisonReport,
    RunConfig,
    RunRow,
    RunSummary,
    compare_runs,
    run_eval,
    summarize,
)
from .metrics import (
    CardinalitySplit,
    DepthDiagnostics,
    ExampleScore,
    PairedComparison,
    aggregate_summary,
    bootstrap_ci,
    cardinality_split,
    depth_diagnostics,
    hits_at_1,
    normalize,
    paired_comparison,
    set_f1,
    sign_test,
)
from .paths import HistoryBound, SymbolicPath, render_history, render_path, suffix
from .prompts import (
    AnswerParse,
    RelationSelection,
    parse_answers,
    parse_relation_selection,
    render_extraction_prompt,
    render_routing_prompt,
)
from .search import (
    HopRecord,
    SearchConfig,
    SearchTrace,
    clip_beams,
    expand_beam,
    extract_answers,
    run_search,
)
from .synth import OracleBackend, SynthSpec, generate, oracle_backend

__version__ = "0.1.0"

__all__ = [
    "AnswerOutcome",
    "AnswerParse",
    "Backend",
    "BackendConfig",
    "CardinalitySplit",
    "ComparisonReport",
    "DatasetStats",
    "DepthDiagnostics",
    "ExampleRecord",
    "ExampleScore",
    "GraphIndex",
    "HistoryBound",
    "HopRecord",
    "OracleBackend",
    "PairedComparison",
    "RandomBackend",
    "RelationSelection",
    "RemoteChatBackend",
    "RunConfig",
    "RunRow",
    "RunSummary",
    "ScriptedBackend",
    "SearchConfig",
    "SearchTrace",
    "SelectorRequest",
    "SelectorResponse",
    "SymbolicPath",
    "SynthSpec",
    "Triple",
    "aggregate_summary",
    "bootstrap_ci",
    "build_index",
    "capped_relations",
    "cardinality_split",
    "clip_beams",
    "compare_runs",
    "dataset_stats",
    "depth_diagnostics",
    "direct_answer",
    "estimate_tokens",
    "expand_beam",
    "extract_answers",
    "generate",
    "hits_at_1",
    "load_dataset",
    "normalize",
    "oracle_backend",
    "paired_comparison",
    "parse_answers",
    "parse_relation_selection",
    "random_relation_choice",
    "render_extraction_prompt",
    "render_history",
    "render_path",
    "render_routing_prompt",
    "run_eval",
    "run_search",
    "set_f1",
    "sign_test",
    "suffix",
    "summarize",
    "tails",
    "write_dataset",
]
