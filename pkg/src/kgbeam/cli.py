"""Command-line front end: run evaluations, summarize, compare, generate data.

Subcommands:
  run        execute a checkpointed evaluation run over a dataset
  summarize  aggregate a row file (optionally merging archived segments)
  compare    paired statistics between two row files
  stats      dataset size and gold-answer profile
  synth      generate a synthetic benchmark plus its oracle script file

Remote backends read their bearer token from the environment variable named
by --api-key-env; credentials never appear in config files or flags.
"""

from __future__ import annotations

import argparse
import json
import sys

from .backends import BackendConfig, DEFAULT_API_KEY_ENV
from .data import dataset_stats, load_dataset, write_dataset
from .harness import RunConfig, compare_runs, run_eval, summarize
from .paths import HistoryBound
from .search import SearchConfig
from .synth import SynthSpec, generate, write_scripts


def _add_run_parser(subparsers) -> None:
    p = subparsers.add_parser("run", help="run an evaluation over a dataset")
    p.add_argument("--dataset", required=True, help="dataset JSONL path")
    p.add_argument("--method", default="bpc", choices=["bpc", "random", "cot"])
    p.add_argument("--k", default="full", help="history bound: 0, 1, 2, ... or full")
    p.add_argument("--depth", type=int, default=5, help="hop limit")
    p.add_argument("--width", type=int, default=3, help="relations per beam per hop")
    p.add_argument("--beams", type=int, default=16, help="beam budget")
    p.add_argument("--relation-cap", type=int, default=50, help="candidate inventory cap")
    p.add_argument("--extraction-budget", type=int, default=8, help="paths shown to extraction")
    p.add_argument(
        "--backend",
        default="remote-chat",
        choices=["remote-chat", "random", "scripted", "cot-direct"],
    )
    p.add_argument("--endpoint", default="", help="chat-completions URL, used verbatim")
    p.add_argument("--model", default="", help="model name sent to the endpoint")
    p.add_argument("--api-key-env", default=DEFAULT_API_KEY_ENV)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="output directory for rows and summaries")
    p.add_argument("--limit", type=int, default=None, help="only the first N examples")
    p.add_argument("--resume", action="store_true", help="skip ids already in the row file")
    p.add_argument("--scripts", default=None, help="script file for the scripted backend")
    p.add_argument("--summary-interval", type=int, default=50)
    p.add_argument("--timeout", type=float, default=60.0, help="per-request timeout seconds")
    p.add_argument("--max-retries", type=int, default=3)


def _cmd_run(args) -> int:
    config = RunConfig(
        dataset_path=args.dataset,
        out_dir=args.out,
        method=args.method,
        search=SearchConfig(
            depth_limit=args.depth,
            width=args.width,
            beam_budget=args.beams,
            relation_cap=args.relation_cap,
            history_bound=HistoryBound.parse(args.k),
            extraction_budget=args.extraction_budget,
        ),
        backend=BackendConfig(
            kind=args.backend,
            endpoint=args.endpoint,
            model_name=args.model,
            seed=args.seed,
            request_timeout=args.timeout,
            max_retries=args.max_retries,
            api_key_env=args.api_key_env,
        ),
        seed=args.seed,
        limit=args.limit,
        resume=args.resume,
        summary_interval=args.summary_interval,
        scripts_path=args.scripts,
        progress=sys.stderr.isatty(),
    )
    summary = run_eval(config)
    json.dump(summary.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_summarize(args) -> int:
    summary = summarize(args.rows, extra_segments=args.extra_segment)
    json.dump(summary.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_compare(args) -> int:
    report = compare_runs(
        args.a, args.b, resamples=args.resamples, seed=args.seed, depth_limit=args.depth
    )
    json.dump(report.to_dict(), sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _cmd_stats(args) -> int:
    stats = dataset_stats(load_dataset(args.dataset))
    json.dump(
        {
            "n": stats.n,
            "avg_gold_answers": round(stats.avg_gold_answers, 2),
            "single_gold_fraction": round(stats.single_gold_fraction, 3),
        },
        sys.stdout,
        indent=2,
    )
    sys.stdout.write("\n")
    return 0


def _cmd_synth(args) -> int:
    spec = SynthSpec(
        seed=args.seed,
        example_count=args.count,
        plant_depth=args.depth,
        branching=args.branching,
        tail_fanout=args.fanout,
        ambiguity_mode=args.ambiguity,
    )
    records, book = generate(spec)
    dataset_path = f"{args.out}.jsonl"
    scripts_path = f"{args.out}.scripts.json"
    write_dataset(records, dataset_path)
    write_scripts(book, scripts_path)
    json.dump(
        {"dataset": dataset_path, "scripts": scripts_path, "examples": len(records)},
        sys.stdout,
        indent=2,
    )
    sys.stdout.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgbeam",
        description="Bounded-history beam search over question subgraphs, with "
        "a checkpointed evaluation harness and paired statistics.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    _add_run_parser(subparsers)

    p = subparsers.add_parser("summarize", help="aggregate a row file")
    p.add_argument("--rows", required=True, help="primary (complete) row file")
    p.add_argument(
        "--extra-segment",
        action="append",
        default=[],
        help="archived segment row file to merge into cost totals (repeatable)",
    )

    p = subparsers.add_parser("compare", help="paired statistics for two row files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--resamples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--depth", type=int, default=5, help="depth limit used by the runs")

    p = subparsers.add_parser("stats", help="dataset profile")
    p.add_argument("--dataset", required=True)

    p = subparsers.add_parser("synth", help="generate a synthetic benchmark")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--branching", type=int, default=3)
    p.add_argument("--fanout", type=int, default=2)
    p.add_argument("--ambiguity", default="none", choices=["none", "repeated-entity"])
    p.add_argument("--out", required=True, help="output path prefix")

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "summarize": _cmd_summarize,
        "compare": _cmd_compare,
        "stats": _cmd_stats,
        "synth": _cmd_synth,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
