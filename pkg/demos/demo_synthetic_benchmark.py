"""
A checkpointed benchmark run, end to end
========================================

Generate a synthetic benchmark, evaluate two selectors on it through the
checkpointed harness (the scripted oracle and a seeded random control),
then read the row files back for summaries and a paired comparison. The
random control is the sanity check that graph access alone does not solve
the benchmark: it walks the same graphs with the same budgets and still
misses most planted chains.
"""

import json
import tempfile
from pathlib import Path

from kgbeam.backends import BackendConfig
from kgbeam.data import dataset_stats, load_dataset, write_dataset
from kgbeam.harness import ROWS_FILENAME, RunConfig, compare_runs, run_eval
from kgbeam.search import SearchConfig
from kgbeam.synth import SynthSpec, generate, write_scripts

workdir = Path(tempfile.mkdtemp(prefix="kgbeam-demo-"))
print("working under", workdir)

# ---------------------------------------------------------------------------
# Generate 60 examples. branching=4 puts five candidate relations at every
# on-path entity while the controller may select at most three, so a random
# selector has to get lucky five hops in a row.

spec = SynthSpec(seed=42, example_count=60, plant_depth=5, branching=4, tail_fanout=2)
records, book = generate(spec)
dataset = workdir / "bench.jsonl"
scripts = workdir / "bench.scripts.json"
write_dataset(records, dataset)
write_scripts(book, scripts)

stats = dataset_stats(load_dataset(dataset))
print(f"dataset: n={stats.n}, avg gold answers={stats.avg_gold_answers:.2f}")


def run(method: str, out_name: str, seed: int = 42):
    config = RunConfig(
        dataset_path=str(dataset),
        out_dir=str(workdir / out_name),
        method=method,
        search=SearchConfig(depth_limit=5),
        backend=BackendConfig(kind="scripted"),
        scripts_path=str(scripts),
        seed=seed,
    )
    return run_eval(config)


# ---------------------------------------------------------------------------
# Run the oracle, then the random control. With method="random" the harness
# swaps in a seeded random selector for routing but keeps the configured
# backend for answer extraction, so the two runs differ only in who steers.

oracle_summary = run("bpc", "oracle-run")
random_summary = run("random", "random-run", seed=9)

for name, summary in (("oracle", oracle_summary), ("random", random_summary)):
    print(
        f"{name:>7}: F1={summary.f1:.3f}  Hits@1={summary.hits_at_1:.3f}  "
        f"calls={summary.llm_calls}  input tokens={summary.input_tokens}"
    )

# ---------------------------------------------------------------------------
# Each run wrote one JSON line per example, flushed as it went; a killed run
# resumes from that file. The first row shows what lands on disk.

first_row = json.loads(
    (workdir / "oracle-run" / ROWS_FILENAME).read_text(encoding="utf-8").splitlines()[0]
)
print("\nfirst oracle row:")
for key in ("example_id", "predicted_answers", "f1", "final_depth", "llm_calls"):
    print(f"  {key}: {first_row[key]}")

# ---------------------------------------------------------------------------
# Paired statistics between the two row files: per-example F1 deltas with a
# bootstrap interval, win/loss/tie counts, and an exact sign test.

report = compare_runs(
    workdir / "oracle-run" / ROWS_FILENAME,
    workdir / "random-run" / ROWS_FILENAME,
    resamples=2000,
)
paired = report.paired
print("\noracle vs random, paired by example:")
print(f"  mean dF1 = {paired.mean_delta_f1:+.3f}  CI95 = [{paired.ci_low:+.3f}, {paired.ci_high:+.3f}]")
print(f"  wins/losses/ties = {paired.wins}/{paired.losses}/{paired.ties}")
print(f"  sign test p = {paired.sign_p:.2e}")
print(f"  depth profile: oracle avg {report.depth_a.avg_depth:.2f}, random avg {report.depth_b.avg_depth:.2f}")
print(f"  unanswered: oracle {report.depth_a.no_answer_count}, random {report.depth_b.no_answer_count}")
