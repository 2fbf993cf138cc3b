"""
Scoring answers and comparing runs with honest uncertainty
==========================================================

The metrics layer in isolation: string normalization, Hits@1 and set F1,
percentile bootstrap intervals, and the exact binomial sign test used for
paired run comparisons. Everything is seeded, so every number printed here
is reproducible to the digit.
"""

import numpy as np

from kgbeam.metrics import (
    ExampleScore,
    bootstrap_ci,
    cardinality_split,
    hits_at_1,
    normalize,
    paired_comparison,
    set_f1,
    sign_test,
)

# ---------------------------------------------------------------------------
# Normalization: lowercase, strip punctuation, collapse whitespace, peel
# leading articles. Scoring never compares raw strings.

for raw in ("The Beatles ", "U.S.A.", "  An   Old Friend"):
    print(f"normalize({raw!r}) = {normalize(raw)!r}")

print("\nhits_at_1(['Paris', 'Lyon'], gold ['lyon', 'paris']) =", hits_at_1(["Paris", "Lyon"], ["lyon", "paris"]))
print("set_f1({a,b} vs {b,c}) =", set_f1(["a", "b"], ["b", "c"]))

# ---------------------------------------------------------------------------
# Bootstrap confidence intervals for a mean: resample the per-example scores
# 10,000 times with a seeded generator and take percentiles. Quadrupling the
# sample should roughly halve the width; constant input collapses to a point.

rng = np.random.default_rng(0)
scores_small = rng.beta(5, 3, size=100).tolist()
low_s, high_s = bootstrap_ci(scores_small, seed=42)
low_l, high_l = bootstrap_ci(scores_small * 4, seed=42)
print(f"\nCI over 100 scores:  [{low_s:.4f}, {high_s:.4f}]  width {high_s - low_s:.4f}")
print(f"CI over 400 scores:  [{low_l:.4f}, {high_l:.4f}]  width {high_l - low_l:.4f}")
print(f"width ratio = {(high_s - low_s) / (high_l - low_l):.2f}  (about 2 is the sqrt(n) law)")
print("constant input:", bootstrap_ci([0.5] * 30))

# ---------------------------------------------------------------------------
# The exact two-sided sign test over decided (non-tied) pairs. Balanced
# win/loss counts give p = 1; the p-value is symmetric in its arguments.

for wins, losses in ((247, 218), (235, 196), (297, 262), (132, 132), (151, 152)):
    print(f"sign_test({wins}, {losses}) = {sign_test(wins, losses):.3f}")

# ---------------------------------------------------------------------------
# Paired comparison of two runs. Scores pair strictly by example id; the
# report carries the mean delta, its bootstrap interval, win/loss/tie
# counts, and the sign test in one object.

rng = np.random.default_rng(1)


def fake_scores(shift: float) -> list[ExampleScore]:
    out = []
    for i in range(300):
        f1 = float(np.clip(rng.normal(0.55 + shift, 0.25), 0.0, 1.0))
        gold_count = int(rng.choice([1, 1, 1, 3, 5]))
        out.append(
            ExampleScore(
                example_id=f"q{i}",
                hits_at_1=int(f1 > 0.8),
                f1=round(f1, 2),
                gold_count=gold_count,
                predicted_count=1,
            )
        )
    return out


run_a = fake_scores(shift=0.04)
run_b = [
    ExampleScore(s.example_id, s.hits_at_1, round(max(0.0, s.f1 - float(rng.normal(0.03, 0.15))), 2), s.gold_count, 1)
    for s in run_a
]

report = paired_comparison(run_a, run_b, resamples=5000)
print("\npaired comparison over 300 examples:")
print(f"  mean dF1 = {report.mean_delta_f1:+.4f}")
print(f"  CI95 = [{report.ci_low:+.4f}, {report.ci_high:+.4f}]")
print(f"  W/L/T = {report.wins}/{report.losses}/{report.ties}")
print(f"  sign p = {report.sign_p:.4f}")

# ---------------------------------------------------------------------------
# Splitting the same deltas by gold-answer count often reveals an
# interaction that the headline mean hides.

split = cardinality_split(run_a, run_b)
print("\nby gold-answer cardinality:")
print(f"  single-answer (n={split.single_n}): mean dF1 = {split.single_mean_delta:+.4f}")
print(f"  multi-answer  (n={split.multi_n}): mean dF1 = {split.multi_mean_delta:+.4f}")
