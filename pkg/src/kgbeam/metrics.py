"""Answer-set scoring and the statistics used to compare two runs.

Scoring uses standard open-domain QA string normalization; F1 is computed
over normalized answer SETS, so duplicate or reordered predictions never
change a score. Uncertainty comes from a seeded percentile bootstrap and an
exact two-sided binomial sign test over per-example deltas; everything here
is deterministic given the seed.
"""

from __future__ import annotations

import string
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

_PUNCTUATION = set(string.punctuation)
_ARTICLES = ("a", "an", "the")

DEFAULT_RESAMPLES = 10_000
DEFAULT_SEED = 42


def normalize(text: str) -> str:
    """Canonical answer form: lowercase, no punctuation, no leading articles.

    Steps, in order: lowercase, strip, drop punctuation characters, collapse
    whitespace runs, then peel leading article tokens. The result is a fixed
    point: normalize(normalize(x)) == normalize(x).
    """
    lowered = text.lower().strip()
    stripped = "".join(ch for ch in lowered if ch not in _PUNCTUATION)
    words = stripped.split()
    while words and words[0] in _ARTICLES:
        words.pop(0)
    return " ".join(words)


def hits_at_1(predicted: list[str], gold: list[str]) -> int:
    """1 if the first prediction matches any gold answer after normalization."""
    if not predicted:
        return 0
    first = normalize(predicted[0])
    return int(any(first == normalize(g) for g in gold))


def set_f1(predicted: list[str], gold: list[str]) -> float:
    """F1 between normalized, deduplicated answer sets.

    Both sets empty counts as a perfect 1.0; an empty prediction against a
    non-empty gold (or vice versa) is 0.0.
    """
    pred = {normalize(p) for p in predicted}
    gold_set = {normalize(g) for g in gold}
    if not pred and not gold_set:
        return 1.0
    if not pred or not gold_set:
        return 0.0
    overlap = len(pred & gold_set)
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred)
    recall = overlap / len(gold_set)
    return 2 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class ExampleScore:
    """Per-example scoring record, the unit all statistics operate on."""

    example_id: str
    hits_at_1: int
    f1: float
    gold_count: int
    predicted_count: int
    failure_flag: bool = False
    depth: int = 0


def bootstrap_ci(
    values,
    resamples: int = DEFAULT_RESAMPLES,
    level: float = 0.95,
    seed: int = DEFAULT_SEED,
) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of ``values``.

    Resamples with replacement ``resamples`` times using a seeded generator
    and returns the (1-level)/2 and 1-(1-level)/2 percentiles of the
    resampled means. Constant input collapses to a zero-width interval.
    """
    arr = np.asarray(list(values), dtype=float)
    if arr.size == 0:
        raise ValueError("bootstrap_ci requires at least one value")
    if resamples < 1:
        raise ValueError(f"resamples must be >= 1, got {resamples}")
    rng = np.random.default_rng(seed)
    means = np.empty(resamples, dtype=float)
    chunk = max(1, min(resamples, 20_000_000 // max(arr.size, 1)))
    done = 0
    while done < resamples:
        take = min(chunk, resamples - done)
        idx = rng.integers(0, arr.size, size=(take, arr.size))
        means[done : done + take] = arr[idx].mean(axis=1)
        done += take
    tail = 100.0 * (1.0 - level) / 2.0
    low, high = np.percentile(means, [tail, 100.0 - tail])
    return float(low), float(high)


def sign_test(wins: int, losses: int) -> float:
    """Exact two-sided binomial sign test p-value, ties excluded.

    p = min(1, 2 * P[Binomial(wins+losses, 1/2) <= min(wins, losses)]).
    Zero decided pairs yields 1.0.
    """
    if wins < 0 or losses < 0:
        raise ValueError("wins and losses must be non-negative")
    decided = wins + losses
    if decided == 0:
        return 1.0
    return float(min(1.0, 2.0 * binom.cdf(min(wins, losses), decided, 0.5)))


@dataclass(frozen=True)
class PairedComparison:
    n: int
    mean_delta_f1: float
    ci_low: float
    ci_high: float
    wins: int
    losses: int
    ties: int
    sign_p: float


def _aligned(
    scores_a: list[ExampleScore], scores_b: list[ExampleScore]
) -> list[tuple[ExampleScore, ExampleScore]]:
    """Pair scores by example id; any id mismatch is a hard error."""
    by_id_a = {s.example_id: s for s in scores_a}
    by_id_b = {s.example_id: s for s in scores_b}
    if len(by_id_a) != len(scores_a) or len(by_id_b) != len(scores_b):
        raise ValueError("duplicate example ids in paired scores")
    if by_id_a.keys() != by_id_b.keys():
        missing = sorted(by_id_a.keys() ^ by_id_b.keys())
        shown = ", ".join(missing[:10])
        if len(missing) > 10:
            shown += f", ... ({len(missing)} total)"
        raise ValueError(f"example ids do not match between runs: {shown}")
    return [(s, by_id_b[s.example_id]) for s in scores_a]


def paired_comparison(
    scores_a: list[ExampleScore],
    scores_b: list[ExampleScore],
    resamples: int = DEFAULT_RESAMPLES,
    seed: int = DEFAULT_SEED,
) -> PairedComparison:
    """Per-example F1 deltas (a minus b) with bootstrap CI and sign test.

    Alignment is strictly by example id; positional alignment is never used.
    """
    pairs = _aligned(scores_a, scores_b)
    deltas = [a.f1 - b.f1 for a, b in pairs]
    wins = sum(1 for d in deltas if d > 0)
    losses = sum(1 for d in deltas if d < 0)
    ties = len(deltas) - wins - losses
    low, high = bootstrap_ci(deltas, resamples=resamples, seed=seed)
    return PairedComparison(
        n=len(deltas),
        mean_delta_f1=float(np.mean(deltas)),
        ci_low=low,
        ci_high=high,
        wins=wins,
        losses=losses,
        ties=ties,
        sign_p=sign_test(wins, losses),
    )


@dataclass(frozen=True)
class CardinalitySplit:
    """Mean F1 delta split by gold answer-set size. ``None`` = empty subset."""

    single_n: int
    single_mean_delta: float | None
    multi_n: int
    multi_mean_delta: float | None


def cardinality_split(
    scores_a: list[ExampleScore], scores_b: list[ExampleScore]
) -> CardinalitySplit:
    """Split paired F1 deltas into single-gold and multi-gold examples.

    An empty subset reports ``None`` rather than pretending a zero delta.
    """
    pairs = _aligned(scores_a, scores_b)
    single: list[float] = []
    multi: list[float] = []
    for a, b in pairs:
        if a.gold_count != b.gold_count:
            raise ValueError(
                f"gold counts disagree for example {a.example_id!r}: "
                f"{a.gold_count} vs {b.gold_count}"
            )
        (single if a.gold_count == 1 else multi).append(a.f1 - b.f1)
    return CardinalitySplit(
        single_n=len(single),
        single_mean_delta=float(np.mean(single)) if single else None,
        multi_n=len(multi),
        multi_mean_delta=float(np.mean(multi)) if multi else None,
    )


@dataclass(frozen=True)
class DepthDiagnostics:
    avg_depth: float
    frac_at_limit: float
    no_answer_count: int


def depth_diagnostics(
    final_depths: list[int], depth_limit: int, no_answer_flags: list[bool]
) -> DepthDiagnostics:
    """Search-depth profile of a run plus its unanswered-example count."""
    if not final_depths:
        raise ValueError("depth diagnostics require at least one example")
    if len(final_depths) != len(no_answer_flags):
        raise ValueError("depths and no-answer flags must align")
    return DepthDiagnostics(
        avg_depth=float(np.mean(final_depths)),
        frac_at_limit=sum(1 for d in final_depths if d == depth_limit) / len(final_depths),
        no_answer_count=sum(1 for flag in no_answer_flags if flag),
    )


def aggregate_summary(scores: list[ExampleScore]) -> dict:
    """Headline means and counts for one run's scores."""
    if not scores:
        return {"n": 0, "hits_at_1": 0.0, "f1": 0.0, "no_answer_count": 0}
    return {
        "n": len(scores),
        "hits_at_1": float(np.mean([s.hits_at_1 for s in scores])),
        "f1": float(np.mean([s.f1 for s in scores])),
        "no_answer_count": sum(
            1 for s in scores if s.failure_flag or s.predicted_count == 0
        ),
    }
