"""Meta-evaluation statistics.

System-level metric quality is judged by Pearson correlation against human
scores; sentence-level quality by a Kendall's tau-like agreement over
relative-ranking pairs.  Top-N truncation curves, score variance, and
precision-recall AUC for paraphrase detection round out the toolbox.
Everything is pure and checked against brute-force re-computation in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence


@dataclass(frozen=True)
class CorrelationReport:
    r: float
    n: int
    pairing: tuple  # (label, x, y) triples

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("correlation requires n >= 2")
        if abs(self.r) > 1.0 + 1e-12:
            raise ValueError(f"correlation out of range: {self.r}")


@dataclass(frozen=True)
class TauReport:
    tau: float
    concordant: int
    discordant: int


@dataclass(frozen=True)
class PRCurve:
    points: tuple  # (recall, precision), recall non-decreasing
    auc: float

    def __post_init__(self):
        recalls = [r for r, _ in self.points]
        if any(b < a for a, b in zip(recalls, recalls[1:])):
            raise ValueError("recall must be non-decreasing along the curve")
        if not -1e-12 <= self.auc <= 1.0 + 1e-12:
            raise ValueError(f"AUC out of range: {self.auc}")


def pearson(
    xs: Sequence[float], ys: Sequence[float], labels: Sequence[str] | None = None
) -> CorrelationReport:
    """Product-moment correlation; errors on constant input (undefined r)."""
    if len(xs) != len(ys):
        raise ValueError("pearson: length mismatch")
    n = len(xs)
    if n < 2:
        raise ValueError("pearson requires at least two points")
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    var_x = sum((x - mean_x) ** 2 for x in xs)
    var_y = sum((y - mean_y) ** 2 for y in ys)
    if var_x == 0.0 or var_y == 0.0:
        raise ValueError("undefined correlation: constant sequence")
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    r = cov / math.sqrt(var_x * var_y)
    if labels is None:
        labels = [str(i) for i in range(n)]
    pairing = tuple(zip(labels, xs, ys))
    return CorrelationReport(r, n, pairing)


def kendall_tau_darr(
    metric_scores: Mapping[tuple[str, str], float],
    pairs: Sequence,
    include_ties: bool = True,
) -> TauReport:
    """Agreement with relative-ranking pairs: tau = (C - D) / (C + D).

    A pair is concordant when the better system outscores the worse one on
    its segment.  Ties count as discordant (WMT convention) unless
    include_ties is False, in which case they are dropped.
    """
    if not pairs:
        raise ValueError("kendall_tau_darr: empty pair list")
    concordant = 0
    discordant = 0
    for pair in pairs:
        segment_id, better, worse = pair.segment_id, pair.better, pair.worse
        try:
            better_score = metric_scores[(better, segment_id)]
            worse_score = metric_scores[(worse, segment_id)]
        except KeyError as exc:
            raise ValueError(f"missing metric score for pair {pair}: {exc}") from None
        if better_score > worse_score:
            concordant += 1
        elif better_score < worse_score:
            discordant += 1
        elif include_ties:
            discordant += 1
    if concordant + discordant == 0:
        raise ValueError("kendall_tau_darr: no scorable pairs")
    tau = (concordant - discordant) / (concordant + discordant)
    return TauReport(tau, concordant, discordant)


def topn_curve(
    system_scores: Mapping[str, float],
    human_scores: Mapping[str, float],
    min_n: int = 4,
) -> list[tuple[int, float]]:
    """Pearson r over the n best systems (by human score), n from all down to min_n."""
    systems = sorted(human_scores, key=lambda s: (-human_scores[s], s))
    if len(systems) < min_n:
        raise ValueError(f"top-N curve needs at least {min_n} systems, got {len(systems)}")
    missing = [s for s in systems if s not in system_scores]
    if missing:
        raise ValueError(f"metric scores missing for systems: {missing}")
    curve = []
    for n in range(len(systems), min_n - 1, -1):
        top = systems[:n]
        report = pearson(
            [system_scores[s] for s in top], [human_scores[s] for s in top], labels=top
        )
        curve.append((n, report.r))
    return curve


def score_variance(segment_scores: Sequence[float]) -> float:
    """Unbiased (n-1) sample variance of segment scores."""
    n = len(segment_scores)
    if n < 2:
        raise ValueError("variance requires at least two scores")
    mean = sum(segment_scores) / n
    return sum((s - mean) ** 2 for s in segment_scores) / (n - 1)


def pr_auc(scores: Sequence[float], labels: Sequence[int]) -> PRCurve:
    """Precision-recall curve and its trapezoidal AUC over recall.

    Items are swept by descending score; equal scores enter as one block so
    the curve is independent of tie ordering.  The curve is anchored at
    (recall 0, precision 1).
    """
    if len(scores) != len(labels):
        raise ValueError("pr_auc: length mismatch")
    if any(label not in (0, 1) for label in labels):
        raise ValueError("pr_auc: labels must be 0 or 1")
    total_pos = sum(labels)
    if total_pos == 0:
        raise ValueError("pr_auc: no positive labels")

    blocks: dict[float, list[int]] = {}
    for score, label in zip(scores, labels):
        blocks.setdefault(score, []).append(label)

    points = [(0.0, 1.0)]
    true_pos = 0
    seen = 0
    for score in sorted(blocks, reverse=True):
        true_pos += sum(blocks[score])
        seen += len(blocks[score])
        points.append((true_pos / total_pos, true_pos / seen))

    auc = 0.0
    for (r0, p0), (r1, p1) in zip(points, points[1:]):
        auc += (r1 - r0) * (p1 + p0) / 2.0
    return PRCurve(tuple(points), auc)


def da_variance_analysis(human) -> float:
    """Sample variance of the per-system averaged human scores."""
    scores = list(human.da_system_scores.values())
    return score_variance(scores)
