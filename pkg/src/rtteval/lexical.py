"""Surface-level similarity metrics.

Corpus BLEU follows the WMT scorer exactly: clipped n-gram precisions for
orders 1-4 over corpus-summed statistics, exponential smoothing for
zero-match orders, brevity penalty, 0-100 scale.  Sentence BLEU is the
Moses-toolkit smoothed variant (add-one on numerator and denominator of
every order).  chrF is the character n-gram F-beta score with beta=3 over
whitespace-stripped character streams, at sentence level and from
corpus-summed counts.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .textnorm import Scheme, TokenSequence

BLEU_MAX_ORDER = 4
CHRF_MAX_ORDER = 6
CHRF_BETA = 3.0

# Log floor used by the reference scorer for zero precisions.
_LOG_FLOOR = -9999999999


@dataclass(frozen=True)
class NGramCounts:
    order: int
    counts: Counter

    def total(self) -> int:
        return sum(self.counts.values())


def ngram_counts(tokens: Sequence[str] | TokenSequence, n: int) -> NGramCounts:
    """Count every contiguous n-token window; too-short input yields empty counts."""
    if n < 1:
        raise ValueError("n-gram order must be >= 1")
    toks = tuple(tokens)
    counts = Counter(toks[i : i + n] for i in range(len(toks) - n + 1))
    return NGramCounts(n, counts)


@dataclass
class BleuStats:
    """Additive sufficient statistics for corpus BLEU."""

    matched: list = field(default_factory=lambda: [0] * BLEU_MAX_ORDER)
    totals: list = field(default_factory=lambda: [0] * BLEU_MAX_ORDER)
    hyp_len: int = 0
    ref_len: int = 0

    def __post_init__(self):
        for m, t in zip(self.matched, self.totals):
            if not 0 <= m <= t:
                raise ValueError("clipped matches must satisfy 0 <= matched <= total")

    def __add__(self, other: "BleuStats") -> "BleuStats":
        return BleuStats(
            [a + b for a, b in zip(self.matched, other.matched)],
            [a + b for a, b in zip(self.totals, other.totals)],
            self.hyp_len + other.hyp_len,
            self.ref_len + other.ref_len,
        )

    @classmethod
    def from_pair(cls, hyp: Sequence[str], ref: Sequence[str]) -> "BleuStats":
        matched = [0] * BLEU_MAX_ORDER
        totals = [0] * BLEU_MAX_ORDER
        for n in range(1, BLEU_MAX_ORDER + 1):
            hyp_counts = ngram_counts(hyp, n).counts
            ref_counts = ngram_counts(ref, n).counts
            totals[n - 1] = sum(hyp_counts.values())
            matched[n - 1] = sum(
                min(c, ref_counts[g]) for g, c in hyp_counts.items() if g in ref_counts
            )
        return cls(matched, totals, len(tuple(hyp)), len(tuple(ref)))


def _brevity_penalty(hyp_len: int, ref_len: int) -> float:
    if hyp_len >= ref_len:
        return 1.0
    return math.exp(1.0 - ref_len / hyp_len)


def corpus_bleu(pairs: Iterable[tuple[TokenSequence, TokenSequence]]) -> float:
    """Corpus BLEU with exponential smoothing over summed segment statistics."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("corpus_bleu requires at least one segment pair")
    stats = BleuStats()
    for hyp, ref in pairs:
        stats = stats + BleuStats.from_pair(hyp, ref)
    if stats.totals[0] == 0:
        raise ValueError("undefined precision: hypothesis stream has no tokens")

    precisions = [0.0] * BLEU_MAX_ORDER
    smooth = 1.0
    for n in range(BLEU_MAX_ORDER):
        if stats.totals[n] == 0:
            break
        if stats.matched[n] == 0:
            smooth *= 2.0
            precisions[n] = 100.0 / (smooth * stats.totals[n])
        else:
            precisions[n] = 100.0 * stats.matched[n] / stats.totals[n]

    log_sum = sum(math.log(p) if p > 0.0 else _LOG_FLOOR for p in precisions)
    return _brevity_penalty(stats.hyp_len, stats.ref_len) * math.exp(log_sum / BLEU_MAX_ORDER)


def sentence_bleu(hyp: TokenSequence | Sequence[str], ref: TokenSequence | Sequence[str]) -> float:
    """Smoothed sentence BLEU, 0-100: (matched+1)/(total+1) at every order."""
    hyp = tuple(hyp)
    ref = tuple(ref)
    if not hyp:
        raise ValueError("sentence_bleu: empty hypothesis")
    if not ref:
        raise ValueError("sentence_bleu: empty reference")
    score = 1.0
    for n in range(1, BLEU_MAX_ORDER + 1):
        hyp_counts = ngram_counts(hyp, n).counts
        ref_counts = ngram_counts(ref, n).counts
        matched = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items() if g in ref_counts)
        total = max(0, len(hyp) - n + 1)
        score *= (matched + 1.0) / (total + 1.0)
    score = score ** (1.0 / BLEU_MAX_ORDER)
    return 100.0 * _brevity_penalty(len(hyp), len(ref)) * score


def _require_char_stream(seq: TokenSequence, side: str) -> tuple[str, ...]:
    if isinstance(seq, TokenSequence):
        if seq.scheme is not Scheme.CHAR_STREAM:
            raise ValueError(f"chrF expects CHAR_STREAM input for {side}")
        return seq.tokens
    return tuple(seq)


def _chrf_order_stats(
    hyp_chars: Sequence[str], ref_chars: Sequence[str], max_n: int
) -> list[tuple[int, int, int]]:
    """Per-order (matched, hyp_total, ref_total) character n-gram counts."""
    stats = []
    for n in range(1, max_n + 1):
        hyp_counts = ngram_counts(hyp_chars, n).counts
        ref_counts = ngram_counts(ref_chars, n).counts
        matched = sum(min(c, ref_counts[g]) for g, c in hyp_counts.items() if g in ref_counts)
        stats.append((matched, sum(hyp_counts.values()), sum(ref_counts.values())))
    return stats


def _chrf_from_stats(stats: Sequence[tuple[int, int, int]], beta: float) -> float:
    precision_sum = 0.0
    recall_sum = 0.0
    effective = 0
    for matched, hyp_total, ref_total in stats:
        if hyp_total > 0 and ref_total > 0:
            precision_sum += matched / hyp_total
            recall_sum += matched / ref_total
            effective += 1
    if effective == 0:
        return 0.0
    precision = precision_sum / effective
    recall = recall_sum / effective
    if precision + recall == 0.0:
        return 0.0
    beta_sq = beta * beta
    return 100.0 * (1 + beta_sq) * precision * recall / (beta_sq * precision + recall)


def chrf(
    hyp_chars: TokenSequence,
    ref_chars: TokenSequence,
    max_n: int = CHRF_MAX_ORDER,
    beta: float = CHRF_BETA,
) -> float:
    """Sentence-level chrF over character streams, 0-100."""
    hyp = _require_char_stream(hyp_chars, "hypothesis")
    ref = _require_char_stream(ref_chars, "reference")
    if not hyp and not ref:
        raise ValueError("chrF undefined: both character streams are empty")
    if not hyp or not ref:
        return 0.0
    return _chrf_from_stats(_chrf_order_stats(hyp, ref, max_n), beta)


def chrf_corpus(
    pairs: Iterable[tuple[TokenSequence, TokenSequence]],
    max_n: int = CHRF_MAX_ORDER,
    beta: float = CHRF_BETA,
) -> float:
    """chrF from corpus-summed per-order counts (not the mean of segment scores)."""
    pairs = list(pairs)
    if not pairs:
        raise ValueError("chrf_corpus requires at least one segment pair")
    summed = [(0, 0, 0)] * max_n
    any_hyp = False
    any_ref = False
    for hyp_seq, ref_seq in pairs:
        hyp = _require_char_stream(hyp_seq, "hypothesis")
        ref = _require_char_stream(ref_seq, "reference")
        any_hyp = any_hyp or bool(hyp)
        any_ref = any_ref or bool(ref)
        seg = _chrf_order_stats(hyp, ref, max_n)
        summed = [
            (m0 + m1, h0 + h1, r0 + r1)
            for (m0, h0, r0), (m1, h1, r1) in zip(summed, seg)
        ]
    if not any_hyp and not any_ref:
        raise ValueError("chrF undefined: both corpus character streams are empty")
    if not any_hyp or not any_ref:
        return 0.0
    return _chrf_from_stats(summed, beta)
