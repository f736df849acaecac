"""End-to-end round-trip scoring pipeline.

For each system submission the forward outputs are translated back to the
source language by the configured provider, producing one record per
segment.  Records are scored by any of the five metrics; semantic metrics
aggregate to system level as the mean of segment scores, while corpus BLEU
and corpus chrF are computed from corpus-summed statistics.  Every run is
persisted to a run directory (manifest + JSON-lines artifacts) so reruns
with a warm cache are bit-identical.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from . import lexical, semantic
from .corpus_io import SystemSubmission, TestSet
from .errors import ConfigError, MissingResourceError, ProviderError
from .providers import (
    DiskCache,
    EmbeddingClient,
    ProviderConfig,
    TranslationClient,
    cache_key,
)
from .textnorm import RawSegment, Scheme, char_stream, normalize, split_cjk_chars, tokenize

FORMAT_VERSION = 1
METRIC_IDS = ("rtt-bleu", "rtt-sentbleu", "rtt-chrf", "rtt-sbert", "rtt-bertscore")
SEGMENT_LEVEL_METRICS = ("rtt-sentbleu", "rtt-chrf", "rtt-sbert", "rtt-bertscore")


class Aggregation(Enum):
    MEAN_OF_SEGMENTS = "mean_of_segments"
    CORPUS_LEVEL = "corpus_level"


@dataclass(frozen=True)
class RoundTripRecord:
    segment_id: str
    input: RawSegment
    ft_output: RawSegment
    round_trip: RawSegment
    bt_provider_id: str

    def __post_init__(self):
        if self.input.lang != self.round_trip.lang:
            raise ValueError(
                f"round trip must come back in the input language: "
                f"{self.input.lang} vs {self.round_trip.lang}"
            )


@dataclass(frozen=True)
class MetricScoreSet:
    metric_id: str
    segment_ids: tuple[str, ...]
    segment_scores: tuple[float, ...]
    system_score: float
    aggregation: Aggregation

    def __post_init__(self):
        if len(self.segment_ids) != len(self.segment_scores):
            raise ValueError("segment ids and scores must align")
        if self.aggregation is Aggregation.MEAN_OF_SEGMENTS:
            mean = sum(self.segment_scores) / len(self.segment_scores)
            if abs(mean - self.system_score) > 1e-9:
                raise ValueError("system score must equal the mean of segment scores")


@dataclass
class ScoringResources:
    """Providers and shared tables the metrics need."""

    sentence_embedding_cfgs: Mapping[str, ProviderConfig] | None = None
    token_embedding_cfg: ProviderConfig | None = None
    idf_table: semantic.IdfTable | None = None
    cache: DiskCache | None = None
    offline: bool = False

    def sentence_cfg_for(self, lang: str) -> ProviderConfig:
        cfgs = self.sentence_embedding_cfgs or {}
        if lang in cfgs:
            return cfgs[lang]
        base = lang.split("-")[0]
        if base in cfgs:
            return cfgs[base]
        raise MissingResourceError(
            f"no sentence embedding provider configured for language {lang!r}"
        )


def _lexical_tokens(text: str, lang: str):
    if lang.lower().startswith("zh"):
        text = split_cjk_chars(text)
    return tokenize(text, Scheme.TOK_INTL, lowercase=True)


def _chars(text: str):
    return char_stream(normalize(text))


def run_round_trip(
    submission: SystemSubmission,
    testset: TestSet,
    bt: ProviderConfig,
    run_dir: str | Path,
    cache: DiskCache | None = None,
    offline: bool = False,
    client: TranslationClient | None = None,
) -> list[RoundTripRecord]:
    """Produce one (input, round-trip) record per segment and persist the run."""
    if len(submission.outputs) != len(testset.sources):
        raise ConfigError(
            f"submission {submission.system_id} has {len(submission.outputs)} outputs "
            f"for {len(testset.sources)} sources"
        )
    if submission.pair != testset.pair:
        raise ConfigError(
            f"submission pair {submission.pair} does not match test set {testset.pair}"
        )
    src_lang, tgt_lang = testset.pair
    if client is None:
        client = TranslationClient(bt, cache=cache, offline=offline)
    ft_texts = [seg.text for seg in submission.outputs]
    try:
        back = client.translate_batch(ft_texts, src=tgt_lang, tgt=src_lang)
    except ProviderError as exc:
        failed_segments = [testset.sources[i].id for i in exc.failed_indices]
        raise ProviderError(
            f"backward translation failed for segments {failed_segments}: {exc}",
            failed_indices=exc.failed_indices,
        ) from None
    records = [
        RoundTripRecord(
            source.id,
            source,
            output,
            RawSegment(source.id, back_text, src_lang),
            bt.provider_id,
        )
        for source, output, back_text in zip(testset.sources, submission.outputs, back)
    ]
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    write_records(records, run_dir)
    digest = hashlib.sha256()
    for text in ft_texts:
        digest.update(cache_key(bt.provider_id, tgt_lang, src_lang, text).encode())
    manifest = {
        "format_version": FORMAT_VERSION,
        "created_at": datetime.now(timezone.utc).isoformat(),
        "system_id": submission.system_id,
        "pair": list(testset.pair),
        "n_segments": len(records),
        "bt_provider": bt.public_view(),
        "cache_keys_digest": digest.hexdigest(),
    }
    (run_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return records


def _segment_to_json(seg: RawSegment) -> dict:
    return {"id": seg.id, "text": seg.text, "lang": seg.lang}


def _segment_from_json(obj: dict) -> RawSegment:
    return RawSegment(obj["id"], obj["text"], obj["lang"])


def write_records(records: Sequence[RoundTripRecord], run_dir: str | Path) -> Path:
    path = Path(run_dir) / "records.jsonl"
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps({"format_version": FORMAT_VERSION, "kind": "records"}) + "\n")
        for record in records:
            row = {
                "segment_id": record.segment_id,
                "input": _segment_to_json(record.input),
                "ft_output": _segment_to_json(record.ft_output),
                "round_trip": _segment_to_json(record.round_trip),
                "bt_provider_id": record.bt_provider_id,
            }
            handle.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
    return path


def read_records(run_dir: str | Path) -> list[RoundTripRecord]:
    path = Path(run_dir) / "records.jsonl"
    if not path.exists():
        raise MissingResourceError(f"no records found in {run_dir}")
    records = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        if "segment_id" not in row:
            continue
        records.append(
            RoundTripRecord(
                row["segment_id"],
                _segment_from_json(row["input"]),
                _segment_from_json(row["ft_output"]),
                _segment_from_json(row["round_trip"]),
                row["bt_provider_id"],
            )
        )
    return records


def score_metric(
    metric_id: str,
    records: Sequence[RoundTripRecord],
    resources: ScoringResources | None = None,
) -> MetricScoreSet:
    """Score every record with one metric and aggregate to system level."""
    if metric_id not in METRIC_IDS:
        raise ConfigError(
            f"unknown metric {metric_id!r}; valid metrics: {', '.join(METRIC_IDS)}"
        )
    if not records:
        raise ConfigError("score_metric: no records")
    resources = resources or ScoringResources()
    segment_ids = tuple(record.segment_id for record in records)
    inputs = [record.input.text for record in records]
    round_trips = [record.round_trip.text for record in records]
    lang = records[0].input.lang

    if metric_id in ("rtt-bleu", "rtt-sentbleu", "rtt-chrf"):
        hyp_tokens = [_lexical_tokens(text, lang) for text in round_trips]
        ref_tokens = [_lexical_tokens(text, lang) for text in inputs]
        if metric_id == "rtt-bleu":
            system = lexical.corpus_bleu(list(zip(hyp_tokens, ref_tokens)))
            return MetricScoreSet(metric_id, (), (), system, Aggregation.CORPUS_LEVEL)
        if metric_id == "rtt-sentbleu":
            scores = tuple(
                lexical.sentence_bleu(hyp, ref) for hyp, ref in zip(hyp_tokens, ref_tokens)
            )
            return MetricScoreSet(
                metric_id, segment_ids, scores, sum(scores) / len(scores),
                Aggregation.MEAN_OF_SEGMENTS,
            )
        hyp_chars = [_chars(text) for text in round_trips]
        ref_chars = [_chars(text) for text in inputs]
        scores = tuple(
            lexical.chrf(hyp, ref) for hyp, ref in zip(hyp_chars, ref_chars)
        )
        system = lexical.chrf_corpus(list(zip(hyp_chars, ref_chars)))
        return MetricScoreSet(
            metric_id, segment_ids, scores, system, Aggregation.CORPUS_LEVEL
        )

    if metric_id == "rtt-sbert":
        cfg = resources.sentence_cfg_for(lang)
        client = EmbeddingClient(cfg, cache=resources.cache, offline=resources.offline)
        input_vecs = client.fetch_sentence_embeddings(inputs)
        rtt_vecs = client.fetch_sentence_embeddings(round_trips)
        scores = tuple(
            100.0 * semantic.cosine_similarity(a, b)
            for a, b in zip(input_vecs, rtt_vecs)
        )
        return MetricScoreSet(
            metric_id, segment_ids, scores, sum(scores) / len(scores),
            Aggregation.MEAN_OF_SEGMENTS,
        )

    # rtt-bertscore
    cfg = resources.token_embedding_cfg
    if cfg is None:
        raise MissingResourceError("no token embedding provider configured")
    client = EmbeddingClient(cfg, cache=resources.cache, offline=resources.offline)
    input_tokens = client.fetch_token_embeddings(inputs)
    rtt_tokens = client.fetch_token_embeddings(round_trips)
    idf = resources.idf_table
    if idf is None:
        idf = semantic.build_idf_table([emb.wordpieces for emb in input_tokens])
    scores = tuple(
        100.0 * semantic.greedy_match_fscore(x_emb, xhat_emb, idf)[2]
        for x_emb, xhat_emb in zip(input_tokens, rtt_tokens)
    )
    return MetricScoreSet(
        metric_id, segment_ids, scores, sum(scores) / len(scores),
        Aggregation.MEAN_OF_SEGMENTS,
    )


def rank_segments(score_set: MetricScoreSet) -> list[str]:
    """Segment ids by descending score; ties broken by ascending segment id."""
    if not score_set.segment_scores:
        raise ValueError(f"{score_set.metric_id} has no per-segment scores to rank")
    paired = sorted(
        zip(score_set.segment_ids, score_set.segment_scores),
        key=lambda item: (-item[1], item[0]),
    )
    return [segment_id for segment_id, _ in paired]


def write_score_set(score_set: MetricScoreSet, run_dir: str | Path) -> Path:
    path = Path(run_dir) / f"scores.{score_set.metric_id}.jsonl"
    with open(path, "w", encoding="utf-8") as handle:
        header = {
            "format_version": FORMAT_VERSION,
            "kind": "scores",
            "metric_id": score_set.metric_id,
            "aggregation": score_set.aggregation.value,
            "system_score": score_set.system_score,
        }
        handle.write(json.dumps(header, sort_keys=True) + "\n")
        for segment_id, score in zip(score_set.segment_ids, score_set.segment_scores):
            handle.write(
                json.dumps({"score": score, "segment_id": segment_id}, sort_keys=True) + "\n"
            )
    return path


def read_score_set(run_dir: str | Path, metric_id: str) -> MetricScoreSet:
    path = Path(run_dir) / f"scores.{metric_id}.jsonl"
    if not path.exists():
        raise MissingResourceError(f"no scores for {metric_id} in {run_dir}")
    header = None
    ids = []
    scores = []
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        if row.get("kind") == "scores":
            header = row
        elif "segment_id" in row:
            ids.append(row["segment_id"])
            scores.append(row["score"])
    if header is None:
        raise MissingResourceError(f"malformed score file {path}: no header")
    return MetricScoreSet(
        header["metric_id"],
        tuple(ids),
        tuple(scores),
        header["system_score"],
        Aggregation(header["aggregation"]),
    )
