import json

import pytest

from rtteval.corpus_io import SystemSubmission, TestSet
from rtteval.errors import ConfigError, MissingResourceError, ProviderError
from rtteval.pipeline import (
    Aggregation,
    MetricScoreSet,
    RoundTripRecord,
    ScoringResources,
    rank_segments,
    read_records,
    read_score_set,
    run_round_trip,
    score_metric,
    write_score_set,
)
from rtteval.providers import DiskCache, ProviderConfig, ProviderKind, TranslationClient
from rtteval.textnorm import RawSegment

SOURCES = ["the cat sat", "a dog barked loudly", "rivers flow to the sea"]


def _testset():
    return TestSet(
        ("en", "de"),
        tuple(RawSegment(str(i + 1), t, "en") for i, t in enumerate(SOURCES)),
    )


def _submission(outputs, system_id="sysX"):
    return SystemSubmission(
        system_id,
        ("en", "de"),
        tuple(RawSegment(str(i + 1), t, "de") for i, t in enumerate(outputs)),
    )


def _echo_cfg(**kwargs):
    return ProviderConfig("echo-bt", ProviderKind.TRANSLATION, "echo:", **kwargs)


def _fixture_embeddings(tmp_path, texts):
    path = tmp_path / "emb.jsonl"
    rows = []
    for text in texts:
        pieces = text.split()
        vec = [float(len(text)), float(len(pieces)), 1.0]
        rows.append(
            {
                "text": text,
                "sentence_vector": vec,
                "wordpieces": pieces,
                "token_vectors": [[float(len(p)), float(i + 1), 1.0] for i, p in enumerate(pieces)],
            }
        )
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    return ProviderConfig("fix-emb", ProviderKind.EMBEDDING, f"fixture:{path}")


def test_echo_provider_round_trip_equals_ft_output(tmp_path):
    records = run_round_trip(
        _submission(["k1", "k2", "k3"]), _testset(), _echo_cfg(), tmp_path / "run"
    )
    for record in records:
        assert record.round_trip.text == record.ft_output.text
        assert record.round_trip.lang == "en"
        assert record.bt_provider_id == "echo-bt"
    assert (tmp_path / "run" / "records.jsonl").exists()
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert manifest["system_id"] == "sysX"
    assert manifest["n_segments"] == 3


def test_records_round_trip_through_disk(tmp_path):
    records = run_round_trip(
        _submission(["k1", "k2", "k3"]), _testset(), _echo_cfg(), tmp_path / "run"
    )
    assert read_records(tmp_path / "run") == records


def test_warm_cache_rerun_is_identical_with_zero_requests(tmp_path):
    cache = DiskCache(tmp_path / "cache")
    cfg = _echo_cfg()
    first = run_round_trip(
        _submission(["k1", "k2", "k3"]), _testset(), cfg, tmp_path / "r1", cache=cache
    )
    client = TranslationClient(cfg, cache=cache)
    second = run_round_trip(
        _submission(["k1", "k2", "k3"]), _testset(), cfg, tmp_path / "r2",
        cache=cache, client=client,
    )
    assert first == second
    assert client.stats.cache_hits == 3
    assert client.stats.items_fetched == 0
    assert (tmp_path / "r1" / "records.jsonl").read_bytes() == (
        tmp_path / "r2" / "records.jsonl"
    ).read_bytes()


def test_provider_failure_names_segments_and_keeps_prefix_cached(tmp_path):
    table = tmp_path / "bt.tsv"
    table.write_text("k1\tb1\nk2\tb2\nk3\tb3\nk4\tb4\n", encoding="utf-8")
    cfg = ProviderConfig(
        "table-bt", ProviderKind.TRANSLATION, f"table:{table}", batch_size=1
    )
    sources = tuple(RawSegment(str(i + 1), f"s{i+1}", "en") for i in range(5))
    testset = TestSet(("en", "de"), sources)
    submission = SystemSubmission(
        "sysX", ("en", "de"),
        tuple(RawSegment(str(i + 1), t, "de") for i, t in enumerate(["k1", "k2", "k3", "k4", "boom"])),
    )
    cache = DiskCache(tmp_path / "cache")
    with pytest.raises(ProviderError, match=r"segments \['5'\]"):
        run_round_trip(submission, testset, cfg, tmp_path / "run", cache=cache)
    cached = list((tmp_path / "cache").rglob("*.bin"))
    assert len(cached) == 4  # segments 1-4 are already cached


def test_misaligned_submission_rejected(tmp_path):
    with pytest.raises(ConfigError):
        run_round_trip(_submission(["k1", "k2"]), _testset(), _echo_cfg(), tmp_path / "r")


# --- scoring ------------------------------------------------------------------

def _identity_records():
    return [
        RoundTripRecord(
            str(i + 1),
            RawSegment(str(i + 1), text, "en"),
            RawSegment(str(i + 1), text, "de"),
            RawSegment(str(i + 1), text, "en"),
            "echo-bt",
        )
        for i, text in enumerate(SOURCES)
    ]


def test_identity_round_trip_scores_100_everywhere(tmp_path):
    records = _identity_records()
    emb_cfg = _fixture_embeddings(tmp_path, SOURCES)
    resources = ScoringResources(
        sentence_embedding_cfgs={"en": emb_cfg}, token_embedding_cfg=emb_cfg
    )
    for metric_id in ("rtt-sentbleu", "rtt-chrf", "rtt-sbert", "rtt-bertscore"):
        score_set = score_metric(metric_id, records, resources)
        assert all(s == pytest.approx(100.0, abs=1e-9) for s in score_set.segment_scores)
    bleu = score_metric("rtt-bleu", records, resources)
    assert bleu.system_score == pytest.approx(100.0, abs=1e-6)
    assert bleu.aggregation is Aggregation.CORPUS_LEVEL
    assert bleu.segment_scores == ()


def test_unknown_metric_lists_valid_names():
    with pytest.raises(ConfigError, match="rtt-sentbleu"):
        score_metric("nope", _identity_records(), ScoringResources())


def test_semantic_metric_without_provider_is_resource_error():
    with pytest.raises(MissingResourceError):
        score_metric("rtt-sbert", _identity_records(), ScoringResources())
    with pytest.raises(MissingResourceError):
        score_metric("rtt-bertscore", _identity_records(), ScoringResources())


def test_language_routing_falls_back_to_base_tag(tmp_path):
    emb_cfg = _fixture_embeddings(tmp_path, SOURCES)
    resources = ScoringResources(sentence_embedding_cfgs={"en": emb_cfg})
    assert resources.sentence_cfg_for("en-GB") is emb_cfg
    with pytest.raises(MissingResourceError):
        resources.sentence_cfg_for("fi")


def test_mean_aggregation_invariant_enforced():
    with pytest.raises(ValueError, match="mean"):
        MetricScoreSet("m", ("1", "2"), (10.0, 20.0), 99.0, Aggregation.MEAN_OF_SEGMENTS)


def test_lexical_scores_do_not_need_embeddings():
    score_set = score_metric("rtt-sentbleu", _identity_records(), ScoringResources())
    assert score_set.system_score == pytest.approx(100.0)


def test_mean_aggregation_bounds_and_permutation_invariance(tmp_path):
    emb_cfg = _fixture_embeddings(tmp_path, SOURCES + ["k1", "k2", "k3"])
    resources = ScoringResources(
        sentence_embedding_cfgs={"en": emb_cfg}, token_embedding_cfg=emb_cfg
    )
    records = [
        RoundTripRecord(
            str(i + 1),
            RawSegment(str(i + 1), src, "en"),
            RawSegment(str(i + 1), out, "de"),
            RawSegment(str(i + 1), out, "en"),
            "echo-bt",
        )
        for i, (src, out) in enumerate(zip(SOURCES, ["k1", "k2", "k3"]))
    ]
    for metric_id in ("rtt-sentbleu", "rtt-sbert", "rtt-bertscore"):
        score_set = score_metric(metric_id, records, resources)
        assert min(score_set.segment_scores) <= score_set.system_score
        assert score_set.system_score <= max(score_set.segment_scores)
        reordered = score_metric(metric_id, list(reversed(records)), resources)
        assert reordered.system_score == pytest.approx(score_set.system_score, abs=1e-9)


# --- ranking ------------------------------------------------------------------

def _score_set(ids, scores):
    return MetricScoreSet(
        "m", tuple(ids), tuple(scores), sum(scores) / len(scores),
        Aggregation.MEAN_OF_SEGMENTS,
    )


def test_rank_segments_descending():
    assert rank_segments(_score_set(["a", "b", "c"], [0.9, 0.1, 0.5])) == ["a", "c", "b"]


def test_rank_segments_ties_break_by_id():
    assert rank_segments(_score_set(["c", "a", "b"], [1.0, 1.0, 1.0])) == ["a", "b", "c"]


def test_rank_segments_requires_segment_scores():
    empty = MetricScoreSet("rtt-bleu", (), (), 42.0, Aggregation.CORPUS_LEVEL)
    with pytest.raises(ValueError):
        rank_segments(empty)


# --- score persistence ----------------------------------------------------------

def test_score_file_round_trip_and_determinism(tmp_path):
    score_set = score_metric("rtt-sentbleu", _identity_records(), ScoringResources())
    path_one = write_score_set(score_set, tmp_path)
    first = path_one.read_bytes()
    path_two = write_score_set(score_set, tmp_path)
    assert path_two.read_bytes() == first
    loaded = read_score_set(tmp_path, "rtt-sentbleu")
    assert loaded == score_set
