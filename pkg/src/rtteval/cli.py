"""Operator surface: roundtrip -> score -> evaluate / paraphrase.

A single TOML config names the test set, the system submissions, the
backward-translation provider, and per-language embedding providers.  It
is validated in full before any network activity.  Exit codes: 0 success,
2 user/config error, 3 missing resource, 4 provider failure.
"""

from __future__ import annotations

import contextlib
import functools
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import click
import tomli

from . import pipeline, reports
from .corpus_io import (
    HumanJudgmentSet,
    load_darr_pairs,
    load_human_judgments,
    load_paws,
    load_system_outputs,
    load_testset,
    load_win_ratios,
)
from .errors import ConfigError, MissingResourceError, ProviderError
from .metaeval import pr_auc
from .pipeline import (
    METRIC_IDS,
    SEGMENT_LEVEL_METRICS,
    RoundTripRecord,
    ScoringResources,
    run_round_trip,
    score_metric,
)
from .providers import DiskCache, EmbeddingClient, ProviderConfig, ProviderKind, TranslationClient
from .semantic import build_idf_table
from .textnorm import RawSegment

EXIT_CONFIG = 2
EXIT_RESOURCE = 3
EXIT_PROVIDER = 4


@dataclass
class RunConfig:
    base_dir: Path
    pair: tuple[str, str] | None = None
    sources_path: Path | None = None
    references_path: Path | None = None
    submissions: list[tuple[str, Path]] = field(default_factory=list)
    bt: ProviderConfig | None = None
    sentence_embedding_cfgs: dict[str, ProviderConfig] = field(default_factory=dict)
    token_embedding_cfg: ProviderConfig | None = None
    metrics: list[str] = field(default_factory=list)
    output_dir: Path = Path("runs")
    cache_dir: Path | None = None

    def require_roundtrip_sections(self) -> None:
        if self.sources_path is None:
            raise ConfigError("config has no [testset] section")
        if not self.submissions:
            raise ConfigError("config has no [[submissions]] entries")
        if self.bt is None:
            raise ConfigError("config has no [bt] provider section")


def _resolve_endpoint(endpoint: str, base: Path) -> str:
    scheme, _, locator = endpoint.partition(":")
    if scheme in ("table", "fixture"):
        return f"{scheme}:{(base / locator).resolve()}"
    return endpoint


def _provider_from_table(table: dict, kind: ProviderKind, base: Path, context: str) -> ProviderConfig:
    try:
        return ProviderConfig(
            provider_id=table["provider_id"],
            kind=kind,
            endpoint=_resolve_endpoint(table["endpoint"], base),
            auth_env=table.get("auth_env", ""),
            rate_limit=float(table.get("rate_limit", 2.0)),
            timeout=float(table.get("timeout", 30.0)),
            max_retries=int(table.get("max_retries", 3)),
            batch_size=int(table.get("batch_size", 32)),
        )
    except KeyError as exc:
        raise ConfigError(f"{context}: missing provider key {exc}") from None


def load_run_config(path: str | Path) -> RunConfig:
    """Parse and validate the TOML run configuration; fail before any network use."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as handle:
            doc = tomli.load(handle)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: invalid TOML: {exc}") from None
    base = path.parent.resolve()

    pair = None
    sources_path = None
    references_path = None
    if "testset" in doc:
        try:
            testset_table = doc["testset"]
            pair = (testset_table["src_lang"], testset_table["tgt_lang"])
            sources_path = base / testset_table["sources"]
        except KeyError as exc:
            raise ConfigError(f"{path}: missing [testset] key {exc}") from None
        if not sources_path.exists():
            raise ConfigError(f"missing source file: {sources_path}")
        if "references" in testset_table:
            references_path = base / testset_table["references"]
            if not references_path.exists():
                raise ConfigError(f"missing references file: {references_path}")

    submissions = []
    seen_ids = set()
    for sub in doc.get("submissions", []):
        try:
            system_id = sub["system_id"]
            outputs = base / sub["outputs"]
        except KeyError as exc:
            raise ConfigError(f"{path}: submission missing key {exc}") from None
        if system_id in seen_ids:
            raise ConfigError(f"duplicate system_id {system_id!r}")
        seen_ids.add(system_id)
        if not outputs.exists():
            raise ConfigError(f"missing submission file: {outputs}")
        submissions.append((system_id, outputs))

    bt = None
    if "bt" in doc:
        bt = _provider_from_table(doc["bt"], ProviderKind.TRANSLATION, base, "[bt]")

    sentence_cfgs = {}
    embeddings = doc.get("embeddings", {})
    for lang, table in embeddings.get("sentence", {}).items():
        sentence_cfgs[lang] = _provider_from_table(
            table, ProviderKind.EMBEDDING, base, f"[embeddings.sentence.{lang}]"
        )
    token_cfg = None
    if "token" in embeddings:
        token_cfg = _provider_from_table(
            embeddings["token"], ProviderKind.EMBEDDING, base, "[embeddings.token]"
        )

    run_table = doc.get("run", {})
    metrics = list(run_table.get("metrics", list(METRIC_IDS)))
    unknown = [m for m in metrics if m not in METRIC_IDS]
    if unknown:
        raise ConfigError(
            f"unknown metrics {unknown}; valid metrics: {', '.join(METRIC_IDS)}"
        )
    output_dir = base / run_table.get("output_dir", "runs")
    cache_dir = base / run_table["cache_dir"] if "cache_dir" in run_table else None

    return RunConfig(
        base_dir=base,
        pair=pair,
        sources_path=sources_path,
        references_path=references_path,
        submissions=submissions,
        bt=bt,
        sentence_embedding_cfgs=sentence_cfgs,
        token_embedding_cfg=token_cfg,
        metrics=metrics,
        output_dir=output_dir,
        cache_dir=cache_dir,
    )


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"rtteval: error: config: {exc}", err=True)
            sys.exit(EXIT_CONFIG)
        except MissingResourceError as exc:
            click.echo(f"rtteval: error: resource: {exc}", err=True)
            sys.exit(EXIT_RESOURCE)
        except ProviderError as exc:
            click.echo(f"rtteval: error: provider: {exc}", err=True)
            sys.exit(EXIT_PROVIDER)
        except ValueError as exc:
            # data-level errors surfaced by metric/statistics contracts
            # (empty hypothesis, undefined correlation, ...)
            click.echo(f"rtteval: error: data: {exc}", err=True)
            sys.exit(EXIT_CONFIG)

    return wrapper


@click.group()
def main():
    """Round-trip translation quality estimation toolkit."""


def _cache_for(config: RunConfig) -> DiskCache | None:
    return DiskCache(config.cache_dir) if config.cache_dir is not None else None


def _resources_for(config: RunConfig, offline: bool) -> ScoringResources:
    return ScoringResources(
        sentence_embedding_cfgs=config.sentence_embedding_cfgs,
        token_embedding_cfg=config.token_embedding_cfg,
        cache=_cache_for(config),
        offline=offline,
    )


@contextlib.contextmanager
def _run_dir_lock(root: Path):
    """One writer per run directory; stale locks must be removed by hand."""
    lock = root / ".lock"
    try:
        fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise ConfigError(
            f"run directory {root} is locked by another invocation "
            f"(remove {lock} if stale)"
        ) from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        os.close(fd)
        yield
    finally:
        lock.unlink(missing_ok=True)


@main.command("roundtrip")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--run-dir", "run_dir", type=click.Path(), default=None,
              help="Output run directory (default: <output_dir>/<timestamp>).")
@click.option("--offline", is_flag=True, help="Forbid network access; fixtures only.")
@_handle_errors
def cmd_roundtrip(config_path, run_dir, offline):
    """Produce round-trip records for every configured submission."""
    config = load_run_config(config_path)
    config.require_roundtrip_sections()
    testset = load_testset(config.sources_path, config.pair, config.references_path)
    if run_dir is None:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")
        root = config.output_dir / stamp
    else:
        root = Path(run_dir)
    root.mkdir(parents=True, exist_ok=True)
    cache = _cache_for(config)
    client = TranslationClient(config.bt, cache=cache, offline=offline)

    with _run_dir_lock(root):
        systems = []
        for system_id, outputs_path in config.submissions:
            submission = load_system_outputs(outputs_path, testset, system_id=system_id)
            records = run_round_trip(
                submission, testset, config.bt, root / system_id,
                cache=cache, offline=offline, client=client,
            )
            systems.append(system_id)
            click.echo(f"{system_id}: {len(records)} segments round-tripped")
        run_manifest = {
            "format_version": pipeline.FORMAT_VERSION,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "pair": list(config.pair),
            "systems": systems,
            "bt_provider": config.bt.public_view(),
        }
        (root / "run_manifest.json").write_text(
            json.dumps(run_manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
    click.echo(
        f"{client.stats.requests_issued} requests issued, "
        f"{client.stats.cache_hits} cache hits"
    )
    click.echo(f"run directory: {root}")


def _discover_systems(root: Path) -> list[str]:
    manifest_path = root / "run_manifest.json"
    if manifest_path.exists():
        return json.loads(manifest_path.read_text(encoding="utf-8"))["systems"]
    if (root / "records.jsonl").exists():
        manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
        return [manifest["system_id"]]
    systems = sorted(
        p.name for p in root.iterdir() if (p / "records.jsonl").exists()
    )
    if not systems:
        raise ConfigError(f"no round-trip runs found under {root}")
    return systems


def _system_dir(root: Path, system_id: str) -> Path:
    return root if (root / "records.jsonl").exists() else root / system_id


@main.command("score")
@click.option("--run-dir", "run_dir", required=True, type=click.Path())
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--metrics", "metrics_csv", default=None,
              help=f"Comma list from {{{','.join(METRIC_IDS)}}} (default: config).")
@click.option("--offline", is_flag=True)
@_handle_errors
def cmd_score(run_dir, config_path, metrics_csv, offline):
    """Score the records of a round-trip run with the requested metrics."""
    config = load_run_config(config_path)
    metrics = (
        [m.strip() for m in metrics_csv.split(",") if m.strip()]
        if metrics_csv
        else config.metrics
    )
    unknown = [m for m in metrics if m not in METRIC_IDS]
    if unknown:
        raise ConfigError(
            f"unknown metrics {unknown}; valid metrics: {', '.join(METRIC_IDS)}"
        )
    root = Path(run_dir)
    systems = _discover_systems(root)
    resources = _resources_for(config, offline)

    header = ["system"] + metrics
    table_lines = ["\t".join(header)]
    for system_id in systems:
        system_dir = _system_dir(root, system_id)
        records = pipeline.read_records(system_dir)
        cells = [system_id]
        for metric_id in metrics:
            score_set = score_metric(metric_id, records, resources)
            pipeline.write_score_set(score_set, system_dir)
            cells.append(f"{score_set.system_score:.4f}")
        table_lines.append("\t".join(cells))
    summary = "\n".join(table_lines) + "\n"
    (root / "scores_summary.tsv").write_text(summary, encoding="utf-8")
    click.echo(summary, nl=False)


@main.command("evaluate")
@click.option("--run-dir", "run_dirs", required=True, multiple=True, type=click.Path())
@click.option("--da", "da_path", default=None, type=click.Path(),
              help="CSV of per-system averaged standardized human scores.")
@click.option("--win-ratios", "win_path", default=None, type=click.Path(),
              help="CSV of per-system win ratios (WMT12-style judgments).")
@click.option("--darr", "darr_path", default=None, type=click.Path(),
              help="Relative-ranking pairs: 'segment better worse' rows.")
@click.option("--min-top-n", default=4, show_default=True)
@click.option("--out", "out_dir", default=None, type=click.Path())
@_handle_errors
def cmd_evaluate(run_dirs, da_path, win_path, darr_path, min_top_n, out_dir):
    """Meta-evaluate scored runs against human judgments."""
    if da_path is None and win_path is None:
        raise ConfigError("provide --da or --win-ratios")
    score_sets: dict[str, dict[str, pipeline.MetricScoreSet]] = {}
    pairs_seen: set[tuple[str, str]] = set()
    for run_dir in run_dirs:
        root = Path(run_dir)
        if not root.exists():
            raise ConfigError(f"run directory not found: {root}")
        for system_id in _discover_systems(root):
            system_dir = _system_dir(root, system_id)
            manifest_path = system_dir / "manifest.json"
            if manifest_path.exists():
                manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
                pairs_seen.add(tuple(manifest["pair"]))
            per_metric = {}
            for score_path in sorted(system_dir.glob("scores.*.jsonl")):
                metric_id = score_path.name[len("scores.") : -len(".jsonl")]
                per_metric[metric_id] = pipeline.read_score_set(system_dir, metric_id)
            if not per_metric:
                raise MissingResourceError(f"no score files in {system_dir}")
            if system_id in score_sets:
                raise ConfigError(f"system {system_id!r} appears in multiple run dirs")
            score_sets[system_id] = per_metric
    if len(pairs_seen) > 1:
        raise ConfigError(
            f"run directories mix language pairs {sorted(pairs_seen)}; "
            f"evaluate one pair at a time and combine with 'summarize'"
        )
    pair = next(iter(pairs_seen)) if pairs_seen else None

    if da_path is not None:
        judgments = load_human_judgments(da_path, darr_path=darr_path)
    else:
        ratios = load_win_ratios(win_path)
        pairs = (
            load_darr_pairs(darr_path, known_systems=ratios)
            if darr_path is not None
            else ()
        )
        judgments = HumanJudgmentSet({}, pairs, ratios)
    report = reports.evaluate_systems(
        score_sets, judgments, min_top_n=min_top_n, pair=pair
    )

    out = Path(out_dir) if out_dir is not None else Path(run_dirs[0]) / "reports"
    out.mkdir(parents=True, exist_ok=True)
    reports.write_report_tsv(report, out / "report.tsv")
    reports.write_report_json(report, out / "report.json")
    reports.write_topn_csvs(report, out)
    click.echo("\n".join(reports.report_tsv_lines(report)))
    click.echo(f"reports written to {out}")


@main.command("summarize")
@click.option("--report", "report_paths", required=True, multiple=True,
              type=click.Path(), help="Per-pair report.json files to combine.")
@click.option("--out", "out_dir", required=True, type=click.Path())
@_handle_errors
def cmd_summarize(report_paths, out_dir):
    """Combine per-pair JSON reports into metric-by-pair summary tables."""
    payloads = []
    for report_path in report_paths:
        path = Path(report_path)
        if not path.exists():
            raise ConfigError(f"report not found: {path}")
        payload = json.loads(path.read_text(encoding="utf-8"))
        if "metrics" not in payload:
            raise ConfigError(f"{path} is not an evaluation report")
        payloads.append(payload)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = reports.write_pair_summary(payloads, out)
    for lines in reports.summarize_pair_reports(payloads).values():
        click.echo("\n".join(lines))
        click.echo("")
    click.echo(f"summary tables written to {', '.join(str(p) for p in written)}")


@main.command("paraphrase")
@click.option("--paws", "paws_path", required=True, type=click.Path())
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--metrics", "metrics_csv",
              default="rtt-sentbleu,rtt-chrf,rtt-sbert,rtt-bertscore", show_default=True)
@click.option("--lang", default="en", show_default=True)
@click.option("--offline", is_flag=True)
@click.option("--out", "out_dir", default=None, type=click.Path())
@_handle_errors
def cmd_paraphrase(paws_path, config_path, metrics_csv, lang, offline, out_dir):
    """Score paraphrase pairs with each metric and report AUC of PR curves."""
    config = load_run_config(config_path)
    metrics = [m.strip() for m in metrics_csv.split(",") if m.strip()]
    unknown = [m for m in metrics if m not in METRIC_IDS]
    if unknown:
        raise ConfigError(
            f"unknown metrics {unknown}; valid metrics: {', '.join(METRIC_IDS)}"
        )
    not_segment_level = [m for m in metrics if m not in SEGMENT_LEVEL_METRICS]
    if not_segment_level:
        raise ConfigError(
            f"{not_segment_level} have no per-pair scores; "
            f"choose from {', '.join(SEGMENT_LEVEL_METRICS)}"
        )
    if not Path(paws_path).exists():
        raise ConfigError(f"paraphrase file not found: {paws_path}")
    pairs = load_paws(paws_path)
    labels = [pair.label for pair in pairs]
    if sum(labels) == 0:
        raise ConfigError("paraphrase file has no positive labels")

    records = [
        RoundTripRecord(
            pair.id,
            RawSegment(pair.id, pair.sentence1, lang),
            RawSegment(pair.id, pair.sentence2, lang),
            RawSegment(pair.id, pair.sentence2, lang),
            "paraphrase",
        )
        for pair in pairs
    ]
    resources = _resources_for(config, offline)

    out = Path(out_dir) if out_dir is not None else Path("paraphrase_reports")
    out.mkdir(parents=True, exist_ok=True)

    if "rtt-bertscore" in metrics:
        if config.token_embedding_cfg is None:
            raise MissingResourceError("no token embedding provider configured")
        client = EmbeddingClient(
            config.token_embedding_cfg, cache=resources.cache, offline=offline
        )
        input_embs = client.fetch_token_embeddings([pair.sentence1 for pair in pairs])
        resources.idf_table = build_idf_table([emb.wordpieces for emb in input_embs])
        reports.write_idf_dump(resources.idf_table.weights, out / "idf.tsv")

    aucs = {}
    curves = {}
    for metric_id in metrics:
        score_set = score_metric(metric_id, records, resources)
        curve = pr_auc(list(score_set.segment_scores), labels)
        aucs[metric_id] = curve.auc
        curves[metric_id] = curve
    reports.write_auc_report(aucs, out, curves)
    for metric_id in sorted(aucs):
        click.echo(f"{metric_id}\t{aucs[metric_id]:.4f}")
    click.echo(f"paraphrase reports written to {out}")


if __name__ == "__main__":
    main()
