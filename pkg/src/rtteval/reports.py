"""Evaluation report assembly and serialization.

Builds the meta-evaluation tables (Pearson per metric, tau against ranking
pairs, score variance, top-N curves) from scored runs and writes them as a
TSV mirroring the usual table shapes, a JSON report with full pairing
detail, and one CSV per top-N curve.  All emitted files are byte-stable:
no timestamps, no absolute paths, floats printed to 4 decimal places in
the human-readable tables and at full precision in JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from . import metaeval
from .corpus_io import HumanJudgmentSet
from .errors import ConfigError
from .pipeline import MetricScoreSet

FORMAT_VERSION = 1


@dataclass
class MetricEvaluation:
    metric_id: str
    pearson: metaeval.CorrelationReport | None = None
    pearson_note: str | None = None
    tau: metaeval.TauReport | None = None
    tau_note: str | None = None
    variance: float | None = None  # on the 0-1 scale
    topn: list[tuple[int, float]] | None = None


@dataclass
class EvaluationReport:
    n_systems: int
    metrics: list[MetricEvaluation]
    da_variance: float | None
    human_scores: dict[str, float]
    pair: tuple[str, str] | None = None


def _human_scores(judgments: HumanJudgmentSet) -> dict[str, float]:
    if judgments.da_system_scores:
        return dict(judgments.da_system_scores)
    if judgments.win_ratios:
        return dict(judgments.win_ratios)
    raise ConfigError("judgment set carries neither DA scores nor win ratios")


def evaluate_systems(
    score_sets: Mapping[str, Mapping[str, MetricScoreSet]],
    judgments: HumanJudgmentSet,
    min_top_n: int = 4,
    pair: tuple[str, str] | None = None,
) -> EvaluationReport:
    """Meta-evaluate scored systems against human judgments."""
    systems = sorted(score_sets)
    if not systems:
        raise ConfigError("no scored systems to evaluate")
    human = _human_scores(judgments)
    missing = [s for s in systems if s not in human]
    if missing:
        raise ConfigError(f"systems without human judgments: {missing}")

    metric_ids = sorted({m for per_system in score_sets.values() for m in per_system})
    evaluations = []
    for metric_id in metric_ids:
        evaluation = MetricEvaluation(metric_id)
        with_metric = [s for s in systems if metric_id in score_sets[s]]
        system_scores = {
            s: score_sets[s][metric_id].system_score for s in with_metric
        }
        human_subset = {s: human[s] for s in with_metric}

        if len(with_metric) < 2:
            evaluation.pearson_note = "undefined (n<2)"
        else:
            try:
                evaluation.pearson = metaeval.pearson(
                    [system_scores[s] for s in with_metric],
                    [human_subset[s] for s in with_metric],
                    labels=with_metric,
                )
            except ValueError:
                evaluation.pearson_note = "undefined (constant)"
            if len(with_metric) >= min_top_n and evaluation.pearson is not None:
                try:
                    evaluation.topn = metaeval.topn_curve(
                        system_scores, human_subset, min_n=min_top_n
                    )
                except ValueError:
                    evaluation.topn = None

        segment_scores = {}
        pooled = []
        for system in with_metric:
            score_set = score_sets[system][metric_id]
            for segment_id, score in zip(score_set.segment_ids, score_set.segment_scores):
                segment_scores[(system, segment_id)] = score
                pooled.append(score / 100.0)
        if len(pooled) >= 2:
            evaluation.variance = metaeval.score_variance(pooled)

        if not segment_scores:
            evaluation.tau_note = "n/a (corpus-level metric)"
        elif not judgments.darr_pairs:
            evaluation.tau_note = "n/a (no ranking pairs)"
        else:
            scorable = [
                p
                for p in judgments.darr_pairs
                if (p.better, p.segment_id) in segment_scores
                and (p.worse, p.segment_id) in segment_scores
            ]
            if not scorable:
                evaluation.tau_note = "n/a (no scorable pairs)"
            else:
                evaluation.tau = metaeval.kendall_tau_darr(segment_scores, scorable)
        evaluations.append(evaluation)

    da_variance = None
    if len(human) >= 2:
        da_variance = metaeval.da_variance_analysis(
            HumanJudgmentSet(human, judgments.darr_pairs, judgments.win_ratios)
        )
    return EvaluationReport(len(systems), evaluations, da_variance, human, pair)


def _fmt(value: float | None, note: str | None = None) -> str:
    if value is None:
        return note or "n/a"
    return f"{value:.4f}"


def report_tsv_lines(report: EvaluationReport) -> list[str]:
    lines = ["metric\tpearson_r\tn_systems\tkendall_tau\tconcordant\tdiscordant\tvariance_x1e4"]
    for ev in report.metrics:
        pearson_cell = (
            _fmt(ev.pearson.r) if ev.pearson is not None else (ev.pearson_note or "n/a")
        )
        n_cell = str(ev.pearson.n) if ev.pearson is not None else str(report.n_systems)
        if ev.tau is not None:
            tau_cell, conc, disc = _fmt(ev.tau.tau), str(ev.tau.concordant), str(ev.tau.discordant)
        else:
            tau_cell, conc, disc = ev.tau_note or "n/a", "-", "-"
        variance_cell = _fmt(ev.variance * 1e4) if ev.variance is not None else "n/a"
        lines.append(
            "\t".join([ev.metric_id, pearson_cell, n_cell, tau_cell, conc, disc, variance_cell])
        )
    lines.append(f"da_variance\t{_fmt(report.da_variance)}")
    return lines


def write_report_tsv(report: EvaluationReport, path: str | Path) -> Path:
    path = Path(path)
    path.write_text("\n".join(report_tsv_lines(report)) + "\n", encoding="utf-8")
    return path


def write_report_json(report: EvaluationReport, path: str | Path) -> Path:
    payload = {
        "format_version": FORMAT_VERSION,
        "pair": list(report.pair) if report.pair is not None else None,
        "n_systems": report.n_systems,
        "da_variance": report.da_variance,
        "human_scores": report.human_scores,
        "metrics": {},
    }
    for ev in report.metrics:
        entry: dict = {}
        if ev.pearson is not None:
            entry["pearson"] = {
                "r": ev.pearson.r,
                "n": ev.pearson.n,
                "pairing": [list(triple) for triple in ev.pearson.pairing],
            }
        else:
            entry["pearson"] = {"note": ev.pearson_note or "n/a"}
        if ev.tau is not None:
            entry["tau"] = {
                "tau": ev.tau.tau,
                "concordant": ev.tau.concordant,
                "discordant": ev.tau.discordant,
            }
        else:
            entry["tau"] = {"note": ev.tau_note or "n/a"}
        entry["variance_0_1"] = ev.variance
        entry["topn"] = [[n, r] for n, r in ev.topn] if ev.topn is not None else None
        payload["metrics"][ev.metric_id] = entry
    path = Path(path)
    path.write_text(
        json.dumps(payload, sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    return path


def write_topn_csvs(report: EvaluationReport, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    paths = []
    for ev in report.metrics:
        if ev.topn is None:
            continue
        path = out_dir / f"topn.{ev.metric_id}.csv"
        lines = ["n,r"] + [f"{n},{r:.4f}" for n, r in ev.topn]
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths.append(path)
    return paths


def write_auc_report(
    aucs: Mapping[str, float], out_dir: str | Path, curves: Mapping[str, metaeval.PRCurve]
) -> Path:
    """Paraphrase-detection outputs: AUC table plus one PR-curve CSV per metric."""
    out_dir = Path(out_dir)
    lines = ["metric\tauc_pr"]
    for metric_id in sorted(aucs):
        lines.append(f"{metric_id}\t{aucs[metric_id]:.4f}")
    path = out_dir / "auc.tsv"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    for metric_id, curve in sorted(curves.items()):
        curve_lines = ["recall,precision"] + [
            f"{recall:.4f},{precision:.4f}" for recall, precision in curve.points
        ]
        (out_dir / f"pr.{metric_id}.csv").write_text(
            "\n".join(curve_lines) + "\n", encoding="utf-8"
        )
    return path


def _pair_label(pair) -> str:
    if not pair:
        return "unknown"
    return f"{pair[0]}-{pair[1]}"


def summarize_pair_reports(payloads: list[dict]) -> dict[str, list[str]]:
    """Cross-pair summary matrices from per-pair JSON report payloads.

    Returns {"pearson": lines, "tau": lines}: rows are metrics, one column
    per language pair, cells formatted to 4 decimals (or the undefined
    note).  Duplicate pairs are rejected.
    """
    seen_pairs = []
    for payload in payloads:
        label = _pair_label(payload.get("pair"))
        if label in seen_pairs:
            raise ConfigError(f"duplicate report for language pair {label}")
        seen_pairs.append(label)

    metric_ids = sorted({m for payload in payloads for m in payload["metrics"]})
    tables = {}
    for statistic in ("pearson", "tau"):
        key = "r" if statistic == "pearson" else "tau"
        lines = ["metric\t" + "\t".join(seen_pairs)]
        for metric_id in metric_ids:
            cells = []
            for payload in payloads:
                entry = payload["metrics"].get(metric_id)
                if entry is None:
                    cells.append("-")
                    continue
                value = entry[statistic].get(key)
                cells.append(
                    f"{value:.4f}" if value is not None else entry[statistic].get("note", "n/a")
                )
            lines.append(metric_id + "\t" + "\t".join(cells))
        tables[statistic] = lines
    return tables


def write_pair_summary(payloads: list[dict], out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    tables = summarize_pair_reports(payloads)
    paths = []
    for statistic, lines in tables.items():
        path = out_dir / f"{statistic}_by_pair.tsv"
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        paths.append(path)
    return paths


def write_idf_dump(idf_weights: Mapping[str, float], path: str | Path) -> Path:
    lines = ["wordpiece\tidf"]
    for piece in sorted(idf_weights):
        lines.append(f"{piece}\t{idf_weights[piece]:.4f}")
    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
