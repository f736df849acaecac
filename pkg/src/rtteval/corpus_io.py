"""Ingestion and persistence of evaluation data.

Test sources and system outputs are plain-text, one segment per line.
Human judgments arrive as a CSV of per-system averaged scores and a
whitespace-separated file of relative-ranking pairs.  Paraphrase pairs are
a TSV with a header.  All loaders validate alignment and referential
integrity up front so downstream modules can assume consistency.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .errors import AlignmentError, ParseError
from .textnorm import RawSegment


@dataclass(frozen=True)
class TestSet:
    pair: tuple[str, str]
    sources: tuple[RawSegment, ...]
    references: tuple[RawSegment, ...] | None = None

    def __post_init__(self):
        if self.references is not None and len(self.references) != len(self.sources):
            raise AlignmentError(
                f"references ({len(self.references)}) do not align with "
                f"sources ({len(self.sources)})"
            )


@dataclass(frozen=True)
class SystemSubmission:
    system_id: str
    pair: tuple[str, str]
    outputs: tuple[RawSegment, ...]


@dataclass(frozen=True)
class DarrPair:
    segment_id: str
    better: str
    worse: str

    def __post_init__(self):
        if self.better == self.worse:
            raise ParseError(f"degenerate ranking pair: {self.better} vs itself")


@dataclass(frozen=True)
class HumanJudgmentSet:
    da_system_scores: Mapping[str, float]
    darr_pairs: tuple[DarrPair, ...]
    win_ratios: Mapping[str, float] | None = None


@dataclass(frozen=True)
class ParaphrasePair:
    id: str
    sentence1: str
    sentence2: str
    label: int

    def __post_init__(self):
        if self.label not in (0, 1):
            raise ParseError(f"paraphrase label must be 0 or 1, got {self.label!r}")


def _read_lines(path: str | Path) -> list[str]:
    """UTF-8 lines, LF endings with CR tolerance, trailing newline dropped."""
    text = Path(path).read_text(encoding="utf-8")
    if text.endswith("\n"):
        text = text[:-1]
    if text == "":
        return []
    return [line.rstrip("\r") for line in text.split("\n")]


def load_testset(
    path: str | Path,
    pair: tuple[str, str],
    references_path: str | Path | None = None,
) -> TestSet:
    """Load one-segment-per-line sources (and optional aligned references)."""
    lines = _read_lines(path)
    if not lines:
        raise ParseError(f"empty test set: {path}")
    src_lang, tgt_lang = pair
    sources = tuple(
        RawSegment(str(i + 1), line, src_lang) for i, line in enumerate(lines)
    )
    references = None
    if references_path is not None:
        ref_lines = _read_lines(references_path)
        if len(ref_lines) != len(lines):
            raise AlignmentError(
                f"line count mismatch: {path} has {len(lines)} segments, "
                f"{references_path} has {len(ref_lines)}"
            )
        references = tuple(
            RawSegment(str(i + 1), line, tgt_lang) for i, line in enumerate(ref_lines)
        )
    return TestSet((src_lang, tgt_lang), sources, references)


def load_system_outputs(
    path: str | Path, testset: TestSet, system_id: str | None = None
) -> SystemSubmission:
    """Load a system's outputs, validated 1:1 against the test set sources."""
    lines = _read_lines(path)
    if not lines:
        raise ParseError(f"empty submission: {path}")
    if len(lines) != len(testset.sources):
        raise AlignmentError(
            f"line count mismatch: submission {path} has {len(lines)} segments, "
            f"test set has {len(testset.sources)}"
        )
    if system_id is None:
        system_id = Path(path).stem
    tgt_lang = testset.pair[1]
    outputs = tuple(
        RawSegment(src.id, line, tgt_lang) for src, line in zip(testset.sources, lines)
    )
    return SystemSubmission(system_id, testset.pair, outputs)


def dump_segments(segments: Iterable[RawSegment], path: str | Path) -> None:
    """Serialize segments one per line (inverse of the loaders, modulo trailing newline)."""
    Path(path).write_text(
        "".join(seg.text + "\n" for seg in segments), encoding="utf-8"
    )


def load_da_scores(path: str | Path) -> dict[str, float]:
    """CSV of ``system_id,score`` rows: per-system averaged standardized scores."""
    scores: dict[str, float] = {}
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ParseError(f"{path}:{lineno}: expected 'system,score', got {line!r}")
        system_id = parts[0].strip()
        try:
            score = float(parts[1])
        except ValueError:
            raise ParseError(f"{path}:{lineno}: malformed score {parts[1]!r}") from None
        if system_id in scores:
            raise ParseError(f"{path}:{lineno}: duplicate system {system_id!r}")
        scores[system_id] = score
    if not scores:
        raise ParseError(f"no judgment rows in {path}")
    return scores


def load_darr_pairs(
    path: str | Path, known_systems: Iterable[str] | None = None
) -> tuple[DarrPair, ...]:
    """Whitespace-separated rows ``segment_id better_system worse_system``."""
    known = set(known_systems) if known_systems is not None else None
    pairs = []
    for lineno, line in enumerate(_read_lines(path), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(
                f"{path}:{lineno}: expected 'segment better worse', got {line!r}"
            )
        segment_id, better, worse = parts
        if known is not None:
            for system in (better, worse):
                if system not in known:
                    raise ParseError(f"{path}:{lineno}: unknown system {system!r}")
        try:
            pairs.append(DarrPair(segment_id, better, worse))
        except ParseError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
    return tuple(pairs)


def load_win_ratios(path: str | Path) -> dict[str, float]:
    """CSV of ``system_id,ratio`` rows with ratios in [0, 1]."""
    ratios = load_da_scores(path)
    for system, ratio in ratios.items():
        if not 0.0 <= ratio <= 1.0:
            raise ParseError(f"win ratio for {system!r} outside [0, 1]: {ratio}")
    return ratios


def load_human_judgments(
    da_path: str | Path,
    darr_path: str | Path | None = None,
    win_ratio_path: str | Path | None = None,
    known_systems: Iterable[str] | None = None,
) -> HumanJudgmentSet:
    da_scores = load_da_scores(da_path)
    if known_systems is not None:
        unknown = sorted(set(da_scores) - set(known_systems))
        if unknown:
            raise ParseError(f"{da_path}: systems absent from submissions: {unknown}")
    pair_systems = known_systems if known_systems is not None else da_scores
    darr = (
        load_darr_pairs(darr_path, known_systems=pair_systems)
        if darr_path is not None
        else ()
    )
    win_ratios = load_win_ratios(win_ratio_path) if win_ratio_path is not None else None
    return HumanJudgmentSet(da_scores, darr, win_ratios)


def build_darr_pairs(
    raw_scores: Mapping[tuple[str, str], float], threshold: float = 25.0
) -> tuple[DarrPair, ...]:
    """Derive relative-ranking pairs from raw 0-100 scores.

    External convention, provided for convenience: a pair is emitted when one
    system's raw score beats another's by at least ``threshold`` points on
    the same segment.
    """
    by_segment: dict[str, list[tuple[str, float]]] = {}
    for (segment_id, system_id), score in raw_scores.items():
        by_segment.setdefault(segment_id, []).append((system_id, score))
    pairs = []
    for segment_id in sorted(by_segment):
        entries = sorted(by_segment[segment_id])
        for sys_a, score_a in entries:
            for sys_b, score_b in entries:
                if sys_a != sys_b and score_a - score_b >= threshold:
                    pairs.append(DarrPair(segment_id, sys_a, sys_b))
    return tuple(pairs)


_PAWS_COLUMNS = ("id", "sentence1", "sentence2", "label")


def load_paws(path: str | Path) -> list[ParaphrasePair]:
    """TSV with header ``id sentence1 sentence2 label``; labels must be 0/1."""
    lines = _read_lines(path)
    if not lines:
        raise ParseError(f"empty paraphrase file: {path}")
    header = lines[0].split("\t")
    for column in _PAWS_COLUMNS:
        if column not in header:
            raise ParseError(f"{path}: missing column {column!r} in header")
    index = {column: header.index(column) for column in _PAWS_COLUMNS}
    pairs = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != len(header):
            raise ParseError(
                f"{path}:{lineno}: expected {len(header)} fields, got {len(fields)}"
            )
        label_text = fields[index["label"]]
        if label_text not in ("0", "1"):
            raise ParseError(f"{path}:{lineno}: label must be 0 or 1, got {label_text!r}")
        pairs.append(
            ParaphrasePair(
                fields[index["id"]],
                fields[index["sentence1"]],
                fields[index["sentence2"]],
                int(label_text),
            )
        )
    if not pairs:
        raise ParseError(f"no paraphrase rows in {path}")
    return pairs
