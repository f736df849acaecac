"""Semantic similarity metrics over provider-supplied embeddings.

Sentence-level similarity is the cosine of two sentence vectors.  The
wordpiece-level metric is an idf-weighted greedy-match F-score: each
wordpiece is credited with its best cosine match on the other side,
weighted by inverse document frequency so ubiquitous pieces contribute
little.  The idf table is built once per evaluation run over that run's
input sentences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np


@dataclass(frozen=True, eq=False)
class SentenceEmbedding:
    vector: np.ndarray
    provider_id: str = ""

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float64)
        if vec.ndim != 1 or vec.size == 0:
            raise ValueError("sentence embedding must be a non-empty 1-D vector")
        if not np.all(np.isfinite(vec)):
            raise ValueError("sentence embedding contains non-finite entries")
        object.__setattr__(self, "vector", vec)

    @property
    def dim(self) -> int:
        return int(self.vector.shape[0])


@dataclass(frozen=True, eq=False)
class TokenEmbeddings:
    wordpieces: tuple
    matrix: np.ndarray

    def __post_init__(self):
        pieces = tuple(self.wordpieces)
        mat = np.asarray(self.matrix, dtype=np.float64)
        if mat.ndim != 2:
            raise ValueError("token embedding matrix must be 2-D")
        if len(pieces) != mat.shape[0]:
            raise ValueError(
                f"wordpiece/vector count mismatch: {len(pieces)} pieces, {mat.shape[0]} rows"
            )
        if len(pieces) == 0:
            raise ValueError("token embeddings must cover at least one wordpiece")
        if not np.all(np.isfinite(mat)):
            raise ValueError("token embedding matrix contains non-finite entries")
        object.__setattr__(self, "wordpieces", pieces)
        object.__setattr__(self, "matrix", mat)


@dataclass(frozen=True)
class IdfTable:
    """Wordpiece -> idf weight over L input sentences; unseen pieces get default_weight."""

    weights: Mapping[str, float]
    corpus_size: int
    default_weight: float

    def weight(self, piece: str) -> float:
        return self.weights.get(piece, self.default_weight)


def build_idf_table(inputs: Sequence[Iterable[str]]) -> IdfTable:
    """Document-frequency idf: weight(t) = -log(df(t) / L).

    A piece present in every input sentence weighs exactly 0; unseen pieces
    default to log L (the weight of the rarest observable piece).
    """
    corpus_size = len(inputs)
    if corpus_size < 1:
        raise ValueError("idf table requires at least one input sentence")
    doc_freq: dict[str, int] = {}
    for sentence in inputs:
        for piece in set(sentence):
            doc_freq[piece] = doc_freq.get(piece, 0) + 1
    weights = {piece: -math.log(df / corpus_size) for piece, df in doc_freq.items()}
    return IdfTable(weights, corpus_size, math.log(corpus_size))


def cosine_similarity(a: SentenceEmbedding, b: SentenceEmbedding) -> float:
    """Cosine of two sentence vectors, clamped to [-1, 1]."""
    if a.dim != b.dim:
        raise ValueError(f"dimensionality mismatch: {a.dim} vs {b.dim}")
    norm_a = float(np.linalg.norm(a.vector))
    norm_b = float(np.linalg.norm(b.vector))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ValueError("cosine undefined for zero-norm vector")
    value = float(np.dot(a.vector, b.vector) / (norm_a * norm_b))
    return max(-1.0, min(1.0, value))


def _unit_rows(mat: np.ndarray, side: str) -> np.ndarray:
    norms = np.linalg.norm(mat, axis=1, keepdims=True)
    if np.any(norms == 0.0):
        raise ValueError(f"zero-norm wordpiece vector on {side} side")
    return mat / norms


def greedy_match_fscore(
    x_emb: TokenEmbeddings, xhat_emb: TokenEmbeddings, idf: IdfTable
) -> tuple[float, float, float]:
    """Greedy-match (precision, recall, F) over wordpiece cosines, idf weighted.

    Recall credits every input-side wordpiece with its best match among the
    round-trip wordpieces; precision is the symmetric direction, weighted by
    the same input-side idf table.
    """
    if x_emb.matrix.shape[1] != xhat_emb.matrix.shape[1]:
        raise ValueError("token embedding dimensionality mismatch")
    x_unit = _unit_rows(x_emb.matrix, "input")
    xhat_unit = _unit_rows(xhat_emb.matrix, "round-trip")
    sims = np.clip(x_unit @ xhat_unit.T, -1.0, 1.0)

    x_weights = np.array([idf.weight(p) for p in x_emb.wordpieces])
    xhat_weights = np.array([idf.weight(p) for p in xhat_emb.wordpieces])
    if x_weights.sum() == 0.0 or xhat_weights.sum() == 0.0:
        raise ValueError("degenerate idf corpus: total weight is zero on one side")

    recall = float((x_weights * sims.max(axis=1)).sum() / x_weights.sum())
    precision = float((xhat_weights * sims.max(axis=0)).sum() / xhat_weights.sum())
    if precision + recall == 0.0:
        return precision, recall, 0.0
    f_score = 2.0 * precision * recall / (precision + recall)
    return precision, recall, f_score
