"""Fixture dumping: embed a text file into the offline JSONL format.

One record per input line: ``{"text", "sentence_vector", "wordpieces",
"token_vectors"}``, preceded by a header line recording the models and the
token layer.  Offline consumers key records by exact text and skip the
header.  Re-running a dump with the same encoder yields identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path


def dump_fixtures(texts_path: str | Path, out_path: str | Path, encoder,
                  header: dict | None = None) -> int:
    """Embed every line of texts_path; returns the number of records written."""
    lines = Path(texts_path).read_text(encoding="utf-8").splitlines()
    texts = [line for line in lines if line.strip()]
    out_path = Path(out_path)
    with open(out_path, "w", encoding="utf-8") as handle:
        meta = {"format_version": 1}
        if header:
            meta.update(header)
        handle.write(json.dumps(meta, sort_keys=True) + "\n")
        if not texts:
            return 0
        sentence_vectors = encoder.encode_sentences(texts)
        token_records = encoder.encode_tokens(texts)
        for text, vector, (pieces, matrix) in zip(texts, sentence_vectors, token_records):
            record = {
                "text": text,
                "sentence_vector": vector,
                "wordpieces": pieces,
                "token_vectors": matrix,
            }
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    return len(texts)
