"""Pluggable translation and embedding providers with persistent caching.

A provider is selected by its endpoint: ``http(s)://...`` talks to a service
over the fixed wire protocol, ``echo:`` returns its inputs (tests),
``table:<path>`` serves translations from a TSV lookup, and
``fixture:<path>`` serves embeddings from a JSON-lines fixture file.  Every
successful result is written to a content-addressed on-disk cache before it
is returned; cached entries are never re-requested, so a warm cache makes
every operation deterministic and offline-capable.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

import requests

from .errors import ConfigError, MissingResourceError, ProviderError
from .semantic import SentenceEmbedding, TokenEmbeddings


class ProviderKind(Enum):
    TRANSLATION = "translation"
    EMBEDDING = "embedding"


@dataclass(frozen=True)
class ProviderConfig:
    provider_id: str
    kind: ProviderKind
    endpoint: str
    auth_env: str = ""
    rate_limit: float = 2.0
    timeout: float = 30.0
    max_retries: int = 3
    batch_size: int = 32

    def __post_init__(self):
        if self.rate_limit <= 0:
            raise ConfigError("rate_limit must be > 0")
        if self.max_retries < 0:
            raise ConfigError("max_retries must be >= 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")

    @property
    def scheme(self) -> str:
        return self.endpoint.split(":", 1)[0] if ":" in self.endpoint else ""

    @property
    def locator(self) -> str:
        return self.endpoint.split(":", 1)[1] if ":" in self.endpoint else ""

    def public_view(self) -> dict:
        """Manifest-safe view: never includes credential material."""
        return {
            "provider_id": self.provider_id,
            "kind": self.kind.value,
            "endpoint": self.endpoint,
            "rate_limit": self.rate_limit,
            "timeout": self.timeout,
            "max_retries": self.max_retries,
            "batch_size": self.batch_size,
        }


def cache_key(*parts: str) -> str:
    """Stable digest over an ordered tuple of strings."""
    payload = json.dumps(list(parts), ensure_ascii=False)
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


class DiskCache:
    """One file per entry under a content-addressed tree, plus a metadata sidecar.

    Values round-trip byte-identically.  Writes are serialized and atomic
    (temp file + rename); reads need no locking.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self._write_lock = threading.Lock()

    def _value_path(self, key: str) -> Path:
        return self.root / key[:2] / key[2:4] / f"{key}.bin"

    def get(self, key: str) -> bytes | None:
        path = self._value_path(key)
        if not path.exists():
            return None
        return path.read_bytes()

    def put(self, key: str, value: bytes, provider_id: str) -> None:
        path = self._value_path(key)
        with self._write_lock:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_bytes(value)
            tmp.replace(path)
            meta = {
                "provider": provider_id,
                "created_at": datetime.now(timezone.utc).isoformat(),
            }
            meta_tmp = path.with_suffix(".meta.tmp")
            meta_tmp.write_text(json.dumps(meta, sort_keys=True), encoding="utf-8")
            meta_tmp.replace(path.with_suffix(".meta.json"))


@dataclass
class ClientStats:
    requests_issued: int = 0
    cache_hits: int = 0
    items_fetched: int = 0


class _HttpTransport:
    """POST with retry, exponential backoff, and request pacing."""

    def __init__(self, cfg: ProviderConfig, sleep=time.sleep, clock=time.monotonic):
        self.cfg = cfg
        self._sleep = sleep
        self._clock = clock
        self._last_request = None
        self._session = requests.Session()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.cfg.auth_env:
            token = os.environ.get(self.cfg.auth_env, "")
            if token:
                headers["Authorization"] = f"Bearer {token}"
        return headers

    def _pace(self) -> None:
        interval = 1.0 / self.cfg.rate_limit
        now = self._clock()
        if self._last_request is not None:
            wait = self._last_request + interval - now
            if wait > 0:
                self._sleep(wait)
        self._last_request = self._clock()

    def post(self, path: str, payload: dict) -> dict:
        url = self.cfg.endpoint.rstrip("/") + path
        attempts = self.cfg.max_retries + 1
        last_error = None
        for attempt in range(attempts):
            if attempt > 0:
                self._sleep(min(0.25 * (2 ** (attempt - 1)), 30.0))
            self._pace()
            try:
                response = self._session.post(
                    url, json=payload, headers=self._headers(), timeout=self.cfg.timeout
                )
            except requests.RequestException as exc:
                last_error = f"transport failure: {exc}"
                continue
            if response.status_code == 200:
                try:
                    body = response.json()
                except ValueError:
                    raise ProviderError(
                        f"{self.cfg.provider_id}: non-JSON response from {url}"
                    ) from None
                if not isinstance(body, dict):
                    raise ProviderError(
                        f"{self.cfg.provider_id}: malformed response from {url} "
                        f"(expected a JSON object)"
                    )
                return body
            if response.status_code == 429 or response.status_code >= 500:
                last_error = f"HTTP {response.status_code}"
                continue
            raise ProviderError(
                f"{self.cfg.provider_id}: HTTP {response.status_code} from {url}"
            )
        raise ProviderError(
            f"{self.cfg.provider_id}: giving up on {url} after {attempts} attempts "
            f"({last_error})"
        )


def _load_table(path: str | Path) -> dict[str, str]:
    if not Path(path).exists():
        raise ConfigError(f"translation table not found: {path}")
    table = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ConfigError(f"{path}:{lineno}: translation table rows are 'source<TAB>target'")
        table[parts[0]] = parts[1]
    return table


class TranslationClient:
    """Backward-translation client over one configured provider."""

    def __init__(self, cfg: ProviderConfig, cache: DiskCache | None = None,
                 offline: bool = False, sleep=time.sleep):
        if cfg.kind is not ProviderKind.TRANSLATION:
            raise ConfigError(f"{cfg.provider_id} is not a translation provider")
        self.cfg = cfg
        self.cache = cache
        self.offline = offline
        self.stats = ClientStats()
        self._table = None
        if cfg.scheme == "table":
            self._table = _load_table(cfg.locator)
        elif cfg.scheme in ("http", "https"):
            self._transport = _HttpTransport(cfg, sleep=sleep)
        elif cfg.scheme != "echo":
            raise ConfigError(f"unsupported translation endpoint: {cfg.endpoint}")

    def _key(self, src: str, tgt: str, text: str) -> str:
        return cache_key(self.cfg.provider_id, src, tgt, text)

    def _fetch(self, texts: list[str], indices: list[int], src: str, tgt: str) -> list[str]:
        scheme = self.cfg.scheme
        if scheme == "echo":
            return list(texts)
        if scheme == "table":
            missing = [i for i, t in zip(indices, texts) if t not in self._table]
            if missing:
                raise ProviderError(
                    f"{self.cfg.provider_id}: no table entry for items {missing}",
                    failed_indices=missing,
                )
            return [self._table[t] for t in texts]
        if self.offline:
            raise ConfigError(
                f"offline mode: cache miss would require a network request to "
                f"{self.cfg.endpoint} for items {indices}"
            )
        try:
            body = self._transport.post("/translate", {"texts": texts, "src": src, "tgt": tgt})
        except ProviderError as exc:
            raise ProviderError(f"{exc} (items {indices})", failed_indices=indices) from None
        self.stats.requests_issued += 1
        translations = body.get("translations")
        if not isinstance(translations, list) or len(translations) != len(texts):
            raise ProviderError(
                f"{self.cfg.provider_id}: malformed response (misaligned translations)",
                failed_indices=indices,
            )
        return [str(t) for t in translations]

    def translate_batch(self, texts: list[str], src: str, tgt: str) -> list[str]:
        if not texts:
            raise ConfigError("translate_batch: empty input")
        results: dict[int, str] = {}
        misses: list[int] = []
        for i, text in enumerate(texts):
            cached = self.cache.get(self._key(src, tgt, text)) if self.cache else None
            if cached is not None:
                results[i] = cached.decode("utf-8")
                self.stats.cache_hits += 1
            else:
                misses.append(i)
        for start in range(0, len(misses), self.cfg.batch_size):
            chunk = misses[start : start + self.cfg.batch_size]
            fetched = self._fetch([texts[i] for i in chunk], chunk, src, tgt)
            for i, translation in zip(chunk, fetched):
                if self.cache is not None:
                    self.cache.put(
                        self._key(src, tgt, texts[i]),
                        translation.encode("utf-8"),
                        self.cfg.provider_id,
                    )
                results[i] = translation
            self.stats.items_fetched += len(chunk)
        return [results[i] for i in range(len(texts))]


def _canonical_record_bytes(record: dict) -> bytes:
    return json.dumps(record, sort_keys=True, ensure_ascii=False).encode("utf-8")


def _validate_fixture_record(record: dict, path, lineno: int) -> None:
    if "wordpieces" in record or "token_vectors" in record:
        pieces = record.get("wordpieces") or []
        vectors = record.get("token_vectors") or []
        if len(pieces) != len(vectors):
            raise ConfigError(
                f"{path}:{lineno}: {len(pieces)} wordpieces but {len(vectors)} token vectors"
            )
        dims = {len(v) for v in vectors}
        if len(dims) > 1:
            raise ConfigError(f"{path}:{lineno}: ragged token vectors {sorted(dims)}")


class _FixtureStore:
    """JSON-lines embedding fixtures keyed by exact text."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        if not self.path.exists():
            raise MissingResourceError(f"embedding fixture not found: {self.path}")
        self.records: dict[str, dict] = {}
        sentence_dims = set()
        with open(self.path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                if not line.strip():
                    continue
                record = json.loads(line)
                if "text" not in record:
                    continue  # header/metadata line
                _validate_fixture_record(record, self.path, lineno)
                if "sentence_vector" in record:
                    sentence_dims.add(len(record["sentence_vector"]))
                self.records[record["text"]] = record
        if len(sentence_dims) > 1:
            raise ConfigError(
                f"{self.path}: inconsistent sentence vector dims {sorted(sentence_dims)}"
            )

    def lookup(self, text: str) -> dict:
        if text not in self.records:
            raise MissingResourceError(f"{self.path}: missing embedding for text: {text!r}")
        return self.records[text]


class EmbeddingClient:
    """Sentence- and wordpiece-level embedding client over one provider."""

    def __init__(self, cfg: ProviderConfig, cache: DiskCache | None = None,
                 offline: bool = False, sleep=time.sleep):
        if cfg.kind is not ProviderKind.EMBEDDING:
            raise ConfigError(f"{cfg.provider_id} is not an embedding provider")
        self.cfg = cfg
        self.cache = cache
        self.offline = offline
        self.stats = ClientStats()
        self._fixture = None
        if cfg.scheme == "fixture":
            self._fixture = _FixtureStore(cfg.locator)
        elif cfg.scheme in ("http", "https"):
            self._transport = _HttpTransport(cfg, sleep=sleep)
        else:
            raise ConfigError(f"unsupported embedding endpoint: {cfg.endpoint}")

    def _key(self, level: str, text: str) -> str:
        return cache_key(self.cfg.provider_id, level, text)

    def _fetch_records(self, texts: list[str], indices: list[int], level: str) -> list[dict]:
        if self._fixture is not None:
            records = [self._fixture.lookup(t) for t in texts]
            for record in records:
                if level == "sentence" and "sentence_vector" not in record:
                    raise MissingResourceError(
                        f"{self._fixture.path}: no sentence vector for {record['text']!r}"
                    )
                if level == "token" and "wordpieces" not in record:
                    raise MissingResourceError(
                        f"{self._fixture.path}: no token vectors for {record['text']!r}"
                    )
            return records
        if self.offline:
            raise ConfigError(
                f"offline mode: cache miss would require a network request to "
                f"{self.cfg.endpoint} for items {indices}"
            )
        try:
            body = self._transport.post("/embed", {"texts": texts, "level": level})
        except ProviderError as exc:
            raise ProviderError(f"{exc} (items {indices})", failed_indices=indices) from None
        self.stats.requests_issued += 1
        items = body.get("items")
        if not isinstance(items, list) or len(items) != len(texts):
            raise ProviderError(
                f"{self.cfg.provider_id}: malformed response (misaligned items)",
                failed_indices=indices,
            )
        return items

    def _gather(self, texts: list[str], level: str) -> list[dict]:
        if not texts:
            raise ConfigError("embedding fetch: empty input")
        results: dict[int, dict] = {}
        misses: list[int] = []
        for i, text in enumerate(texts):
            cached = self.cache.get(self._key(level, text)) if self.cache else None
            if cached is not None:
                results[i] = json.loads(cached.decode("utf-8"))
                self.stats.cache_hits += 1
            else:
                misses.append(i)
        for start in range(0, len(misses), self.cfg.batch_size):
            chunk = misses[start : start + self.cfg.batch_size]
            records = self._fetch_records([texts[i] for i in chunk], chunk, level)
            for i, record in zip(chunk, records):
                if self.cache is not None:
                    self.cache.put(
                        self._key(level, texts[i]),
                        _canonical_record_bytes(record),
                        self.cfg.provider_id,
                    )
                results[i] = record
            self.stats.items_fetched += len(chunk)
        return [results[i] for i in range(len(texts))]

    def fetch_sentence_embeddings(self, texts: list[str]) -> list[SentenceEmbedding]:
        records = self._gather(texts, "sentence")
        embeddings = []
        dims = set()
        for record in records:
            vector = record.get("sentence_vector")
            if vector is None:
                raise ProviderError(f"{self.cfg.provider_id}: item lacks sentence_vector")
            embedding = SentenceEmbedding(vector, self.cfg.provider_id)
            dims.add(embedding.dim)
            embeddings.append(embedding)
        if len(dims) > 1:
            raise ProviderError(
                f"{self.cfg.provider_id}: dimensionality drift in batch: {sorted(dims)}"
            )
        return embeddings

    def fetch_token_embeddings(self, texts: list[str]) -> list[TokenEmbeddings]:
        records = self._gather(texts, "token")
        embeddings = []
        dims = set()
        for record in records:
            if "wordpieces" not in record or "token_vectors" not in record:
                raise ProviderError(f"{self.cfg.provider_id}: item lacks token vectors")
            embedding = TokenEmbeddings(tuple(record["wordpieces"]), record["token_vectors"])
            dims.add(embedding.matrix.shape[1])
            embeddings.append(embedding)
        if len(dims) > 1:
            raise ProviderError(
                f"{self.cfg.provider_id}: dimensionality drift in batch: {sorted(dims)}"
            )
        return embeddings


def translate_batch(texts: list[str], src: str, tgt: str, cfg: ProviderConfig,
                    cache: DiskCache | None = None, offline: bool = False) -> list[str]:
    return TranslationClient(cfg, cache=cache, offline=offline).translate_batch(texts, src, tgt)


def fetch_sentence_embeddings(texts: list[str], cfg: ProviderConfig,
                              cache: DiskCache | None = None,
                              offline: bool = False) -> list[SentenceEmbedding]:
    return EmbeddingClient(cfg, cache=cache, offline=offline).fetch_sentence_embeddings(texts)


def fetch_token_embeddings(texts: list[str], cfg: ProviderConfig,
                           cache: DiskCache | None = None,
                           offline: bool = False) -> list[TokenEmbeddings]:
    return EmbeddingClient(cfg, cache=cache, offline=offline).fetch_token_embeddings(texts)
