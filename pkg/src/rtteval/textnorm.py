"""Deterministic text normalization and tokenization.

Two word tokenizers are provided: a minimal WMT-style scheme that only
normalizes punctuation-adjacent spacing (``13a``), and an international
scheme that additionally splits on every Unicode punctuation/symbol
boundary (``intl``).  A character-stream view (whitespace removed) feeds
the character n-gram metric.  All functions are pure; input text is
NFC-normalized before tokenization so character counts are stable across
differently-encoded sources.
"""

from __future__ import annotations

import functools
import re
import sys
import unicodedata
from dataclasses import dataclass
from enum import Enum


class Scheme(Enum):
    TOK_13A = "13a"
    TOK_INTL = "intl"
    CHAR_STREAM = "char"


@dataclass(frozen=True)
class RawSegment:
    """One line of evaluation data: a sentence with its id and language tag."""

    id: str
    text: str
    lang: str


@dataclass(frozen=True)
class TokenSequence:
    tokens: tuple[str, ...]
    scheme: Scheme
    cased: bool = True

    def __post_init__(self):
        for tok in self.tokens:
            if not tok:
                raise ValueError("empty token in TokenSequence")
            if any(ch.isspace() for ch in tok):
                raise ValueError(f"token contains whitespace: {tok!r}")

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def normalize(text: str) -> str:
    """NFC-normalize text (shared pre-step for every tokenization path)."""
    return unicodedata.normalize("NFC", text)


# --- 13a scheme: entity unescaping + ASCII punctuation spacing -------------

_13A_UNESCAPE = (
    ("<skipped>", ""),
    ("-\n", ""),
    ("\n", " "),
    ("&quot;", '"'),
    ("&amp;", "&"),
    ("&lt;", "<"),
    ("&gt;", ">"),
)
_13A_PUNCT = re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])")
_NONDIGIT_DOT = re.compile(r"([^0-9])([\.,])")
_DOT_NONDIGIT = re.compile(r"([\.,])([^0-9])")
_DIGIT_DASH = re.compile(r"([0-9])(-)")


def normalize_13a(text: str) -> str:
    """Apply the 13a spacing normalization, returning a space-separated string."""
    norm = text
    for old, new in _13A_UNESCAPE:
        norm = norm.replace(old, new)
    norm = f" {norm} "
    norm = _13A_PUNCT.sub(r" \1 ", norm)
    norm = _NONDIGIT_DOT.sub(r"\1 \2 ", norm)
    norm = _DOT_NONDIGIT.sub(r" \1 \2", norm)
    norm = _DIGIT_DASH.sub(r"\1 \2 ", norm)
    return " ".join(norm.split())


# --- intl scheme: split on Unicode punctuation and symbols -----------------

@functools.lru_cache(maxsize=1)
def _intl_patterns():
    # Scanning the whole codepoint space takes a moment; do it once, lazily.
    punct = "".join(
        chr(c) for c in range(sys.maxunicode) if unicodedata.category(chr(c)).startswith("P")
    )
    symbol = "".join(
        chr(c) for c in range(sys.maxunicode) if unicodedata.category(chr(c)).startswith("S")
    )
    return (
        re.compile(f"([^\\d])([{re.escape(punct)}])"),
        re.compile(f"([{re.escape(punct)}])([^\\d])"),
        re.compile(f"([{re.escape(symbol)}])"),
    )


def normalize_intl(text: str) -> str:
    """Space out Unicode punctuation/symbols, keeping digit-adjacent . and , attached."""
    nondigit_punct, punct_nondigit, symbol = _intl_patterns()
    text = nondigit_punct.sub(r"\1 \2 ", text)
    text = punct_nondigit.sub(r" \1 \2", text)
    text = symbol.sub(r" \1 ", text)
    return " ".join(text.split())


def tokenize(text: str, scheme: Scheme, lowercase: bool) -> TokenSequence:
    """Tokenize text under the named scheme; empty text yields no tokens."""
    if scheme not in (Scheme.TOK_13A, Scheme.TOK_INTL):
        raise ValueError(f"tokenize does not support scheme {scheme}")
    prepared = normalize(text)
    if lowercase:
        prepared = prepared.lower()
    if scheme is Scheme.TOK_13A:
        normalized = normalize_13a(prepared)
    else:
        normalized = normalize_intl(prepared)
    return TokenSequence(tuple(normalized.split()), scheme, cased=not lowercase)


# --- CJK character splitting ------------------------------------------------

_CJK_RANGES = ((0x4E00, 0x9FFF), (0x3400, 0x4DBF), (0xF900, 0xFAFF))


def _is_cjk(ch: str) -> bool:
    cp = ord(ch)
    return any(lo <= cp <= hi for lo, hi in _CJK_RANGES)


def split_cjk_chars(text: str) -> str:
    """Surround every CJK ideograph with single spaces.

    Text without CJK codepoints is returned untouched; otherwise whitespace
    runs are collapsed and the result stripped.
    """
    if not any(_is_cjk(ch) for ch in text):
        return text
    spaced = "".join(f" {ch} " if _is_cjk(ch) else ch for ch in text)
    return " ".join(spaced.split())


def char_stream(text: str) -> TokenSequence:
    """The sequence of non-whitespace characters of text, in order."""
    chars = tuple(ch for ch in text if not ch.isspace())
    return TokenSequence(chars, Scheme.CHAR_STREAM)
