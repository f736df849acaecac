import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rtteval.textnorm import (
    Scheme,
    TokenSequence,
    char_stream,
    split_cjk_chars,
    tokenize,
)

from conftest import read_tsv

GOLDEN = read_tsv("golden_tokenize.tsv")
SCHEMES = {"13a": Scheme.TOK_13A, "intl": Scheme.TOK_INTL}


@pytest.mark.parametrize("row", GOLDEN, ids=[f"{r[0]}-{i}" for i, r in enumerate(GOLDEN)])
def test_tokenize_matches_golden(row):
    scheme, lowercase, text, *expected = row
    got = tokenize(text, SCHEMES[scheme], lowercase == "true")
    assert list(got.tokens) == expected


def test_single_word_no_punctuation():
    assert tokenize("abc", Scheme.TOK_13A, False).tokens == ("abc",)


def test_empty_text_yields_no_tokens():
    assert tokenize("", Scheme.TOK_INTL, False).tokens == ()


def test_intl_splits_punctuation_and_lowercases():
    got = tokenize("Hello, world!", Scheme.TOK_INTL, True)
    assert got.tokens == ("hello", ",", "world", "!")
    assert got.cased is False


def test_char_stream_scheme_rejected_by_tokenize():
    with pytest.raises(ValueError):
        tokenize("abc", Scheme.CHAR_STREAM, False)


# --- char_stream ------------------------------------------------------------

def test_char_stream_strips_whitespace():
    assert char_stream("a b").tokens == ("a", "b")


def test_char_stream_empty():
    assert char_stream("").tokens == ()


def test_char_stream_keeps_punctuation():
    assert char_stream("ab, c").tokens == ("a", "b", ",", "c")


@given(st.text(max_size=80))
def test_char_stream_length_equals_nonspace_count(text):
    stream = char_stream(text)
    assert len(stream.tokens) == sum(1 for ch in text if not ch.isspace())
    assert stream.scheme is Scheme.CHAR_STREAM


# --- split_cjk_chars --------------------------------------------------------

def test_cjk_split_no_cjk_untouched():
    assert split_cjk_chars("abc") == "abc"
    assert split_cjk_chars("a  b") == "a  b"


def test_cjk_split_basic():
    assert split_cjk_chars("你好") == "你 好"


def test_cjk_split_embedded():
    assert split_cjk_chars("ab你cd") == "ab 你 cd"


@given(st.text(alphabet=st.sampled_from("ab 你好世界,."), max_size=30))
def test_cjk_split_idempotent(text):
    once = split_cjk_chars(text)
    assert split_cjk_chars(once) == once


# --- properties -------------------------------------------------------------

_TEXT = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)),
    max_size=60,
)

# Digits excluded: the canonical tokenizers deliberately keep digit-adjacent
# punctuation attached, which makes punct-punct-digit runs (e.g. ":::0")
# split differently on a second pass.  That behavior is pinned below.
_TEXT_NO_DIGITS = st.text(
    alphabet=st.characters(blacklist_categories=("Cs", "Nd")),
    max_size=60,
)


@settings(max_examples=200)
@given(_TEXT_NO_DIGITS, st.sampled_from([Scheme.TOK_13A, Scheme.TOK_INTL]), st.booleans())
def test_tokenize_idempotent_on_joined_output(text, scheme, lowercase):
    first = tokenize(text, scheme, lowercase)
    again = tokenize(" ".join(first.tokens), scheme, lowercase)
    assert again.tokens == first.tokens


def test_digit_adjacent_punctuation_quirk_is_canonical():
    # Frozen from the reference tokenizer: the digit-adjacent colon stays
    # attached on the first pass only.  Not idempotent, by design.
    assert tokenize(":::0", Scheme.TOK_INTL, False).tokens == (":", ":", ":0")
    assert tokenize(": : :0", Scheme.TOK_INTL, False).tokens == (":", ":", ":", "0")


@settings(max_examples=200)
@given(_TEXT, st.sampled_from([Scheme.TOK_13A, Scheme.TOK_INTL]))
def test_lowercase_equals_per_token_fold(text, scheme):
    lowered = tokenize(text, scheme, True)
    folded = tuple(tok.lower() for tok in tokenize(text, scheme, False).tokens)
    assert lowered.tokens == folded


def test_token_sequence_rejects_empty_token():
    with pytest.raises(ValueError):
        TokenSequence(("a", ""), Scheme.TOK_13A)


def test_token_sequence_rejects_whitespace_token():
    with pytest.raises(ValueError):
        TokenSequence(("a b",), Scheme.TOK_13A)
