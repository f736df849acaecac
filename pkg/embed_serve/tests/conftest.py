import hashlib

import pytest


class StubEncoder:
    """Deterministic toy encoder with the real encoder's interface."""

    dim = 8

    def _vector(self, seed: str) -> list[float]:
        digest = hashlib.sha256(seed.encode("utf-8")).digest()
        return [b / 255.0 - 0.5 for b in digest[: self.dim]]

    def _pieces(self, text: str) -> list[str]:
        pieces = []
        for word in text.lower().split():
            if len(word) > 6:
                pieces.append(word[:3])
                pieces.append("##" + word[3:])
            else:
                pieces.append(word)
        return pieces or ["[empty]"]

    def encode_sentences(self, texts):
        return [self._vector("sent:" + t) for t in texts]

    def encode_tokens(self, texts):
        out = []
        for text in texts:
            pieces = self._pieces(text)
            out.append((pieces, [self._vector("tok:" + p) for p in pieces]))
        return out


@pytest.fixture
def encoder():
    return StubEncoder()
