"""Model bindings: which encoders serve which language.

English gets the large monolingual sentence encoder; a fixed list of other
languages is covered by the distilled multilingual encoder.  Languages
outside that list are refused at startup rather than silently degraded.
Wordpiece-level vectors come from a BERT encoder at the layer the standard
embedding-F-score tooling selects for that model.
"""

from __future__ import annotations

from dataclasses import dataclass


class UnsupportedLanguageError(ValueError):
    pass


ENGLISH_SENTENCE_MODEL = "bert-large-nli-mean-tokens"
MULTILINGUAL_SENTENCE_MODEL = "distiluse-base-multilingual-cased"
ENGLISH_TOKEN_MODEL = "bert-base-uncased"
MULTILINGUAL_TOKEN_MODEL = "bert-base-multilingual-cased"

# Layer indices the standard embedding-F-score tool pins for these models.
TOKEN_LAYERS = {
    ENGLISH_TOKEN_MODEL: 9,
    MULTILINGUAL_TOKEN_MODEL: 9,
}

# Languages covered by the released multilingual sentence encoder.
MULTILINGUAL_LANGS = frozenset(
    ["ar", "zh", "nl", "en", "fr", "de", "it", "ko", "pl", "pt", "ru", "es", "tr"]
)


@dataclass(frozen=True)
class ModelBinding:
    lang: str
    sentence_model: str
    token_model: str
    token_layer: int
    device: str = "cpu"
    max_batch: int = 64


def binding_for_language(lang: str, device: str = "cpu", max_batch: int = 64) -> ModelBinding:
    """Resolve the encoder binding for a language tag; refuse unsupported ones."""
    base = lang.split("-")[0].lower()
    if base == "en":
        return ModelBinding(
            base, ENGLISH_SENTENCE_MODEL, ENGLISH_TOKEN_MODEL,
            TOKEN_LAYERS[ENGLISH_TOKEN_MODEL], device, max_batch,
        )
    if base in MULTILINGUAL_LANGS:
        return ModelBinding(
            base, MULTILINGUAL_SENTENCE_MODEL, MULTILINGUAL_TOKEN_MODEL,
            TOKEN_LAYERS[MULTILINGUAL_TOKEN_MODEL], device, max_batch,
        )
    raise UnsupportedLanguageError(
        f"language {lang!r} is not covered by the configured encoders "
        f"(supported: en, {', '.join(sorted(MULTILINGUAL_LANGS - {'en'}))})"
    )


class PretrainedEncoder:
    """Lazy wrapper around the pretrained models named by a binding.

    Heavy imports happen on first use so that the service module stays
    importable (and testable with injected encoders) on machines without
    model weights.  Inference runs in eval mode under no_grad, so outputs
    are deterministic for fixed weights and inputs.
    """

    def __init__(self, binding: ModelBinding):
        self.binding = binding
        self._sentence_model = None
        self._token_model = None
        self._tokenizer = None
        self.dim: int | None = None

    def _load_sentence_model(self):
        if self._sentence_model is None:
            from sentence_transformers import SentenceTransformer

            self._sentence_model = SentenceTransformer(
                self.binding.sentence_model, device=self.binding.device
            )
        return self._sentence_model

    def _load_token_model(self):
        if self._token_model is None:
            import torch
            from transformers import AutoModel, AutoTokenizer

            self._tokenizer = AutoTokenizer.from_pretrained(self.binding.token_model)
            model = AutoModel.from_pretrained(
                self.binding.token_model, output_hidden_states=True
            )
            model.eval()
            model.to(self.binding.device)
            torch.set_grad_enabled(False)
            self._token_model = model
        return self._token_model

    def encode_sentences(self, texts: list[str]) -> list[list[float]]:
        model = self._load_sentence_model()
        vectors = model.encode(
            texts, batch_size=self.binding.max_batch, convert_to_numpy=True,
            show_progress_bar=False,
        )
        self.dim = int(vectors.shape[1]) if len(texts) else self.dim
        return [[float(x) for x in row] for row in vectors]

    def encode_tokens(self, texts: list[str]) -> list[tuple[list[str], list[list[float]]]]:
        import torch

        model = self._load_token_model()
        out = []
        for text in texts:
            encoded = self._tokenizer(
                text, return_tensors="pt", truncation=True, max_length=510
            ).to(self.binding.device)
            with torch.no_grad():
                states = model(**encoded).hidden_states[self.binding.token_layer]
            pieces = self._tokenizer.convert_ids_to_tokens(encoded["input_ids"][0])
            matrix = states[0].cpu().numpy()
            out.append((list(pieces), [[float(x) for x in row] for row in matrix]))
        return out
