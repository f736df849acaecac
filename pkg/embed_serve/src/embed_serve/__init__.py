"""HTTP embedding service for sentence and wordpiece encoders."""

from .bindings import (
    ModelBinding,
    PretrainedEncoder,
    UnsupportedLanguageError,
    binding_for_language,
)
from .fixtures import dump_fixtures
from .service import create_app

__version__ = "0.1.0"
