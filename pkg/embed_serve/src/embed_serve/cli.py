"""embed-serve command line: run the service or dump offline fixtures."""

from __future__ import annotations

import sys

import click

from .bindings import PretrainedEncoder, UnsupportedLanguageError, binding_for_language
from .fixtures import dump_fixtures
from .service import create_app


def _encoder_for(lang: str, device: str, max_batch: int) -> PretrainedEncoder:
    try:
        binding = binding_for_language(lang, device=device, max_batch=max_batch)
    except UnsupportedLanguageError as exc:
        click.echo(f"embed-serve: error: {exc}", err=True)
        sys.exit(2)
    return PretrainedEncoder(binding)


@click.group()
def main():
    """Sentence and wordpiece embedding service."""


@main.command("serve")
@click.option("--lang", default="en", show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8901, show_default=True)
@click.option("--device", default="cpu", show_default=True)
@click.option("--max-batch", default=64, show_default=True)
@click.option("--max-concurrent", default=4, show_default=True)
def cmd_serve(lang, host, port, device, max_batch, max_concurrent):
    """Serve /embed for one language binding."""
    import uvicorn

    encoder = _encoder_for(lang, device, max_batch)
    app = create_app(encoder, max_batch=max_batch, max_concurrent=max_concurrent)
    click.echo(
        f"serving {encoder.binding.sentence_model} + {encoder.binding.token_model} "
        f"(layer {encoder.binding.token_layer}) for {lang!r} on {host}:{port}"
    )
    uvicorn.run(app, host=host, port=port, log_level="warning")


@main.command("dump-fixtures")
@click.option("--lang", default="en", show_default=True)
@click.option("--texts", "texts_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--device", default="cpu", show_default=True)
@click.option("--max-batch", default=64, show_default=True)
def cmd_dump_fixtures(lang, texts_path, out_path, device, max_batch):
    """Embed every line of a text file into the offline fixture format."""
    encoder = _encoder_for(lang, device, max_batch)
    binding = encoder.binding
    try:
        count = dump_fixtures(
            texts_path,
            out_path,
            encoder,
            header={
                "sentence_model": binding.sentence_model,
                "token_model": binding.token_model,
                "token_layer": binding.token_layer,
            },
        )
    except Exception as exc:  # model load or inference failure
        click.echo(f"embed-serve: error: fixture dump failed: {exc}", err=True)
        sys.exit(1)
    click.echo(f"wrote {count} fixture records to {out_path}")


if __name__ == "__main__":
    main()
