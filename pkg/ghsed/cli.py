"""Operator CLI: keygen / index / store / search / serve / verify / stats / bench."""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click
import yaml

from config import (
    DATA_DIR,
    EW_MODE,
    INDEX_BITS,
    KEY_BITS,
    KEY_DIR,
    LISTEN,
    LOG_LEVEL,
    MIN_KEY_BITS,
    OWNER_KEY_DIR,
)
from ghsed.bench.cli import bench
from ghsed.client_indexer import build_heuristic_table, parse_ht, serialize_ht, verify_document
from ghsed.errors import GhsedError
from ghsed.ght_store import GhtStore
from ghsed.owner_crypto import keygen, load_keys, save_keys
from ghsed.protocol import client_search, client_store, parse_address, serve
from models import EwMode

_MODE = click.Choice([m.value for m in EwMode])


class _Group(click.Group):
    """Turns library errors into their documented exit codes."""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except GhsedError as e:
            click.echo(f"Error: {e}", err=True)
            ctx.exit(e.exit_code)


@click.group(cls=_Group)
@click.option("--log-level", default=LOG_LEVEL, show_default=True, help="Python logging level")
def cli(log_level: str) -> None:
    """Keyword search over encrypted documents held by an untrusted server."""
    logging.basicConfig(
        level=log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


@cli.command("keygen")
@click.option("--bits", default=KEY_BITS, show_default=True, type=click.IntRange(min=MIN_KEY_BITS))
@click.option("--out", "out_dir", default=KEY_DIR, show_default=True, type=click.Path(file_okay=False))
def keygen_cmd(bits: int, out_dir: str) -> None:
    """Generate the owner's RSA key pair."""
    keys = keygen(bits)
    paths = save_keys(keys, out_dir)
    click.echo(f"Key {keys.key_id} ({keys.bits} bits)")
    for name, path in paths.items():
        click.echo(f"  {name}: {path}")


@cli.command("index")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--key", "key_dir", default=KEY_DIR, show_default=True, type=click.Path(file_okay=False))
@click.option("--mode", default=EW_MODE, show_default=True, type=_MODE)
@click.option("--index-bits", default=INDEX_BITS, show_default=True, type=click.IntRange(1, 64))
def index_cmd(file: str, key_dir: str, mode: str, index_bits: int) -> None:
    """Print the heuristic table of FILE."""
    keys = load_keys(key_dir)
    text = Path(file).read_bytes().decode("utf-8", errors="ignore")
    table = build_heuristic_table(text, keys, EwMode(mode), index_bits)
    click.echo(serialize_ht(table).decode("utf-8"), nl=False)


@cli.command("store")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--key", "key_dir", default=KEY_DIR, show_default=True, type=click.Path(file_okay=False))
@click.option("--server", default=LISTEN, show_default=True, help="host:port")
@click.option("--mode", default=EW_MODE, show_default=True, type=_MODE)
@click.option("--index-bits", default=INDEX_BITS, show_default=True, type=click.IntRange(1, 64))
def store_cmd(file: str, key_dir: str, server: str, mode: str, index_bits: int) -> None:
    """Encrypt FILE, index it and upload both."""
    doc_id = client_store(file, load_keys(key_dir), parse_address(server), EwMode(mode), index_bits)
    click.echo(doc_id)


@cli.command("search")
@click.argument("word")
@click.option("--key", "key_dir", default=KEY_DIR, show_default=True, type=click.Path(file_okay=False))
@click.option("--server", default=LISTEN, show_default=True, help="host:port")
@click.option("--mode", default=EW_MODE, show_default=True, type=_MODE)
@click.option("--index-bits", default=INDEX_BITS, show_default=True, type=click.IntRange(1, 64))
@click.option("--ids-only", is_flag=True, help="Return DocIds without ciphertexts")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), help="Write decrypted hits here")
def search_cmd(word: str, key_dir: str, server: str, mode: str, index_bits: int,
               ids_only: bool, out_dir: str | None) -> None:
    """Find the stored documents containing WORD."""
    hits = client_search(word, load_keys(key_dir), parse_address(server), EwMode(mode),
                         index_bits, ids_only=ids_only)
    if out_dir:
        Path(out_dir).mkdir(parents=True, exist_ok=True)
    for doc_id, plaintext in hits:
        if plaintext is None:
            click.echo(doc_id)
        elif out_dir:
            path = Path(out_dir) / f"doc_{doc_id}"
            path.write_bytes(plaintext)
            click.echo(f"{doc_id}\t{path}")
        else:
            click.echo(f"{doc_id}\t{len(plaintext)} bytes")


@cli.command("serve")
@click.option("--data", "data_dir", default=DATA_DIR, show_default=True, type=click.Path(file_okay=False))
@click.option("--listen", default=LISTEN, show_default=True, help="host:port")
@click.option("--owner-key", default=OWNER_KEY_DIR or None,
              help="Owner public key (directory or PEM); remembered in the data directory")
@click.option("--mode", default=EW_MODE, show_default=True, type=_MODE)
@click.option("--index-bits", default=INDEX_BITS, show_default=True, type=click.IntRange(1, 64))
def serve_cmd(data_dir: str, listen: str, owner_key: str | None, mode: str, index_bits: int) -> None:
    """Run the server until interrupted."""
    serve(data_dir, parse_address(listen), owner_key, index_bits, EwMode(mode))


@cli.command("verify")
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.argument("ht_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--key", "key_dir", default=KEY_DIR, show_default=True, type=click.Path(file_okay=False))
def verify_cmd(file: str, ht_file: str, key_dir: str) -> None:
    """Check that HT_FILE still matches the plaintext FILE."""
    result = verify_document(
        Path(file).read_bytes(), parse_ht(Path(ht_file).read_bytes()), load_keys(key_dir)
    )
    click.echo(yaml.dump(result, default_flow_style=False, sort_keys=False), nl=False)
    if not result["intact"]:
        sys.exit(1)


@cli.command("stats")
@click.option("--data", "data_dir", default=DATA_DIR, show_default=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--mode", default=EW_MODE, show_default=True, type=_MODE)
@click.option("--index-bits", default=INDEX_BITS, show_default=True, type=click.IntRange(1, 64))
def stats_cmd(data_dir: str, mode: str, index_bits: int) -> None:
    """Print GHT statistics of a data directory as YAML."""
    store = GhtStore.open(data_dir, index_bits=index_bits, mode=EwMode(mode))
    summary = {"documents": len(store), **store.stats().model_dump(
        include={"bucket_count", "record_count", "max_chain", "mean_chain"}
    )}
    click.echo(yaml.dump(summary, default_flow_style=False, sort_keys=False), nl=False)


cli.add_command(bench)


def main() -> None:
    cli(prog_name="ghsed")
