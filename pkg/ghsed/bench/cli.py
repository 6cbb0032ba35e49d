"""`ghsed bench` subcommands."""

from __future__ import annotations

from pathlib import Path

import click

from config import BENCH_SIZES, EW_MODE, MIN_KEY_BITS
from ghsed.bench.harness import EXPERIMENTS, default_specs
from ghsed.owner_crypto import keygen, load_keys
from models import EwMode


def _parse_sizes(ctx, param, value: str) -> list[int]:
    try:
        sizes = [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter("expected comma-separated integers") from None
    if not sizes or min(sizes) < 1:
        raise click.BadParameter("sizes must be positive")
    return sizes


@click.command("bench")
@click.argument("experiment", type=click.Choice(sorted(EXPERIMENTS)))
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="CSV report path (default: <experiment>.csv)")
@click.option("--sizes", default=",".join(map(str, BENCH_SIZES)), show_default=True, callback=_parse_sizes,
              help="Record counts to sweep")
@click.option("--key", "key_dir", default=None, type=click.Path(file_okay=False),
              help="Owner key directory (default: a fresh 1024-bit key)")
@click.option("--mode", default=EW_MODE, show_default=True, type=click.Choice([m.value for m in EwMode]))
def bench(experiment: str, seed: int, out_path: str | None, sizes: list[int],
          key_dir: str | None, mode: str) -> None:
    """Run a desk-scale experiment and write its CSV report."""
    keys = load_keys(key_dir) if key_dir else keygen(MIN_KEY_BITS)
    kind = "embed" if experiment == "embed" else "search"
    specs = default_specs(kind, sizes, seed)
    report = EXPERIMENTS[experiment](specs, keys, EwMode(mode))
    path = report.to_csv(out_path or Path(f"{experiment}.csv"))
    click.echo(report.summary())
    click.echo(f"\nReport written to {path}")
