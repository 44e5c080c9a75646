"""Command-line front end (``vqembed``)."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Any, Sequence

import click

from . import experiments as ex
from .config import load_config, with_overrides
from .errors import DegenerateInputError, InvalidInputError, ResourceLimitError
from .exact import DEFAULT_ED_CAP


class Context:
    def __init__(self, config: str | None, out: str | None, seed: int | None, jobs: int, ed_cap: int):
        self.config_path = config
        self.out = Path(out) if out else None
        self.seed = seed
        self.jobs = jobs
        self.ed_cap = ed_cap

    def config(self) -> dict:
        if self.config_path is None:
            raise click.UsageError("--config is required")
        try:
            return with_overrides(load_config(self.config_path), seed=self.seed)
        except InvalidInputError as exc:
            raise click.ClickException(str(exc)) from None

    def write_json(self, name: str, payload: Any) -> None:
        text = json.dumps(payload, indent=2, allow_nan=False)
        if self.out is None:
            click.echo(text)
            return
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(text + "\n")
        click.echo(f"wrote {self.out / name}")

    def write_jsonl(self, name: str, records: Sequence[dict]) -> None:
        lines = "\n".join(json.dumps(r, allow_nan=False) for r in records)
        if self.out is None:
            click.echo(lines)
            return
        self.out.mkdir(parents=True, exist_ok=True)
        (self.out / name).write_text(lines + "\n")
        click.echo(f"wrote {self.out / name}")

    def write_csv(self, name: str, rows: Sequence[dict]) -> None:
        if self.out is None or not rows:
            return
        self.out.mkdir(parents=True, exist_ok=True)
        with open(self.out / name, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
            writer.writeheader()
            writer.writerows(rows)
        click.echo(f"wrote {self.out / name}")


def _run(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (InvalidInputError, DegenerateInputError, ResourceLimitError) as exc:
        raise click.ClickException(str(exc)) from None


@click.group()
@click.option("--config", "config", type=click.Path(exists=True, dir_okay=False), help="Experiment config (JSON).")
@click.option("--out", type=click.Path(file_okay=False), help="Output directory (default: print JSON).")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Override the config seed.")
@click.option("--jobs", type=click.IntRange(min=1), default=1, show_default=True, help="Worker processes.")
@click.option("--ed-cap", type=click.IntRange(min=1), default=DEFAULT_ED_CAP, show_default=True,
              help="Largest site count for exact diagonalization.")
@click.pass_context
def main(ctx: click.Context, config, out, seed, jobs, ed_cap) -> None:
    """Certified ground-state lower bounds and cluster experiments."""
    ctx.obj = Context(config, out, seed, jobs, ed_cap)


@main.command()
@click.pass_obj
def solve(obj: Context) -> None:
    """Run the configured relaxation schemes on one instance."""
    cfg = obj.config()
    obj.write_json("solve.json", _run(ex.run_solve, cfg, obj.ed_cap))


@main.command("pair-scan")
@click.pass_obj
def pair_scan(obj: Context) -> None:
    """Merge each pair of clusters in turn and rank the values."""
    cfg = obj.config()
    record, rows = _run(ex.run_pair_scan, cfg, obj.jobs)
    obj.write_csv("pair_scan.csv", rows)
    obj.write_json("pair_scan.json", record)


@main.command("ieff-batch")
@click.pass_obj
def ieff_batch(obj: Context) -> None:
    """Efficiency factors of optimized clusters over seeded instances."""
    cfg = obj.config()
    record, rows = _run(ex.run_ieff_batch, cfg, obj.jobs, obj.ed_cap)
    obj.write_csv("ieff_batch.csv", rows)
    obj.write_json("ieff_batch.json", record)


@main.command("entanglement-graph")
@click.pass_obj
def entanglement_graph(obj: Context) -> None:
    """Reconstruct the interaction graph from relaxed-marginal entanglement."""
    cfg = obj.config()
    obj.write_json("entanglement_graph.json", _run(ex.run_entanglement_graph, cfg))


@main.command("weight-robustness")
@click.pass_obj
def weight_robustness(obj: Context) -> None:
    """Re-solve under random splitting weights."""
    cfg = obj.config()
    record, rows = _run(ex.run_weight_robustness, cfg)
    obj.write_csv("weight_robustness.csv", rows)
    obj.write_json("weight_robustness.json", record)


@main.command("optimize-clusters")
@click.pass_obj
def optimize_clusters_cmd(obj: Context) -> None:
    """One-shot greedy cluster optimization."""
    cfg = obj.config()
    obj.write_json("optimize_clusters.json", _run(ex.run_optimize_clusters, cfg))


@main.command()
@click.pass_obj
def successive(obj: Context) -> None:
    """Successive merging; one JSON line per round."""
    cfg = obj.config()
    obj.write_jsonl("successive.jsonl", _run(ex.run_successive, cfg))


if __name__ == "__main__":  # pragma: no cover
    main()
