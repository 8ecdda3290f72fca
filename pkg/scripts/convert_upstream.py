#!/usr/bin/env python3
"""Convert upstream benchmark releases to comclip's JSONL row schemas.

Supported sources:
  winoground  examples.jsonl from the Winoground release (image names without
              extension, integer ids, extra tag columns).
  svo-probes  svo_probes.csv with comma-separated triplets, one boolean column
              per negated slot and image ids instead of paths.

Usage:
    python scripts/convert_upstream.py winoground examples.jsonl data/winoground.jsonl
    python scripts/convert_upstream.py svo-probes svo_probes.csv data/svo.jsonl --ext .jpg

Images are not downloaded; rows refer to ``<image id><ext>`` under the
dataset root, and `comclip eval --root` points at wherever they live.
"""

import csv
import json
from pathlib import Path

import typer
from pydantic import ValidationError
from rich.console import Console

from comclip.datasets import dump_jsonl
from comclip.evaluation.models import MatchInstance, NegType, WinogroundInstance
from comclip.parsing.models import EntityTriple

app = typer.Typer(help="Convert upstream benchmark files to comclip JSONL.")
console = Console(stderr=True)

_NEG_COLUMNS = {"subj_neg": NegType.SUBJECT, "verb_neg": NegType.PREDICATE, "obj_neg": NegType.OBJECT}


def _truthy(value: str) -> bool:
    return value.strip().lower() in {"true", "1", "yes"}


def _triplet(value: str) -> EntityTriple:
    parts = [p.strip() for p in value.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected 'subject,predicate,object', got {value!r}")
    return EntityTriple(subject=parts[0], predicate=parts[1], object=parts[2])


def _summary(kept: int, dropped: list[str], out: Path) -> None:
    console.print(f"[green]Wrote {kept} row(s) to {out}[/green]")
    if dropped:
        console.print(f"[yellow]Dropped {len(dropped)} row(s):[/yellow]")
        for reason in dropped[:20]:
            console.print(f"  {reason}")


@app.command()
def winoground(
    source: Path = typer.Argument(..., exists=True, dir_okay=False, help="Upstream examples.jsonl."),
    out: Path = typer.Argument(..., help="Output JSONL."),
    ext: str = typer.Option(".png", "--ext", help="Extension appended to image names."),
) -> None:
    """Keep id, captions and images; drop the tag columns."""
    rows: list[WinogroundInstance] = []
    dropped: list[str] = []
    with source.open(encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                raw = json.loads(line)
                rows.append(
                    WinogroundInstance(
                        id=str(raw["id"]),
                        caption_0=raw["caption_0"],
                        caption_1=raw["caption_1"],
                        image_0=f"{raw['image_0']}{ext}",
                        image_1=f"{raw['image_1']}{ext}",
                    )
                )
            except (json.JSONDecodeError, KeyError, ValidationError) as e:
                dropped.append(f"line {line_no}: {e}")
    dump_jsonl(rows, out)
    _summary(len(rows), dropped, out)


@app.command("svo-probes")
def svo_probes(
    source: Path = typer.Argument(..., exists=True, dir_okay=False, help="Upstream svo_probes.csv."),
    out: Path = typer.Argument(..., help="Output JSONL."),
    ext: str = typer.Option(".jpg", "--ext", help="Extension appended to image ids."),
) -> None:
    """One row per probe; the negated slot becomes ``neg_type``.

    Probes negating more than one slot, or none, are dropped.
    """
    rows: list[MatchInstance] = []
    dropped: list[str] = []
    with source.open(encoding="utf-8", newline="") as f:
        for row_no, raw in enumerate(csv.DictReader(f), start=1):
            try:
                negated = [kind for column, kind in _NEG_COLUMNS.items() if _truthy(raw[column])]
                if len(negated) != 1:
                    raise ValueError(f"{len(negated)} negated slots")
                rows.append(
                    MatchInstance(
                        id=f"svo{row_no}",
                        sentence=raw["sentence"],
                        triplet=_triplet(raw["pos_triplet"]),
                        neg_type=negated[0],
                        pos_image=f"{raw['pos_image_id']}{ext}",
                        neg_image=f"{raw['neg_image_id']}{ext}",
                    )
                )
            except (KeyError, ValueError) as e:
                dropped.append(f"row {row_no}: {e}")
    dump_jsonl(rows, out)
    _summary(len(rows), dropped, out)


if __name__ == "__main__":
    app()
