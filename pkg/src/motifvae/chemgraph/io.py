"""Line-oriented SMILES file reading."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Iterator

from .elements import ValenceTable
from .graph import MolGraph
from .smiles import SmilesError, parse_smiles

log = logging.getLogger(__name__)


def iter_smiles_file(path: str | Path) -> Iterator[tuple[int, str]]:
    """Yield (line number, smiles) from a UTF-8 file, one molecule per line.

    Blank lines and lines starting with '#' are skipped.
    """
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield lineno, line


def read_molecules(
    path: str | Path,
    table: ValenceTable | None = None,
    strict: bool = False,
) -> tuple[list[MolGraph], int]:
    """Parse a SMILES file; returns (molecules, skipped count).

    Unparsable lines are counted and logged unless ``strict`` is set.
    """
    table = table or ValenceTable.default()
    molecules: list[MolGraph] = []
    skipped = 0
    for lineno, line in iter_smiles_file(path):
        try:
            molecules.append(parse_smiles(line, table))
        except SmilesError as exc:
            if strict:
                raise
            skipped += 1
            log.warning("%s:%d: skipping unparsable molecule: %s", path, lineno, exc)
    return molecules, skipped
