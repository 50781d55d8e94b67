"""Line-oriented ``.smi`` files (gzip transparently)."""
from __future__ import annotations

import gzip
from pathlib import Path
from typing import Iterable, Iterator


def _open(path: str | Path, mode: str):
    path = Path(path)
    if path.suffix == ".gz":
        return gzip.open(path, mode + "t", encoding="utf-8")
    return open(path, mode, encoding="utf-8", newline="\n")


def iter_smi(path: str | Path) -> Iterator[tuple[int, str]]:
    """Yield ``(line_number, smiles)`` for each non-blank line; an ID column is dropped."""
    with _open(path, "r") as fh:
        for lineno, line in enumerate(fh, 1):
            fields = line.split()
            if fields:
                yield lineno, fields[0]


def read_smi(path: str | Path) -> list[str]:
    return [s for _, s in iter_smi(path)]


def write_smi(path: str | Path, lines: Iterable[str]) -> int:
    count = 0
    with _open(path, "w") as fh:
        for s in lines:
            fh.write(s)
            fh.write("\n")
            count += 1
    return count
