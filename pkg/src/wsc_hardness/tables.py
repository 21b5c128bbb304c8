"""Readers for the bundled, tab-separated resource files."""

from functools import lru_cache
from importlib import resources
from pathlib import Path


def iter_rows(lines):
    """Yield tab-split rows, skipping blanks and '#' comments."""
    for raw in lines:
        line = raw.split("#", 1)[0].rstrip("\n").strip()
        if line:
            yield [c.strip() for c in line.split("\t")]


def read_rows(path):
    with open(path, encoding="utf-8") as fh:
        return list(iter_rows(fh))


def bundled_path(name):
    return Path(str(resources.files("wsc_hardness") / "data" / name))


@lru_cache(maxsize=None)
def bundled_rows(name):
    return tuple(tuple(r) for r in read_rows(bundled_path(name)))
