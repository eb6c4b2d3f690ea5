"""Bundled example tables: self-rated health by age group, men and women."""
from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

import numpy as np

NAMES = ("men", "women")


def example_path(name: str) -> Path:
    if name not in NAMES:
        raise ValueError(f"unknown example {name!r}; choose from {NAMES}")
    return Path(str(resources.files("latcorr") / "data" / f"{name}.csv"))


def load_example(name: str) -> tuple[np.ndarray, list[str], list[str]]:
    """Return ``(counts, row_labels, column_labels)``."""
    with open(example_path(name), newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    counts = np.array([[int(v) for v in row[1:]] for row in body], dtype=np.int64)
    return counts, [row[0] for row in body], header[1:]
