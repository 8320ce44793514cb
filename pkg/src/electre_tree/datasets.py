"""Bundled and external example datasets."""

from __future__ import annotations

import os
from importlib import resources
from pathlib import Path

from .core import ElectreTreeError
from .io import RunConfig, load_matrix

ESL_ENV = "ELECTRE_TREE_ESL"

# Cluster centroids and their ordering reported for the 64-alternative toy set.
DATASET1_CENTROIDS = {
    "C1": (17.5, 9.5),
    "C2": (2.5, 2.5),
    "C3": (24.5, 16.5),
    "C4": (24.5, 9.5),
}
DATASET1_ORDER = ("C3", "C4", "C1", "C2")


def dataset1_path() -> Path:
    return Path(str(resources.files("electre_tree") / "data" / "dataset1.csv"))


def load_dataset1(with_labels: bool = False):
    """The 64 x 2 toy set; labels are the four visual blocks D < C < B < A."""
    cfg = RunConfig(classes=4, labels_column="class")
    matrix, labels, _ = load_matrix(dataset1_path(), cfg)
    return (matrix, labels) if with_labels else matrix


def esl_path() -> Path | None:
    p = os.environ.get(ESL_ENV)
    return Path(p) if p and Path(p).is_file() else None


def load_esl(path=None):
    """Employee-selection data: 4 criteria in [0, 1] and a binary class column.

    Expects a CSV with header ``id,g1,g2,g3,g4,class`` where class is ``A``
    (suitable) or ``B``.  The file is not bundled; pass ``path`` or set
    ``ELECTRE_TREE_ESL``.
    """
    path = Path(path) if path is not None else esl_path()
    if path is None or not path.is_file():
        raise ElectreTreeError(
            f"ESL data unavailable: set {ESL_ENV} to a CSV with columns id,g1..g4,class")
    cfg = RunConfig(classes=2, labels_column="class")
    matrix, labels, _ = load_matrix(path, cfg)
    return matrix, labels
