"""CSV ingestion, run configuration and ensemble persistence."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import string
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

import numpy as np

from .core import (UNLABELED, DecisionMatrix, ElicitationSpec, ReferenceLabels,
                   TriBParameters, ValidationError)
from .ensemble import Ensemble, ModelRecord
from .evolve import GaConfig
from .tri_b import PESSIMISTIC, RULES

ENSEMBLE_FORMAT = "electre-tree/ensemble"
FORMAT_VERSION = 1


def default_class_names(k: int) -> list[str]:
    """Best class first: A > B > C > ..."""
    if k > 26:
        return [f"C{i}" for i in range(1, k + 1)]
    return list(string.ascii_uppercase[:k])


@dataclass
class RunConfig:
    data: str = ""
    directions: dict[str, str] = field(default_factory=dict)
    normalization: str = "none"
    classes: int = 2
    class_names: list[str] = field(default_factory=list)
    rule: str = PESSIMISTIC
    reference: str = "clusters"
    labels_column: str | None = None
    elicitation: dict[str, Any] = field(default_factory=dict)
    n_models: int = 100
    sample_fraction: float = 0.25
    ga: GaConfig = field(default_factory=GaConfig)
    seed: int = 0
    trim: float | None = None

    def __post_init__(self):
        if isinstance(self.ga, dict):
            self.ga = GaConfig(**self.ga)
        if not self.class_names:
            self.class_names = default_class_names(self.classes)
        self.validate()

    def validate(self):
        if self.classes < 2:
            raise ValidationError("classes must be at least 2")
        if len(self.class_names) != self.classes:
            raise ValidationError(f"need {self.classes} class names, got {len(self.class_names)}")
        if len(set(self.class_names)) != len(self.class_names):
            raise ValidationError("class names must be distinct")
        if not 0 < self.sample_fraction <= 1:
            raise ValidationError("sample_fraction must lie in (0, 1]")
        if self.normalization not in ("none", "minmax"):
            raise ValidationError(f"unknown normalization {self.normalization!r}")
        if self.rule not in RULES:
            raise ValidationError(f"unknown rule {self.rule!r}")
        if self.reference not in ("clusters", "labels"):
            raise ValidationError("reference must be 'clusters' or 'labels'")
        if self.reference == "labels" and not self.labels_column:
            raise ValidationError("reference 'labels' needs labels_column")
        bad = {d for d in self.directions.values() if d not in ("max", "min")}
        if bad:
            raise ValidationError(f"directions must be 'max' or 'min', got {sorted(bad)}")
        if self.n_models < 1:
            raise ValidationError("n_models must be at least 1")
        if self.trim is not None and not 0 <= self.trim <= 1:
            raise ValidationError("trim must lie in [0, 1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["ga"] = asdict(self.ga)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValidationError(f"unknown config key(s): {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            d = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: invalid JSON ({e})") from None
        cfg = cls.from_dict(d)
        if cfg.data and not os.path.isabs(cfg.data):
            cfg.data = str(Path(path).parent / cfg.data)
        return cfg

    def labels_for_rows(self) -> str | None:
        return self.labels_column if self.reference == "labels" else None


@dataclass(frozen=True)
class Normalizer:
    """Per-criterion direction and min-max scaling fitted on the training data."""

    criteria: tuple[str, ...]
    directions: tuple[str, ...]
    mins: tuple[float, ...]
    maxs: tuple[float, ...]
    method: str = "none"

    def apply(self, raw: np.ndarray) -> np.ndarray:
        raw = np.asarray(raw, dtype=float)
        out = raw.copy()
        lo, hi = np.array(self.mins), np.array(self.maxs)
        for j, d in enumerate(self.directions):
            if self.method == "minmax":
                scaled = (raw[:, j] - lo[j]) / (hi[j] - lo[j])
                out[:, j] = 1.0 - scaled if d == "min" else scaled
            elif d == "min":
                out[:, j] = -raw[:, j]
        return out

    def to_dict(self) -> dict:
        return {"criteria": list(self.criteria), "directions": list(self.directions),
                "mins": list(self.mins), "maxs": list(self.maxs), "method": self.method}

    @classmethod
    def from_dict(cls, d: dict) -> "Normalizer":
        return cls(tuple(d["criteria"]), tuple(d["directions"]), tuple(d["mins"]),
                   tuple(d["maxs"]), d["method"])


@dataclass(frozen=True)
class Table:
    ids: list[str]
    columns: list[str]
    cells: list[list[str]]

    def column(self, name: str) -> list[str]:
        j = self.columns.index(name)
        return [row[j] for row in self.cells]


def read_table(source) -> Table:
    """Parse a headed CSV; the first column holds alternative ids."""
    if isinstance(source, (str, os.PathLike)) and not (isinstance(source, str) and "\n" in source):
        text = Path(source).read_text(encoding="utf-8-sig")
        origin = str(source)
    else:
        text = source.read() if hasattr(source, "read") else str(source)
        origin = "<csv>"
    rows = [r for r in csv.reader(io.StringIO(text)) if any(c.strip() for c in r)]
    if not rows:
        raise ValidationError(f"{origin}: empty CSV")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise ValidationError(f"{origin}: header needs an id column and criteria")
    if len(set(header)) != len(header):
        raise ValidationError(f"{origin}: duplicate column names in header")
    body = rows[1:]
    for i, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise ValidationError(
                f"{origin}: line {i} has {len(r)} fields, header has {len(header)}")
    return Table([r[0].strip() for r in body], header[1:],
                 [[c.strip() for c in r[1:]] for r in body])


def _numeric_block(table: Table, criteria: list[str]) -> np.ndarray:
    missing = [c for c in criteria if c not in table.columns]
    if missing:
        raise ValidationError(f"missing criteria column(s): {', '.join(missing)}")
    idx = [table.columns.index(c) for c in criteria]
    out = np.empty((len(table.ids), len(criteria)))
    for i, row in enumerate(table.cells):
        for jj, j in enumerate(idx):
            try:
                out[i, jj] = float(row[j])
            except ValueError:
                raise ValidationError(
                    f"non-numeric value {row[j]!r} at row {table.ids[i]!r}, "
                    f"column {criteria[jj]!r}") from None
            if not math.isfinite(out[i, jj]):
                raise ValidationError(
                    f"non-finite value at row {table.ids[i]!r}, column {criteria[jj]!r}")
    return out


def fit_normalizer(raw: np.ndarray, criteria, config: RunConfig) -> Normalizer:
    unknown = set(config.directions) - set(criteria)
    if unknown:
        raise ValidationError(f"directions given for unknown column(s): {sorted(unknown)}")
    dirs = tuple(config.directions.get(c, "max") for c in criteria)
    mins, maxs = raw.min(axis=0), raw.max(axis=0)
    if config.normalization == "minmax":
        flat = np.flatnonzero(maxs == mins)
        if flat.size:
            raise ValidationError(
                f"constant column {criteria[flat[0]]!r} cannot be min-max normalized")
    return Normalizer(tuple(criteria), dirs, tuple(mins.tolist()), tuple(maxs.tolist()),
                      config.normalization)


def parse_labels(cells: list[str], class_names: list[str], ids: list[str] | None = None,
                 source: str = "assignment-examples") -> ReferenceLabels:
    """Map class names (best first) or integer indices (0 = worst) to labels."""
    k = len(class_names)
    lookup = {name: k - 1 - i for i, name in enumerate(class_names)}
    out = []
    for i, c in enumerate(cells):
        if c == "":
            out.append(UNLABELED)
        elif c in lookup:
            out.append(lookup[c])
        else:
            try:
                v = int(c)
            except ValueError:
                v = -1
            if not 0 <= v < k:
                where = f" at row {ids[i]!r}" if ids else ""
                raise ValidationError(f"unknown class label {c!r}{where}")
            out.append(v)
    return ReferenceLabels(np.array(out, dtype=int), k, source)


def load_matrix(source, config: RunConfig):
    """Read a CSV into a maximization-oriented matrix plus optional labels.

    Returns ``(matrix, labels_or_None, normalizer)``.  With ``minmax`` the
    max-direction columns map to ``(x - min) / (max - min)`` and the
    min-direction ones to ``(max - x) / (max - min)``; without it a
    min-direction column is negated.
    """
    table = read_table(source)
    label_col = config.labels_column
    if label_col and label_col not in table.columns:
        raise ValidationError(f"missing labels column {label_col!r}")
    criteria = [c for c in table.columns if c != label_col]
    raw = _numeric_block(table, criteria)
    norm = fit_normalizer(raw, criteria, config)
    matrix = DecisionMatrix(norm.apply(raw), table.ids, criteria)
    labels = None
    if label_col:
        labels = parse_labels(table.column(label_col), config.class_names, table.ids)
    return matrix, labels, norm


def load_new_alternatives(source, normalizer: Normalizer) -> DecisionMatrix:
    """Read rows to classify with an existing model; extra columns are ignored."""
    table = read_table(source)
    missing = [c for c in normalizer.criteria if c not in table.columns]
    if missing:
        raise ValidationError(f"schema mismatch, missing criteria: {', '.join(missing)}")
    raw = _numeric_block(table, list(normalizer.criteria))
    return DecisionMatrix(normalizer.apply(raw), table.ids, normalizer.criteria)


def build_spec(matrix: DecisionMatrix, config: RunConfig) -> ElicitationSpec:
    decl = dict(config.elicitation)
    if "lambda" in decl:
        decl["lam"] = decl.pop("lambda")
    return ElicitationSpec.from_matrix(matrix, config.classes, **decl)


def _encode(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else "-inf" if x < 0 else "nan"
    if isinstance(x, dict):
        return {k: _encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_encode(v) for v in x]
    if isinstance(x, np.ndarray):
        return _encode(x.tolist())
    if isinstance(x, (np.floating,)):
        return _encode(float(x))
    if isinstance(x, (np.integer,)):
        return int(x)
    return x


def _decode_floats(xs):
    if isinstance(xs, list):
        return [_decode_floats(v) for v in xs]
    if isinstance(xs, str):
        return float(xs)
    return xs


def dumps(obj) -> str:
    return json.dumps(_encode(obj), indent=1, sort_keys=False) + "\n"


@dataclass
class SavedEnsemble:
    ensemble: Ensemble
    normalizer: Normalizer
    class_names: list[str]
    merged: TriBParameters | None = None
    ranges: tuple[tuple[float, ...], tuple[float, ...]] | None = None


def ensemble_to_dict(saved: SavedEnsemble) -> dict:
    e = saved.ensemble
    return {
        "format": ENSEMBLE_FORMAT,
        "version": FORMAT_VERSION,
        "fingerprint": e.fingerprint,
        "criteria": list(e.criteria),
        "class_names": list(saved.class_names),
        "class_count": e.class_count,
        "rule": e.rule,
        "config": e.config,
        "normalizer": saved.normalizer.to_dict(),
        "ranges": None if saved.ranges is None else [list(r) for r in saved.ranges],
        "spec": e.spec.to_dict(),
        "merged": None if saved.merged is None else saved.merged.to_dict(),
        "models": [m.to_dict() for m in e.models],
    }


def _params_from(d: dict) -> TriBParameters:
    return TriBParameters.from_dict({k: _decode_floats(v) for k, v in d.items()})


def ensemble_from_dict(d: dict) -> SavedEnsemble:
    if d.get("format") != ENSEMBLE_FORMAT:
        raise ValidationError("not an ELECTRE Tree ensemble file")
    if d.get("version") != FORMAT_VERSION:
        raise ValidationError(f"unsupported ensemble format version {d.get('version')}")
    spec_d = dict(d["spec"])
    spec_d["lower"] = _decode_floats(spec_d["lower"])
    spec_d["upper"] = _decode_floats(spec_d["upper"])
    models = []
    for md in d["models"]:
        md = dict(md)
        md["params"] = _params_from(md["params"]).to_dict()
        models.append(ModelRecord.from_dict(md))
    ens = Ensemble(models, d["class_count"], d["rule"], tuple(d["criteria"]),
                   ElicitationSpec.from_dict(spec_d), d["fingerprint"], d["config"])
    merged = None if d.get("merged") is None else _params_from(d["merged"])
    ranges = None if d.get("ranges") is None else tuple(tuple(r) for r in d["ranges"])
    return SavedEnsemble(ens, Normalizer.from_dict(d["normalizer"]), list(d["class_names"]),
                         merged, ranges)


def save_ensemble(saved: SavedEnsemble, path) -> None:
    Path(path).write_text(dumps(ensemble_to_dict(saved)), encoding="utf-8")


def load_ensemble(path) -> SavedEnsemble:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: invalid JSON ({e})") from None
    return ensemble_from_dict(d)


def load_params(path) -> TriBParameters:
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: invalid JSON ({e})") from None
    try:
        return _params_from(d)
    except KeyError as e:
        raise ValidationError(f"{path}: missing parameter {e}") from None


def matrix_to_csv(matrix: DecisionMatrix, labels: ReferenceLabels | None = None,
                  class_names: list[str] | None = None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["id", *matrix.criteria]
    if labels is not None:
        header.append("label")
    w.writerow(header)
    k = labels.k if labels is not None else 0
    names = class_names or default_class_names(k)
    for i, alt in enumerate(matrix.alternatives):
        row = [alt, *(repr(float(x)) for x in matrix.values[i])]
        if labels is not None:
            lab = int(labels.labels[i])
            row.append("" if lab == UNLABELED else names[k - 1 - lab])
        w.writerow(row)
    return buf.getvalue()
