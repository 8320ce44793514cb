"""End-to-end runs behind the CLI verbs: elicit, classify, boundary."""

from __future__ import annotations

import csv
import io
import warnings
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import DecisionMatrix, ReferenceLabels, TriBParameters, ValidationError
from .ensemble import (Ensemble, VoteResult, build_ensemble, cluster_labels,
                       merge_parameters, vote_accuracy, vote_classify)
from .evolve import fitness_accuracy
from .io import (Normalizer, RunConfig, SavedEnsemble, build_spec, load_ensemble,
                 load_matrix, load_new_alternatives, save_ensemble)
from .tri_b import assign

REPORT_HEADER = "# electre-tree report v1"


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass
class ElicitResult:
    saved: SavedEnsemble
    matrix: DecisionMatrix
    reference: ReferenceLabels
    votes: VoteResult
    merged: TriBParameters
    merged_classes: np.ndarray
    vote_accuracy: float
    merged_accuracy: float
    report: str

    @property
    def ensemble(self) -> Ensemble:
        return self.saved.ensemble


def accuracy_histogram(accuracies) -> list[tuple[float, int]]:
    """Model count per distinct training accuracy, ascending."""
    counts = Counter(float(a) for a in accuracies)
    return sorted(counts.items())


def reference_labels(matrix: DecisionMatrix, labels: ReferenceLabels | None,
                     config: RunConfig) -> ReferenceLabels:
    if config.reference == "labels":
        if labels is None:
            raise ValidationError("reference 'labels' but the data has no labels column")
        return labels
    return cluster_labels(matrix, config.classes, config.seed)


def run_elicit(config: RunConfig, out_dir=None, *, matrix=None, labels=None,
               n_jobs: int = 1, progress=None) -> ElicitResult:
    """Build the ensemble, merge it, vote, and write the report and ensemble file.

    ``matrix``/``labels`` may be passed directly instead of reading
    ``config.data``; a normalizer is then not applied.
    """
    if matrix is None:
        if not config.data:
            raise ValidationError("config has no data path")
        matrix, file_labels, norm = load_matrix(config.data, config)
        labels = file_labels
    else:
        norm = Normalizer(tuple(matrix.criteria), ("max",) * matrix.shape[1],
                          tuple(matrix.values.min(0).tolist()),
                          tuple(matrix.values.max(0).tolist()), "none")
    spec = build_spec(matrix, config)
    ref = reference_labels(matrix, labels, config)
    ens = build_ensemble(
        matrix, spec,
        labels=ref if config.reference == "labels" else None,
        n_classes=config.classes, n_models=config.n_models,
        sample_fraction=config.sample_fraction, ga_config=config.ga, rule=config.rule,
        seed=config.seed, n_jobs=n_jobs, progress=progress)
    ens.config = config.to_dict()
    used = ens.trimmed(config.trim)
    merged = merge_parameters(used, spec)
    votes = vote_classify(used, matrix)
    merged_cls = assign(matrix, merged, config.rule).classes
    v_acc = vote_accuracy(votes, ref)
    m_acc = fitness_accuracy(merged, matrix, ref, config.rule)
    ranges = (tuple(matrix.values.min(0).tolist()), tuple(matrix.values.max(0).tolist()))
    saved = SavedEnsemble(ens, norm, list(config.class_names), merged, ranges)
    report = render_report(matrix, used, merged, votes, merged_cls, ref, v_acc, m_acc,
                           config.class_names, n_built=len(ens.models))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.txt").write_text(report, encoding="utf-8")
        save_ensemble(saved, out / "ensemble.json")
    return ElicitResult(saved, matrix, ref, votes, merged, merged_cls, v_acc, m_acc, report)


def _csv_lines(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def parameter_rows(params: TriBParameters, criteria) -> list[list[str]]:
    rows = [["parameter", *criteria],
            ["weights", *map(_fmt, params.weights)],
            ["indifference", *map(_fmt, params.q)],
            ["preference", *map(_fmt, params.p)],
            ["veto", *map(_fmt, params.v)]]
    for h, prof in enumerate(params.profiles, start=1):
        rows.append([f"profile {h}", *map(_fmt, prof)])
    rows.append(["lambda", _fmt(params.lam)])
    return rows


def render_report(matrix, ensemble: Ensemble, merged, votes, merged_cls, ref,
                  v_acc, m_acc, class_names, n_built=None) -> str:
    names = list(class_names)
    acc = ensemble.accuracies
    parts = [REPORT_HEADER, "", "[Parameters]",
             _csv_lines(parameter_rows(merged, matrix.criteria)).rstrip("\n"), "",
             "[Accuracy]"]
    acc_rows = [["models_built", n_built if n_built is not None else len(acc)],
                ["models_used", len(acc)],
                ["mean_model_accuracy", _fmt(acc.mean())],
                ["models_at_full_accuracy", int((acc == 1.0).sum())],
                ["vote_accuracy", _fmt(v_acc)],
                ["merged_accuracy", _fmt(m_acc)],
                ["reference", ref.source]]
    parts += [_csv_lines(acc_rows).rstrip("\n"), "", "[Histogram]"]
    hist = [["accuracy", "models"]] + [[_fmt(a), c] for a, c in accuracy_histogram(acc)]
    parts += [_csv_lines(hist).rstrip("\n"), "", "[Votes]"]
    parts.append(vote_table(matrix.alternatives, votes, merged_cls, names,
                            ref).rstrip("\n"))
    return "\n".join(parts) + "\n"


def vote_table(ids, votes: VoteResult, merged_cls, class_names,
               ref: ReferenceLabels | None = None) -> str:
    """CSV of vote counts per class (best class first), vote winner and merged class."""
    k = votes.counts.shape[1]
    names = list(class_names)
    header = ["id", *names, "vote", "merged"]
    if ref is not None:
        header.append("reference")
    rows = [header]
    for i, alt in enumerate(ids):
        counts = [int(votes.counts[i, k - 1 - c]) for c in range(k)]
        row = [alt, *counts, names[k - 1 - votes.winners[i]], names[k - 1 - merged_cls[i]]]
        if ref is not None:
            lab = int(ref.labels[i])
            row.append(names[k - 1 - lab] if lab >= 0 else "")
        rows.append(row)
    return _csv_lines(rows)


@dataclass
class ClassifyResult:
    matrix: DecisionMatrix
    votes: VoteResult
    merged_classes: np.ndarray
    table: str


def run_classify(ensemble, source, *, trim: float | None = None) -> ClassifyResult:
    """Vote on new alternatives with a saved ensemble."""
    saved = ensemble if isinstance(ensemble, SavedEnsemble) else load_ensemble(ensemble)
    ens = saved.ensemble
    if trim is None:
        trim = ens.config.get("trim") if ens.config else None
    matrix = load_new_alternatives(source, saved.normalizer)
    if matrix.fingerprint() != ens.fingerprint:
        warnings.warn("data differs from the training set the ensemble was built on",
                      stacklevel=2)
    used = ens.trimmed(trim)
    merged = saved.merged if saved.merged is not None else merge_parameters(used)
    votes = vote_classify(used, matrix)
    merged_cls = assign(matrix, merged, ens.rule).classes
    return ClassifyResult(matrix, votes, merged_cls,
                          vote_table(matrix.alternatives, votes, merged_cls, saved.class_names))


@dataclass
class BoundaryGrid:
    x: np.ndarray
    y: np.ndarray
    vote_class: np.ndarray
    merged_class: np.ndarray
    shape: tuple[int, int]

    def to_csv(self) -> str:
        rows = [["x", "y", "vote_class", "merged_class"]]
        rows += [[_fmt(a), _fmt(b), int(c), int(d)]
                 for a, b, c, d in zip(self.x, self.y, self.vote_class, self.merged_class)]
        return _csv_lines(rows)

    def as_images(self) -> tuple[np.ndarray, np.ndarray]:
        """Class grids indexed ``[iy, ix]``."""
        ny, nx = self.shape
        return self.vote_class.reshape(ny, nx), self.merged_class.reshape(ny, nx)


def boundary_grid(model, x_name: str, y_name: str, resolution=100, fixed=None,
                  ranges=None, criteria=None, rule: str | None = None) -> BoundaryGrid:
    """Classify a rectangular grid over two criteria.

    ``model`` is a :class:`SavedEnsemble`, a path to one, or bare
    :class:`TriBParameters` (then ``criteria`` and ``ranges`` are required
    and both columns hold the same classes).  Other criteria sit at the
    values in ``fixed`` or, by default, at the middle of their range.
    Points run over x fastest.
    """
    if isinstance(model, (str, Path)):
        model = load_ensemble(model)
    if isinstance(model, SavedEnsemble):
        ens = model.ensemble.trimmed((model.ensemble.config or {}).get("trim"))
        criteria = list(ens.criteria)
        merged = model.merged if model.merged is not None else merge_parameters(ens)
        ranges = model.ranges if ranges is None else ranges
        rule = ens.rule if rule is None else rule
    else:
        ens, merged = None, model
        rule = rule or "pessimistic"
        if criteria is None or ranges is None:
            raise ValidationError("bare parameters need criteria names and ranges")
        criteria = list(criteria)
    for name in (x_name, y_name):
        if name not in criteria:
            raise ValidationError(f"unknown criterion {name!r}")
    if x_name == y_name:
        raise ValidationError("pick two different criteria")
    nx, ny = (resolution, resolution) if np.isscalar(resolution) else resolution
    if nx < 2 or ny < 2:
        raise ValidationError("resolution must be at least 2 per axis")
    lo, hi = np.asarray(ranges[0], float), np.asarray(ranges[1], float)
    fixed = dict(fixed or {})
    unknown = set(fixed) - set(criteria)
    if unknown:
        raise ValidationError(f"unknown criterion {sorted(unknown)[0]!r}")
    jx, jy = criteria.index(x_name), criteria.index(y_name)
    xs = np.linspace(lo[jx], hi[jx], nx)
    ys = np.linspace(lo[jy], hi[jy], ny)
    gx, gy = np.meshgrid(xs, ys)
    pts = np.empty((gx.size, len(criteria)))
    for j, c in enumerate(criteria):
        pts[:, j] = fixed.get(c, (lo[j] + hi[j]) / 2.0)
    pts[:, jx] = gx.ravel()
    pts[:, jy] = gy.ravel()
    merged_cls = assign(pts, merged, rule).classes
    vote_cls = vote_classify(ens, pts).winners if ens is not None else merged_cls.copy()
    return BoundaryGrid(gx.ravel(), gy.ravel(), vote_cls, merged_cls, (ny, nx))
