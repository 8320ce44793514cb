"""ELECTRE Tree: bootstrap sub-models, GA elicitation, voting and merging."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .clustering import kmeans, order_clusters
from .core import (DecisionMatrix, ElicitationSpec, ElectreTreeError, ReferenceLabels,
                   TriBParameters, ValidationError)
from .evolve import GaConfig, clip_chromosome, fitness_accuracy, ga_optimize
from .tri_b import PESSIMISTIC, RULES, assign

MAX_RESAMPLES = 100
CLUSTER_RESTARTS = 10


@dataclass(frozen=True)
class ModelRecord:
    alternative_indices: np.ndarray
    criterion_indices: np.ndarray
    params: TriBParameters
    accuracy: float

    def to_dict(self) -> dict:
        return {"alternatives": self.alternative_indices.tolist(),
                "criteria": self.criterion_indices.tolist(),
                "params": self.params.to_dict(), "accuracy": self.accuracy}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelRecord":
        return cls(np.asarray(d["alternatives"], dtype=int), np.asarray(d["criteria"], dtype=int),
                   TriBParameters.from_dict(d["params"]), float(d["accuracy"]))


@dataclass
class Ensemble:
    models: list[ModelRecord]
    class_count: int
    rule: str
    criteria: tuple[str, ...]
    spec: ElicitationSpec
    fingerprint: str = ""
    config: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rule not in RULES:
            raise ValidationError(f"unknown rule {self.rule!r}")
        for rec in self.models:
            if rec.params.n_classes != self.class_count:
                raise ValidationError("models disagree on the class count")

    @property
    def accuracies(self) -> np.ndarray:
        return np.array([m.accuracy for m in self.models])

    def trimmed(self, floor: float | None) -> "Ensemble":
        """Drop models whose training accuracy is below ``floor``."""
        if floor is None:
            return self
        kept = [m for m in self.models if m.accuracy >= floor]
        if not kept:
            raise ElectreTreeError(f"no model reaches the accuracy floor {floor}")
        return replace(self, models=kept)


@dataclass(frozen=True)
class VoteResult:
    counts: np.ndarray
    winners: np.ndarray

    @property
    def n_models(self) -> int:
        return int(self.counts[0].sum()) if len(self.counts) else 0


def sample_size(n: int, fraction: float) -> int:
    # round first so that e.g. 0.1 * 30 does not ceil to 4
    return max(1, math.ceil(round(fraction * n, 9)))


def sample_model(matrix, sample_fraction: float, rng):
    """Bootstrap rows and criteria for one sub-model.

    Criteria are drawn with replacement until two distinct ones appear, then
    deduplicated so no criterion counts twice.
    """
    n, m = matrix.shape
    if not 0 < sample_fraction <= 1:
        raise ValidationError("sample_fraction must lie in (0, 1]")
    if m < 2:
        raise ValidationError("need at least 2 criteria")
    rng = np.random.default_rng(rng)
    rows = rng.integers(n, size=sample_size(n, sample_fraction))
    draws = list(rng.integers(m, size=m))
    while len(set(draws)) < 2:
        draws.append(int(rng.integers(m)))
    return rows, np.unique(draws)


def model_rng(seed, i: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i,)))


def cluster_labels(matrix: DecisionMatrix, k: int, seed, cols=None,
                   restarts: int = CLUSTER_RESTARTS) -> ReferenceLabels:
    """Ordered K-means++ classes for the full matrix on the given criteria."""
    cols = np.arange(matrix.shape[1]) if cols is None else np.asarray(cols)
    # stream keyed by the criterion subset, shared by every model using it
    ss = np.random.SeedSequence(seed, spawn_key=(2**32 - 1, *map(int, cols)))
    sub = matrix.values[:, cols]
    return order_clusters(kmeans(sub, k, np.random.default_rng(ss), n_init=restarts))


def _fit_one(task) -> ModelRecord:
    i, matrix, labels, n_classes, spec, fraction, ga_config, rule, seed, cache = task
    rng = model_rng(seed, i)
    for _ in range(MAX_RESAMPLES):
        rows, cols = sample_model(matrix, fraction, rng)
        if labels is None:
            key = tuple(cols.tolist())
            if key not in cache:
                cache[key] = cluster_labels(matrix, n_classes, seed, cols)
            ref = cache[key].take(rows)
        else:
            ref = labels.take(rows)
        if ref.mask.any():
            break
    else:
        raise ElectreTreeError(
            f"model {i}: no labeled alternative in {MAX_RESAMPLES} samples")
    sub = matrix.values[np.ix_(rows, cols)]
    result = ga_optimize(sub, ref, spec.restrict(cols), ga_config, rule, rng=rng)
    return ModelRecord(rows, cols, result.params, result.accuracy)


def build_ensemble(matrix: DecisionMatrix, spec: ElicitationSpec, *,
                   labels: ReferenceLabels | None = None, n_classes: int | None = None,
                   n_models: int = 100, sample_fraction: float = 0.25,
                   ga_config: GaConfig = GaConfig(), rule: str = PESSIMISTIC,
                   seed: int = 0, n_jobs: int = 1,
                   progress: Callable[[int], None] | None = None) -> Ensemble:
    """Optimize ``n_models`` bootstrap sub-models.

    References come from ``labels`` (assignment examples, possibly partial)
    or, when absent, from ordered clusters of the full matrix computed on
    each model's criterion subset.  Model ``i`` draws from its own stream
    derived from ``seed``, so results do not depend on ``n_jobs``.
    """
    if n_models < 1:
        raise ValidationError("n_models must be at least 1")
    if labels is None:
        if n_classes is None:
            raise ValidationError("give assignment examples or a class count")
    else:
        if n_classes is not None and n_classes != labels.k:
            raise ValidationError("class count disagrees with the labels")
        n_classes = labels.k
        if len(labels.labels) != matrix.shape[0]:
            raise ValidationError("one label per alternative is required")
    if spec.n_criteria != matrix.shape[1] or spec.n_classes != n_classes:
        raise ValidationError("elicitation spec does not match the data")
    cache: dict = {}
    tasks = [(i, matrix, labels, n_classes, spec, sample_fraction, ga_config, rule,
              seed, cache) for i in range(n_models)]
    models: list[ModelRecord] = []
    if n_jobs == 1:
        for t in tasks:
            models.append(_fit_one(t))
            if progress:
                progress(len(models))
    else:
        with ProcessPoolExecutor(max_workers=n_jobs if n_jobs > 0 else None) as ex:
            for rec in ex.map(_fit_one, tasks, chunksize=max(1, n_models // 64)):
                models.append(rec)
                if progress:
                    progress(len(models))
    return Ensemble(models, n_classes, rule, tuple(matrix.criteria), spec,
                    matrix.fingerprint())


def vote_classify(ensemble: Ensemble, matrix) -> VoteResult:
    """Plurality vote of all models; ties go to the lower class."""
    values = matrix.values if isinstance(matrix, DecisionMatrix) else np.asarray(matrix, float)
    if values.ndim != 2 or values.shape[1] != len(ensemble.criteria):
        raise ValidationError(
            f"expected {len(ensemble.criteria)} criteria, got {values.shape[-1]}")
    k = ensemble.class_count
    counts = np.zeros((len(values), k), dtype=int)
    rows = np.arange(len(values))
    for rec in ensemble.models:
        cls = assign(values[:, rec.criterion_indices], rec.params, ensemble.rule).classes
        np.add.at(counts, (rows, cls), 1)
    return VoteResult(counts, np.argmax(counts, axis=1))


def merge_parameters(ensemble: Ensemble, spec: ElicitationSpec | None = None) -> TriBParameters:
    """Average the sub-model parameters criterion by criterion.

    Fixed genes keep their value; the result is clipped against ``spec``
    so every ordering constraint holds again.
    """
    spec = ensemble.spec if spec is None else spec
    m, k = spec.n_criteria, spec.n_classes
    if not ensemble.models:
        raise ValidationError("empty ensemble")
    tot = {n: np.zeros(m) for n in ("weights", "q", "p", "v")}
    prof = np.zeros((k - 1, m))
    cover = np.zeros(m)
    lam = 0.0
    with np.errstate(invalid="ignore"):
        for rec in ensemble.models:
            c = rec.criterion_indices
            pr = rec.params
            tot["weights"][c] += pr.weights
            tot["q"][c] += pr.q
            tot["p"][c] += pr.p
            tot["v"][c] += pr.v
            prof[:, c] += pr.profiles
            cover[c] += 1
            lam += pr.lam
    if np.any(cover == 0):
        j = int(np.argmin(cover))
        raise ValidationError(f"uncovered criterion {ensemble.criteria[j]!r}")
    with np.errstate(invalid="ignore"):
        genes = np.concatenate([tot["weights"] / cover, tot["q"] / cover, tot["p"] / cover,
                                tot["v"] / cover, (prof / cover).ravel(),
                                [lam / len(ensemble.models)]])
    genes = np.where(spec.fixed, spec.lower, genes)
    return TriBParameters.from_genes(clip_chromosome(genes, spec), m, k)


def model_accuracy(params: TriBParameters, matrix, labels: ReferenceLabels,
                   rule: str = PESSIMISTIC) -> float:
    return fitness_accuracy(params, matrix, labels, rule)


def vote_accuracy(votes: VoteResult, labels: ReferenceLabels) -> float:
    mask = labels.mask
    return float((votes.winners[mask] == labels.labels[mask]).mean())
