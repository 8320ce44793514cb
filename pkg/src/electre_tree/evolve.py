"""Real-coded genetic algorithm over the free ELECTRE Tri-B parameters.

A chromosome is the flat gene vector produced by
:meth:`TriBParameters.to_genes`; populations are ``(P, G)`` arrays and all
operators work row-wise on them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (DecisionMatrix, ElicitationSpec, ReferenceLabels, TriBParameters,
                   ValidationError)
from .tri_b import PESSIMISTIC, classify_values

MIN_SELECTION_WEIGHT = 1e-6


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 15
    generations: int = 30
    elite_count: int = 1
    mutation_rate: float = 0.05
    mu: float = 2.0
    eta: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        if self.population_size < 2:
            raise ValidationError("population_size must be at least 2")
        if not 0 <= self.mutation_rate <= 1:
            raise ValidationError("mutation_rate must lie in [0, 1]")
        if not 0 <= self.elite_count < self.population_size:
            raise ValidationError("elite_count must be in [0, population_size)")
        if self.generations < 0:
            raise ValidationError("generations must be non-negative")


def decode_population(genes, n_criteria: int, n_classes: int):
    """Split a ``(P, G)`` gene array into batched parameter arrays."""
    g = np.asarray(genes, dtype=float)
    m = n_criteria
    P = g.shape[0]
    return (g[:, 0:m], g[:, m:2 * m], g[:, 2 * m:3 * m], g[:, 3 * m:4 * m],
            g[:, 4 * m:-1].reshape(P, n_classes - 1, m), g[:, -1])


def population_fitness(genes, values, labels, mask, n_classes: int,
                       rule: str = PESSIMISTIC) -> np.ndarray:
    m = values.shape[1]
    w, q, p, v, prof, lam = decode_population(genes, m, n_classes)
    cls = classify_values(values[mask], w, q, p, v, prof, lam, rule)
    return (cls == labels[mask]).mean(axis=-1)


def fitness_accuracy(params: TriBParameters, matrix, labels: ReferenceLabels,
                     rule: str = PESSIMISTIC) -> float:
    """Share of labeled alternatives whose assigned class equals the reference."""
    values = matrix.values if isinstance(matrix, DecisionMatrix) else np.asarray(matrix, float)
    mask = labels.mask
    if not mask.any():
        raise ValidationError("no labeled alternatives to score against")
    return float(population_fitness(params.to_genes()[None, :], values, labels.labels,
                                    mask, params.n_classes, rule)[0])


def sbx_beta(xi, mu: float):
    xi = np.asarray(xi, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(xi < 0.5, (2.0 * xi) ** (1.0 / (mu + 1.0)),
                        (1.0 / (2.0 - 2.0 * xi)) ** (1.0 / (mu + 1.0)))


def sbx_crossover(parent1, parent2, mu: float, rng, xi=None):
    """Simulated binary crossover, one uniform draw per gene.

    Genes on which the parents agree are copied unchanged.  ``xi`` may be
    passed explicitly to pin the draws.
    """
    p1 = np.asarray(parent1, dtype=float)
    p2 = np.asarray(parent2, dtype=float)
    if xi is None:
        xi = np.random.default_rng(rng).random(np.broadcast(p1, p2).shape)
    beta = sbx_beta(xi, mu)
    same = p1 == p2
    with np.errstate(invalid="ignore"):
        c1 = np.where(same, p1, ((1.0 - beta) * p1 + (1.0 + beta) * p2) / 2.0)
        c2 = np.where(same, p2, ((1.0 + beta) * p1 + (1.0 - beta) * p2) / 2.0)
    return c1, c2


def mutation_step(xi, eta: float):
    """Relative jump in (-1, 1); zero at ``xi == 0.5``."""
    xi = np.asarray(xi, dtype=float)
    return np.where(xi < 0.5, (2.0 * xi) ** (1.0 / (eta + 1.0)) - 1.0,
                    1.0 - (2.0 - 2.0 * xi) ** (1.0 / (eta + 1.0)))


def rjgga_mutate(chromosome, rate: float, eta: float, gene_width, rng):
    """Perturb each gene with probability ``rate`` by a step scaled to its range."""
    rng = np.random.default_rng(rng)
    genes = np.asarray(chromosome, dtype=float)
    width = np.broadcast_to(np.asarray(gene_width, dtype=float), genes.shape)
    hit = rng.random(genes.shape) <= rate if rate > 0 else np.zeros(genes.shape, bool)
    xi = rng.random(genes.shape)
    step = np.where(hit & (width > 0), mutation_step(xi, eta) * width, 0.0)
    return genes + step


def clip_chromosome(chromosome, spec: ElicitationSpec) -> np.ndarray:
    """Project genes onto the bounds and repair every ordering constraint.

    Works on one chromosome or a ``(P, G)`` population.  Thresholds are
    repaired by raising: p up to q, then v up to p; profile cells are raised
    to their lower neighbour in a single worst-to-best pass.
    """
    g = np.array(chromosome, dtype=float, copy=True)
    single = g.ndim == 1
    if single:
        g = g[None, :]
    lo, hi = spec.effective_bounds
    with np.errstate(invalid="ignore"):
        g = np.clip(g, lo, hi)
    fixed = spec.fixed
    g[:, fixed] = spec.lower[fixed]
    m, k = spec.n_criteria, spec.n_classes
    s = spec.slices
    P = g.shape[0]
    thr = g[:, s["q"].start:s["v"].stop].reshape(P, 3, m)
    g[:, s["q"].start:s["v"].stop] = np.maximum.accumulate(thr, axis=1).reshape(P, 3 * m)
    prof = g[:, s["profiles"]].reshape(P, k - 1, m)
    g[:, s["profiles"]] = np.maximum.accumulate(prof, axis=1).reshape(P, (k - 1) * m)
    w = g[:, s["weights"]]
    dead = ~(w.sum(axis=1) > 0)
    if dead.any():
        w[dead] = hi[s["weights"]]
        g[:, s["weights"]] = w
    return g[0] if single else g


@dataclass
class GaResult:
    params: TriBParameters
    accuracy: float
    history: list[float] = field(default_factory=list)
    generations_run: int = 0


def initial_population(spec: ElicitationSpec, size: int, rng) -> np.ndarray:
    width = spec.width
    pop = spec.lower + rng.random((size, width.size)) * width
    return clip_chromosome(pop, spec)


def ga_optimize(matrix, labels: ReferenceLabels, spec: ElicitationSpec,
                config: GaConfig = GaConfig(), rule: str = PESSIMISTIC,
                rng=None) -> GaResult:
    """Maximize assignment accuracy over the free genes of ``spec``.

    Stops early once a chromosome reaches accuracy 1; later generations
    could not replace it since the best-ever record only changes on strict
    improvement.
    """
    values = matrix.values if isinstance(matrix, DecisionMatrix) else np.asarray(matrix, float)
    if values.shape[1] != spec.n_criteria or labels.k != spec.n_classes:
        raise ValidationError("matrix, labels and spec disagree on shape")
    mask = labels.mask
    if not mask.any():
        raise ValidationError("no labeled alternatives to score against")
    rng = np.random.default_rng(config.seed if rng is None else rng)
    k = spec.n_classes
    target = labels.labels
    P, E = config.population_size, config.elite_count
    width = spec.width

    def evaluate(pop):
        return population_fitness(pop, values, target, mask, k, rule)

    pop = initial_population(spec, P, rng)
    fit = evaluate(pop)
    best_i = int(np.argmax(fit))
    best_genes, best_fit = pop[best_i].copy(), float(fit[best_i])
    history = [best_fit]
    gens = 0
    free = ~spec.fixed
    while gens < config.generations and best_fit < 1.0 and free.any():
        order = np.argsort(-fit, kind="stable")
        elites = pop[order[:E]]
        n_children = P - E
        n_pairs = (n_children + 1) // 2
        weights = np.maximum(fit, MIN_SELECTION_WEIGHT)
        parents = rng.choice(P, size=(n_pairs, 2), p=weights / weights.sum())
        c1, c2 = sbx_crossover(pop[parents[:, 0]], pop[parents[:, 1]], config.mu, rng)
        children = np.empty((2 * n_pairs, pop.shape[1]))
        children[0::2], children[1::2] = c1, c2
        children = children[:n_children]
        children = rjgga_mutate(children, config.mutation_rate, config.eta, width, rng)
        children = clip_chromosome(children, spec)
        pop = np.vstack([elites, children])
        fit = np.concatenate([fit[order[:E]], evaluate(children)])
        gens += 1
        i = int(np.argmax(fit))
        if fit[i] > best_fit:
            best_genes, best_fit = pop[i].copy(), float(fit[i])
        history.append(float(fit.max()))
    params = TriBParameters.from_genes(best_genes, spec.n_criteria, k)
    return GaResult(params, best_fit, history, gens)
