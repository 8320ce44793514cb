"""ELECTRE Tri-B outranking engine.

Every function broadcasts, so the same code scores one parameter set or a
whole GA population at once: parameter arrays may carry leading batch axes
(``weights`` of shape ``(..., m)``, ``profiles`` of shape ``(..., k-1, m)``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DecisionMatrix, TriBParameters, ValidationError

PESSIMISTIC = "pessimistic"
OPTIMISTIC = "optimistic"
RULES = (PESSIMISTIC, OPTIMISTIC)


def partial_concordance(diff, q, p):
    """Concordance of one criterion given ``diff`` = opponent minus subject.

    With ``p == q`` the ramp is empty and a tie at ``diff == q`` still counts
    as concordant.
    """
    diff, q, p = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (diff, q, p)))
    with np.errstate(divide="ignore", invalid="ignore"):
        ramp = (p - diff) / (p - q)
    out = np.where(diff < q, 1.0, np.where(diff >= p, 0.0, ramp))
    out = np.where(p == q, (diff <= q).astype(float), out)
    return out[()] if out.ndim == 0 else out


def global_concordance(partials, weights):
    partials = np.asarray(partials, dtype=float)
    weights = np.asarray(weights, dtype=float)
    total = weights.sum(axis=-1)
    if np.any(total <= 0):
        raise ValidationError("degenerate weights")
    return (partials * weights).sum(axis=-1) / total


def partial_discordance(diff, p, v):
    """Discordance of one criterion; ``v == inf`` disables the veto."""
    diff, p, v = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (diff, p, v)))
    with np.errstate(divide="ignore", invalid="ignore"):
        ramp = (diff - p) / (v - p)
    out = np.where(diff < p, 0.0, np.where(diff >= v, 1.0, ramp))
    out = np.where(p == v, (diff >= p).astype(float), out)
    return out[()] if out.ndim == 0 else out


def credibility(C, D):
    """Concordance ``C`` weakened by every discordance exceeding it.

    ``D`` carries the criteria on its last axis.
    """
    C = np.asarray(C, dtype=float)
    D = np.asarray(D, dtype=float)
    Ce = C[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(D > Ce, (1.0 - D) / (1.0 - Ce), 1.0)
    return C * np.prod(factor, axis=-1)


def outranks(sigma, lam):
    return np.asarray(sigma) >= np.asarray(lam)


@dataclass(frozen=True)
class CredibilityPair:
    sigma_x_b: np.ndarray
    sigma_b_x: np.ndarray


def credibility_pairs(values, weights, q, p, v, profiles) -> CredibilityPair:
    """sigma(x, b) and sigma(b, x) for all alternatives and profiles.

    Returns arrays of shape ``(..., n, k-1)``.
    """
    X = np.asarray(values, dtype=float)[:, None, :]
    w = np.asarray(weights, dtype=float)[..., None, None, :]
    q = np.asarray(q, dtype=float)[..., None, None, :]
    p = np.asarray(p, dtype=float)[..., None, None, :]
    v = np.asarray(v, dtype=float)[..., None, None, :]
    B = np.asarray(profiles, dtype=float)[..., None, :, :]
    b_minus_x = B - X
    x_minus_b = -b_minus_x
    wsum = w.sum(axis=-1)
    C_xb = (w * partial_concordance(b_minus_x, q, p)).sum(axis=-1) / wsum
    C_bx = (w * partial_concordance(x_minus_b, q, p)).sum(axis=-1) / wsum
    s_xb = credibility(C_xb, partial_discordance(b_minus_x, p, v))
    s_bx = credibility(C_bx, partial_discordance(x_minus_b, p, v))
    return CredibilityPair(s_xb, s_bx)


def classes_pessimistic(sigma_x_b, lam) -> np.ndarray:
    """1 + index of the best profile outranked, or 0 when none is."""
    lam = np.asarray(lam, dtype=float)[..., None, None]
    S = np.asarray(sigma_x_b) >= lam
    H = S.shape[-1]
    top = np.argmax(S[..., ::-1], axis=-1)
    return np.where(S.any(axis=-1), H - top, 0)


def classes_optimistic(sigma_b_x, lam) -> np.ndarray:
    """Index of the worst profile outranking the alternative, or k-1 when none does."""
    lam = np.asarray(lam, dtype=float)[..., None, None]
    S = np.asarray(sigma_b_x) >= lam
    H = S.shape[-1]
    return np.where(S.any(axis=-1), np.argmax(S, axis=-1), H)


def classify_values(values, weights, q, p, v, profiles, lam, rule: str = PESSIMISTIC):
    """Class index per alternative, batched over any leading parameter axes."""
    if rule not in RULES:
        raise ValidationError(f"unknown rule {rule!r}")
    pair = credibility_pairs(values, weights, q, p, v, profiles)
    if rule == PESSIMISTIC:
        return classes_pessimistic(pair.sigma_x_b, lam)
    return classes_optimistic(pair.sigma_b_x, lam)


@dataclass(frozen=True)
class Assignment:
    classes: np.ndarray
    rule: str


def _classify(matrix, params: TriBParameters, rule: str) -> Assignment:
    values = matrix.values if isinstance(matrix, DecisionMatrix) else np.asarray(matrix, float)
    if values.shape[1] != params.n_criteria:
        raise ValidationError(
            f"matrix has {values.shape[1]} criteria, parameters have {params.n_criteria}")
    cls = classify_values(values, params.weights, params.q, params.p, params.v,
                          params.profiles, params.lam, rule)
    return Assignment(cls.astype(int), rule)


def assign_pessimistic(matrix, params: TriBParameters) -> Assignment:
    return _classify(matrix, params, PESSIMISTIC)


def assign_optimistic(matrix, params: TriBParameters) -> Assignment:
    return _classify(matrix, params, OPTIMISTIC)


def assign(matrix, params: TriBParameters, rule: str = PESSIMISTIC) -> Assignment:
    return _classify(matrix, params, rule)
