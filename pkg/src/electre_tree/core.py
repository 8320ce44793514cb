"""Domain types shared by every stage of the ELECTRE Tree pipeline.

All criteria are treated as maximization criteria.  Classes are integer
indices with 0 as the worst class; ``k`` classes are separated by ``k - 1``
interior reference profiles stored worst to best.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

UNLABELED = -1
# default threshold search range, as a share of each criterion's span
THRESHOLD_SPAN_FRACTION = 0.5


class ElectreTreeError(Exception):
    """Base class for errors raised by this package."""


class ValidationError(ElectreTreeError, ValueError):
    """Input data or parameters violate a documented constraint."""


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class DecisionMatrix:
    """Alternatives x criteria performance table."""

    alternatives: tuple[str, ...]
    criteria: tuple[str, ...]
    values: np.ndarray

    def __init__(self, values, alternatives: Sequence[str] | None = None,
                 criteria: Sequence[str] | None = None):
        vals = np.asarray(values, dtype=float)
        if vals.ndim != 2:
            raise ValidationError("decision matrix must be 2-D")
        n, m = vals.shape
        if alternatives is None:
            alternatives = [f"x{i + 1}" for i in range(n)]
        if criteria is None:
            criteria = [f"g{j + 1}" for j in range(m)]
        alternatives = tuple(str(a) for a in alternatives)
        criteria = tuple(str(c) for c in criteria)
        if len(alternatives) != n or len(criteria) != m:
            raise ValidationError(
                f"labels do not match a {n}x{m} matrix "
                f"({len(alternatives)} alternatives, {len(criteria)} criteria)")
        if n < 2 or m < 2:
            raise ValidationError("need at least 2 alternatives and 2 criteria")
        if not np.all(np.isfinite(vals)):
            i, j = np.argwhere(~np.isfinite(vals))[0]
            raise ValidationError(
                f"non-finite value at row {alternatives[i]!r}, column {criteria[j]!r}")
        object.__setattr__(self, "values", _frozen(vals))
        object.__setattr__(self, "alternatives", alternatives)
        object.__setattr__(self, "criteria", criteria)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def take(self, rows=None, cols=None) -> "DecisionMatrix":
        rows = np.arange(self.shape[0]) if rows is None else np.asarray(rows, dtype=int)
        cols = np.arange(self.shape[1]) if cols is None else np.asarray(cols, dtype=int)
        return DecisionMatrix(
            self.values[np.ix_(rows, cols)],
            [self.alternatives[i] for i in rows],
            [self.criteria[j] for j in cols],
        )

    def fingerprint(self) -> str:
        import hashlib

        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.values).tobytes())
        h.update("\x1f".join(self.criteria).encode())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class TriBParameters:
    """A complete ELECTRE Tri-B parameter set.

    ``profiles`` has shape ``(k - 1, m)``; a veto threshold of ``inf``
    disables the veto on that criterion.
    """

    weights: np.ndarray
    q: np.ndarray
    p: np.ndarray
    v: np.ndarray
    profiles: np.ndarray
    lam: float

    def __post_init__(self):
        for name in ("weights", "q", "p", "v"):
            object.__setattr__(self, name, _frozen(np.atleast_1d(getattr(self, name))))
        prof = np.asarray(self.profiles, dtype=float)
        if prof.ndim == 1:
            prof = prof[None, :]
        object.__setattr__(self, "profiles", _frozen(prof))
        object.__setattr__(self, "lam", float(self.lam))
        m = self.weights.shape[0]
        if any(getattr(self, n).shape != (m,) for n in ("q", "p", "v")) or prof.shape[1] != m:
            raise ValidationError("parameter arrays disagree on the criterion count")

    @property
    def n_criteria(self) -> int:
        return self.weights.shape[0]

    @property
    def n_classes(self) -> int:
        return self.profiles.shape[0] + 1

    def restrict(self, cols) -> "TriBParameters":
        cols = np.asarray(cols, dtype=int)
        return TriBParameters(self.weights[cols], self.q[cols], self.p[cols],
                              self.v[cols], self.profiles[:, cols], self.lam)

    def to_genes(self) -> np.ndarray:
        return np.concatenate([self.weights, self.q, self.p, self.v,
                               self.profiles.ravel(), [self.lam]])

    @classmethod
    def from_genes(cls, genes, n_criteria: int, n_classes: int) -> "TriBParameters":
        g = np.asarray(genes, dtype=float)
        m = n_criteria
        return cls(g[0:m], g[m:2 * m], g[2 * m:3 * m], g[3 * m:4 * m],
                   g[4 * m:-1].reshape(n_classes - 1, m), g[-1])

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "q": self.q.tolist(),
                "p": self.p.tolist(), "v": self.v.tolist(),
                "profiles": self.profiles.tolist(), "lambda": self.lam}

    @classmethod
    def from_dict(cls, d: dict) -> "TriBParameters":
        return cls(d["weights"], d["q"], d["p"], d["v"], d["profiles"], d["lambda"])


def gene_count(n_criteria: int, n_classes: int) -> int:
    return 4 * n_criteria + (n_classes - 1) * n_criteria + 1


def gene_slices(n_criteria: int, n_classes: int) -> dict[str, slice]:
    m = n_criteria
    return {
        "weights": slice(0, m),
        "q": slice(m, 2 * m),
        "p": slice(2 * m, 3 * m),
        "v": slice(3 * m, 4 * m),
        "profiles": slice(4 * m, 4 * m + (n_classes - 1) * m),
        "lambda": slice(4 * m + (n_classes - 1) * m, 4 * m + (n_classes - 1) * m + 1),
    }


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def validate_parameters(params: TriBParameters, n_criteria: int,
                        n_classes: int) -> ValidationReport:
    """List every violated parameter invariant (1-based indices in messages)."""
    rep = ValidationReport()
    bad = rep.violations
    if params.n_criteria != n_criteria:
        bad.append(f"expected {n_criteria} criteria, got {params.n_criteria}")
        return rep
    if params.profiles.shape != (n_classes - 1, n_criteria):
        bad.append(f"expected {n_classes - 1} profiles, got {params.profiles.shape[0]}")
        return rep
    w, q, p, v = params.weights, params.q, params.p, params.v
    for j in range(n_criteria):
        t = j + 1
        if not (0.0 <= w[j] <= 1.0):
            bad.append(f"w_{t} outside [0, 1]")
        if np.isnan(q[j]) or q[j] < 0:
            bad.append(f"q_{t} < 0")
        if np.isnan(p[j]) or p[j] < q[j]:
            bad.append(f"p_{t} < q_{t}")
        if np.isnan(v[j]) or v[j] < p[j]:
            bad.append(f"v_{t} < p_{t}")
    if not w.sum() > 0:
        bad.append("weights sum to 0")
    prof = params.profiles
    if not np.all(np.isfinite(prof)):
        bad.append("non-finite profile value")
    for h in range(prof.shape[0] - 1):
        for j in range(n_criteria):
            if prof[h + 1, j] < prof[h, j]:
                bad.append(f"profile b_{h + 2} below b_{h + 1} on criterion {j + 1}")
    if np.isnan(params.lam) or params.lam < 0.5:
        bad.append("λ below 0.5")
    elif params.lam > 1:
        bad.append("λ above 1")
    return rep


@dataclass(frozen=True)
class ReferenceLabels:
    """Target classes per alternative; ``UNLABELED`` marks missing examples."""

    labels: np.ndarray
    k: int
    source: str = "clusters"

    def __post_init__(self):
        lab = np.asarray(self.labels, dtype=int)
        if self.k < 1 or (self.k < 2 and self.source != "clusters"):
            raise ValidationError("need at least 2 classes")
        if self.source not in ("clusters", "assignment-examples"):
            raise ValidationError(f"unknown label source {self.source!r}")
        known = lab[lab != UNLABELED]
        if np.any((known < 0) | (known >= self.k)):
            raise ValidationError(f"labels must lie in [0, {self.k - 1}]")
        if self.source == "clusters" and known.size != lab.size:
            raise ValidationError("cluster labels cannot be partial")
        object.__setattr__(self, "labels", _frozen(lab, int))

    @property
    def mask(self) -> np.ndarray:
        return self.labels != UNLABELED

    def take(self, rows) -> "ReferenceLabels":
        return ReferenceLabels(self.labels[np.asarray(rows, dtype=int)], self.k, self.source)


class ElicitationSpec:
    """Per-gene search bounds; a gene is fixed when its bounds coincide.

    Bounds are stored in chromosome layout (weights, q, p, v, profile rows
    worst to best, lambda).  A fixed veto of ``inf`` switches the veto off.
    """

    def __init__(self, lower, upper, n_criteria: int, n_classes: int):
        lo = np.array(lower, dtype=float)
        hi = np.array(upper, dtype=float)
        size = gene_count(n_criteria, n_classes)
        if lo.shape != (size,) or hi.shape != (size,):
            raise ValidationError(f"bounds must have {size} entries")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValidationError("bounds contain NaN")
        if np.any(lo > hi):
            i = int(np.argmax(lo > hi))
            raise ValidationError(f"gene {self._gene_name(i, n_criteria, n_classes)} "
                                  f"has lower bound above upper bound")
        free = lo < hi
        if np.any(free & ~(np.isfinite(lo) & np.isfinite(hi))):
            i = int(np.argmax(free & ~(np.isfinite(lo) & np.isfinite(hi))))
            raise ValidationError(f"free gene {self._gene_name(i, n_criteria, n_classes)} "
                                  "needs finite bounds")
        self.n_criteria = n_criteria
        self.n_classes = n_classes
        self.lower = _frozen(lo)
        self.upper = _frozen(hi)
        self._eff_lo, self._eff_hi = self._effective_bounds()
        self._check_feasible()

    @staticmethod
    def _gene_name(i: int, m: int, k: int) -> str:
        for name, sl in gene_slices(m, k).items():
            if sl.start <= i < sl.stop:
                off = i - sl.start
                if name == "profiles":
                    return f"b_{off // m + 1}[{off % m + 1}]"
                if name == "lambda":
                    return "λ"
                return f"{name}_{off + 1}"
        return str(i)

    @property
    def slices(self) -> dict[str, slice]:
        return gene_slices(self.n_criteria, self.n_classes)

    @property
    def fixed(self) -> np.ndarray:
        return self.lower == self.upper

    @property
    def width(self) -> np.ndarray:
        with np.errstate(invalid="ignore"):
            return np.where(self.fixed, 0.0, self.upper - self.lower)

    def _effective_bounds(self):
        """Tighten bounds so that every ordering constraint can be met by raising."""
        lo, hi = self.lower.copy(), self.upper.copy()
        m, k = self.n_criteria, self.n_classes
        s = self.slices
        w = s["weights"]
        lo[w] = np.maximum(lo[w], 0.0)
        hi[w] = np.minimum(hi[w], 1.0)
        lam = s["lambda"]
        lo[lam] = np.maximum(lo[lam], 0.5)
        hi[lam] = np.minimum(hi[lam], 1.0)
        chains = [[s["q"].start + j, s["p"].start + j, s["v"].start + j] for j in range(m)]
        chains += [[s["profiles"].start + h * m + j for h in range(k - 1)] for j in range(m)]
        for ci, chain in enumerate(chains):
            if ci < m:
                lo[chain[0]] = max(lo[chain[0]], 0.0)
            for a, b in zip(chain, chain[1:]):
                lo[b] = max(lo[b], lo[a])
            for a, b in zip(chain[::-1], chain[::-1][1:]):
                hi[b] = min(hi[b], hi[a])
        return lo, hi

    def _check_feasible(self):
        lo, hi = self._eff_lo, self._eff_hi
        if np.any(lo > hi):
            i = int(np.argmax(lo > hi))
            raise ValidationError(
                "no parameter set satisfies the bounds: "
                f"{self._gene_name(i, self.n_criteria, self.n_classes)} is over-constrained")
        w = self.slices["weights"]
        if not hi[w].sum() > 0:
            raise ValidationError("no parameter set satisfies the bounds: weights forced to 0")

    @property
    def effective_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self._eff_lo, self._eff_hi

    def restrict(self, cols) -> "ElicitationSpec":
        cols = np.asarray(cols, dtype=int)
        idx = self._column_genes(cols)
        return ElicitationSpec(self.lower[idx], self.upper[idx], len(cols), self.n_classes)

    def _column_genes(self, cols) -> np.ndarray:
        m, k = self.n_criteria, self.n_classes
        s = self.slices
        parts = [s[n].start + cols for n in ("weights", "q", "p", "v")]
        parts += [s["profiles"].start + h * m + cols for h in range(k - 1)]
        parts.append(np.array([s["lambda"].start]))
        return np.concatenate(parts)

    def to_dict(self) -> dict:
        return {"n_criteria": self.n_criteria, "n_classes": self.n_classes,
                "lower": self.lower.tolist(), "upper": self.upper.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ElicitationSpec":
        return cls(d["lower"], d["upper"], d["n_criteria"], d["n_classes"])

    def __eq__(self, other):
        return (isinstance(other, ElicitationSpec)
                and self.n_criteria == other.n_criteria
                and self.n_classes == other.n_classes
                and np.array_equal(self.lower, other.lower)
                and np.array_equal(self.upper, other.upper))

    @classmethod
    def fixed_params(cls, params: TriBParameters) -> "ElicitationSpec":
        g = params.to_genes()
        return cls(g, g, params.n_criteria, params.n_classes)

    @classmethod
    def from_matrix(cls, matrix: DecisionMatrix | np.ndarray, n_classes: int,
                    **overrides: Any) -> "ElicitationSpec":
        """Default bounds from the data, with optional per-group overrides.

        Each override (``weights``, ``q``, ``p``, ``v``, ``profiles``,
        ``lam``) is one of: ``None``/``"free"`` (default bounds), a number
        (fixed), ``"none"`` (veto only: fixed at infinity), ``("free", lo, hi)``,
        or a per-criterion list of those.  ``profiles`` also accepts a list
        of rows, one per profile.
        """
        vals = matrix.values if isinstance(matrix, DecisionMatrix) else np.asarray(matrix, float)
        if n_classes < 2:
            raise ValidationError("need at least 2 classes")
        m = vals.shape[1]
        cmin, cmax = vals.min(axis=0), vals.max(axis=0)
        span = (cmax - cmin) * THRESHOLD_SPAN_FRACTION
        lo = np.empty(gene_count(m, n_classes))
        hi = np.empty_like(lo)
        s = gene_slices(m, n_classes)
        defaults = {
            "weights": (np.zeros(m), np.ones(m)),
            "q": (np.zeros(m), span), "p": (np.zeros(m), span), "v": (np.zeros(m), span),
            "profiles": (np.tile(cmin, n_classes - 1), np.tile(cmax, n_classes - 1)),
            "lambda": (np.array([0.5]), np.array([1.0])),
        }
        unknown = set(overrides) - {"weights", "q", "p", "v", "profiles", "lam"}
        if unknown:
            raise ValidationError(f"unknown parameter group(s): {sorted(unknown)}")
        for name, (dlo, dhi) in defaults.items():
            key = "lam" if name == "lambda" else name
            size = s[name].stop - s[name].start
            glo, ghi = _resolve_group(overrides.get(key), dlo, dhi, size, name)
            lo[s[name]] = glo
            hi[s[name]] = ghi
        return cls(lo, hi, m, n_classes)


def _resolve_one(item, dlo: float, dhi: float, name: str) -> tuple[float, float]:
    if item is None or (isinstance(item, str) and item.lower() == "free"):
        return dlo, dhi
    if isinstance(item, str):
        if item.lower() in ("none", "inf", "off"):
            if name != "v":
                raise ValidationError(f"{item!r} is only valid for the veto threshold")
            return np.inf, np.inf
        try:
            x = float(item)
        except ValueError:
            raise ValidationError(f"cannot parse {name} bound {item!r}") from None
        return x, x
    if isinstance(item, dict):
        if "fixed" in item:
            return _resolve_one(item["fixed"], dlo, dhi, name)
        if "free" in item:
            lo, hi = item["free"]
            return float(lo), float(hi)
        raise ValidationError(f"bad {name} declaration {item!r}")
    if isinstance(item, tuple) and len(item) == 3 and item[0] == "free":
        return float(item[1]), float(item[2])
    if isinstance(item, (int, float, np.floating, np.integer)):
        return float(item), float(item)
    raise ValidationError(f"bad {name} declaration {item!r}")


def _resolve_group(decl, dlo: np.ndarray, dhi: np.ndarray, size: int, name: str):
    if isinstance(decl, (list, np.ndarray)):
        flat: list = []
        for entry in decl:
            if isinstance(entry, (list, np.ndarray)):
                flat.extend(entry)
            else:
                flat.append(entry)
        if len(flat) != size:
            raise ValidationError(f"{name} declaration needs {size} entries, got {len(flat)}")
        pairs = [_resolve_one(it, dlo[i], dhi[i], name) for i, it in enumerate(flat)]
    else:
        pairs = [_resolve_one(decl, dlo[i], dhi[i], name) for i in range(size)]
    return np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])
