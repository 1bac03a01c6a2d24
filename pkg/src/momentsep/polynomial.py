"""Sparse real polynomials in ``n`` variables keyed by exponent tuples."""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError

MultiIndex = tuple[int, ...]


class Relation(str, Enum):
    GEQ = "GEQ"
    EQ = "EQ"


def _add_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(i + j for i, j in zip(a, b))


@dataclass
class Polynomial:
    """A real polynomial ``sum_alpha coef_alpha x^alpha``.

    Zero coefficients are dropped on construction, so ``terms`` only holds
    the support of the polynomial.
    """

    n: int
    terms: dict[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for alpha, coef in dict(self.terms).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.n:
                raise DomainError(f"exponent {alpha} does not have {self.n} entries")
            if any(a < 0 for a in alpha):
                raise DomainError(f"negative exponent in {alpha}")
            if coef != 0.0:
                clean[alpha] = clean.get(alpha, 0.0) + float(coef)
        self.terms = {a: c for a, c in clean.items() if c != 0.0}

    @classmethod
    def constant(cls, n: int, value: float) -> Polynomial:
        return cls(n, {(0,) * n: value})

    @classmethod
    def variable(cls, n: int, i: int) -> Polynomial:
        alpha = [0] * n
        alpha[i] = 1
        return cls(n, {tuple(alpha): 1.0})

    @classmethod
    def from_vector(cls, basis: Sequence[MultiIndex], coefs: Iterable[float]) -> Polynomial:
        basis = list(basis)
        return cls(len(basis[0]), dict(zip(basis, coefs)))

    @property
    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(a) for a in self.terms)

    def __call__(self, x: Sequence[float]) -> float:
        x = np.asarray(x, dtype=float)
        return float(sum(c * np.prod(x ** np.array(a)) for a, c in self.terms.items()))

    def evaluate_many(self, points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(np.asarray(points, dtype=float))
        out = np.zeros(points.shape[0])
        for a, c in self.terms.items():
            out += c * np.prod(points ** np.array(a), axis=1)
        return out

    def coefficient_vector(self, basis: Sequence[MultiIndex]) -> np.ndarray:
        index = {a: i for i, a in enumerate(basis)}
        vec = np.zeros(len(index))
        for a, c in self.terms.items():
            if a not in index:
                raise DomainError(f"monomial {a} is outside the supplied basis")
            vec[index[a]] = c
        return vec

    def embed(self, n_total: int, offset: int) -> Polynomial:
        """Re-index into a larger variable set, occupying ``offset..offset+n``."""
        pad = n_total - offset - self.n
        if pad < 0:
            raise DomainError("embedding does not fit")
        return Polynomial(
            n_total, {(0,) * offset + a + (0,) * pad: c for a, c in self.terms.items()}
        )

    def __add__(self, other: Polynomial | float) -> Polynomial:
        other = self._coerce(other)
        terms = dict(self.terms)
        for a, c in other.terms.items():
            terms[a] = terms.get(a, 0.0) + c
        return Polynomial(self.n, terms)

    __radd__ = __add__

    def __neg__(self) -> Polynomial:
        return Polynomial(self.n, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other: Polynomial | float) -> Polynomial:
        return self + (-self._coerce(other))

    def __rsub__(self, other: float) -> Polynomial:
        return self._coerce(other) - self

    def __mul__(self, other: Polynomial | float) -> Polynomial:
        if not isinstance(other, Polynomial):
            return Polynomial(self.n, {a: c * float(other) for a, c in self.terms.items()})
        if other.n != self.n:
            raise DomainError("variable counts differ")
        terms: dict[MultiIndex, float] = {}
        for a, c in self.terms.items():
            for b, d in other.terms.items():
                key = _add_index(a, b)
                terms[key] = terms.get(key, 0.0) + c * d
        return Polynomial(self.n, terms)

    __rmul__ = __mul__

    def _coerce(self, other: Polynomial | float) -> Polynomial:
        if isinstance(other, Polynomial):
            if other.n != self.n:
                raise DomainError("variable counts differ")
            return other
        return Polynomial.constant(self.n, float(other))

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "terms": [{"alpha": list(a), "coef": c} for a, c in sorted(self.terms.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Polynomial:
        return cls(int(data["n"]), {tuple(t["alpha"]): float(t["coef"]) for t in data["terms"]})
