"""Truncated moment sequences, moment and localizing matrices, flatness."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DomainError, IncompleteTmsError, IntegrityError
from .polynomial import MultiIndex, Polynomial
from .quantum import PartitionSpec, StateTensor

RANK_TOL = 1e-6


@lru_cache(maxsize=256)
def _basis(n: int, k: int) -> tuple[MultiIndex, ...]:
    out = []
    for degree in range(k + 1):
        for combo in itertools.combinations_with_replacement(range(n), degree):
            alpha = [0] * n
            for i in combo:
                alpha[i] += 1
            out.append(tuple(alpha))
    return tuple(out)


def monomial_basis(n: int, k: int) -> list[MultiIndex]:
    """Exponents of all monomials of degree <= k in degree-lexicographic order.

    Within a degree, ``x1`` ranks above ``x2`` and so on, giving
    ``1, x1, x2, x3, x1^2, x1 x2, ...`` for ``n = 3``.
    """
    if n < 1 or k < 0:
        raise DomainError("need n >= 1 and k >= 0")
    return list(_basis(n, k))


@lru_cache(maxsize=256)
def monomial_index(n: int, k: int) -> dict[MultiIndex, int]:
    return {alpha: i for i, alpha in enumerate(_basis(n, k))}


def basis_size(n: int, k: int) -> int:
    return math.comb(n + k, k)


def add_index(a: MultiIndex, b: MultiIndex) -> MultiIndex:
    return tuple(i + j for i, j in zip(a, b))


@dataclass
class Tms:
    """A truncated moment sequence ``y_alpha`` on the support ``values.keys()``."""

    n: int
    degree: int
    values: dict[MultiIndex, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        clean = {}
        for alpha, v in dict(self.values).items():
            alpha = tuple(int(a) for a in alpha)
            if len(alpha) != self.n:
                raise DomainError(f"multi-index {alpha} does not have {self.n} entries")
            if sum(alpha) > self.degree:
                raise DomainError(f"multi-index {alpha} exceeds degree {self.degree}")
            clean[alpha] = float(v)
        self.values = clean

    @property
    def support(self) -> frozenset[MultiIndex]:
        return frozenset(self.values)

    def __getitem__(self, alpha: MultiIndex) -> float:
        try:
            return self.values[tuple(alpha)]
        except KeyError:
            raise IncompleteTmsError(f"moment {tuple(alpha)} is not available") from None

    def __contains__(self, alpha: MultiIndex) -> bool:
        return tuple(alpha) in self.values

    def restrict(self, support: Iterable[MultiIndex]) -> Tms:
        keep = {tuple(a) for a in support}
        return Tms(self.n, self.degree, {a: v for a, v in self.values.items() if a in keep})

    def is_complete(self) -> bool:
        return len(self.values) == basis_size(self.n, self.degree)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "degree": self.degree,
            "moments": [{"alpha": list(a), "value": v} for a, v in sorted(self.values.items())],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> Tms:
        return cls(
            int(data["n"]),
            int(data["degree"]),
            {tuple(m["alpha"]): float(m["value"]) for m in data["moments"]},
        )


def tms_from_atoms(points: np.ndarray, weights: Sequence[float], degree: int,
                   support: Iterable[MultiIndex] | None = None) -> Tms:
    """Moments ``y_alpha = sum_j w_j x_j^alpha`` of a finitely atomic measure."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    weights = np.asarray(weights, dtype=float)
    n = points.shape[1]
    alphas = list(support) if support is not None else monomial_basis(n, degree)
    values = vandermonde(points, alphas).T @ weights
    return Tms(n, degree, dict(zip(map(tuple, alphas), values)))


def vandermonde(points: np.ndarray, alphas: Sequence[MultiIndex]) -> np.ndarray:
    """Matrix ``V[j, i] = x_j^{alpha_i}``."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    exps = np.array(alphas, dtype=int).reshape(len(alphas), points.shape[1])
    return np.prod(points[:, None, :] ** exps[None, :, :], axis=2)


# --------------------------------------------------------------------------
# From quantum coordinates


def mu_to_alpha(mu: Sequence[int], spec: PartitionSpec) -> MultiIndex:
    """Exponent of the monomial ``x^{(1)}_{mu_1} ... x^{(p)}_{mu_p}`` (with ``x_0 = 1``).

    Parties in one symmetry class share a variable block, so their
    occurrences add up.
    """
    if len(mu) != spec.n_parties:
        raise DomainError(f"need {spec.n_parties} indices, got {len(mu)}")
    offsets = spec.class_offsets()
    alpha = [0] * spec.n_vars
    for party, m in enumerate(mu):
        ci = spec.class_of(party)
        if not 0 <= m <= spec.class_t(ci):
            raise DomainError(f"index {m} out of range for party {party}")
        if m:
            alpha[offsets[ci] + m - 1] += 1
    return tuple(alpha)


def _alpha_table(spec: PartitionSpec) -> tuple[np.ndarray, np.ndarray]:
    shape = tuple(spec.class_t(spec.class_of(i)) + 1 for i in range(spec.n_parties))
    mus = np.indices(shape).reshape(len(shape), -1).T
    offsets = spec.class_offsets()
    alphas = np.zeros((mus.shape[0], spec.n_vars + 1), dtype=int)
    for party in range(spec.n_parties):
        ci = spec.class_of(party)
        col = np.where(mus[:, party] > 0, offsets[ci] + mus[:, party] - 1, spec.n_vars)
        np.add.at(alphas, (np.arange(mus.shape[0]), col), 1)
    return mus, alphas[:, :-1]


def tensor_to_tms(x: StateTensor, tol: float = 1e-9) -> Tms:
    """Relabel tensor coordinates as moments ``y_alpha``.

    Coordinates mapping to the same multi-index must agree; otherwise the
    tensor is not compatible with the partition's symmetry.
    """
    spec = x.partition
    _, alphas = _alpha_table(spec)
    flat = np.asarray(x.coords).ravel()
    uniq, inverse = np.unique(alphas, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    lo = np.full(len(uniq), np.inf)
    hi = np.full(len(uniq), -np.inf)
    np.minimum.at(lo, inverse, flat)
    np.maximum.at(hi, inverse, flat)
    spread = hi - lo
    if np.any(spread > tol * np.maximum(1.0, np.abs(hi))):
        bad = tuple(uniq[int(np.argmax(spread))])
        raise IntegrityError(f"coordinates mapping to {bad} disagree (spread {spread.max():.3g})")
    values = {tuple(int(a) for a in row): float(v) for row, v in zip(uniq, lo)}
    if spec.known_support is not None:
        values = {a: v for a, v in values.items() if a in spec.known_support}
    return Tms(spec.n_vars, spec.degree, values)


def admissible_support(spec: PartitionSpec) -> frozenset[MultiIndex]:
    """All multi-indices reachable from some index tuple of the partition."""
    _, alphas = _alpha_table(spec)
    return frozenset(tuple(int(a) for a in row) for row in np.unique(alphas, axis=0))


def local_support(spec: PartitionSpec) -> frozenset[MultiIndex]:
    """Multi-indices of single-party expectation values (plus normalization)."""
    return frozenset(a for a in admissible_support(spec) if sum(a) <= 1)


# --------------------------------------------------------------------------
# Moment and localizing matrices


def moment_matrix(z: Tms, k: int) -> np.ndarray:
    """``M_k(z)[alpha, beta] = z_{alpha+beta}`` over :func:`monomial_basis` ``(n, k)``."""
    if k < 0 or 2 * k > z.degree:
        raise DomainError(f"order {k} needs degree >= {2 * k}, tms has {z.degree}")
    basis = _basis(z.n, k)
    size = len(basis)
    out = np.empty((size, size))
    for i, a in enumerate(basis):
        for j in range(i, size):
            out[i, j] = out[j, i] = z[add_index(a, basis[j])]
    return out


def shifted_tms(g: Polynomial, z: Tms) -> Tms:
    """``(g * z)_alpha = sum_gamma g_gamma z_{alpha+gamma}`` for ``|alpha| <= d - deg g``."""
    if g.n != z.n:
        raise DomainError("polynomial and tms have different variable counts")
    if g.degree < 1:
        raise DomainError("shifting needs a polynomial of degree >= 1")
    if g.degree > z.degree:
        raise DomainError("polynomial degree exceeds tms degree")
    degree = z.degree - g.degree
    values = {}
    for alpha in _basis(z.n, degree):
        values[alpha] = sum(c * z[add_index(alpha, gamma)] for gamma, c in g.terms.items())
    return Tms(z.n, degree, values)


def localizing_order(g: Polynomial) -> int:
    """``d_g = ceil(deg g / 2)``."""
    return (g.degree + 1) // 2


def localizing_matrix(g: Polynomial, z: Tms, k: int) -> np.ndarray:
    """The order-``k`` localizing matrix ``M_{k-d_g}(g * z)``."""
    dg = localizing_order(g)
    if not dg <= k or 2 * k > z.degree:
        raise DomainError(f"need d_g={dg} <= k={k} <= degree/2={z.degree / 2}")
    basis = _basis(z.n, k - dg)
    size = len(basis)
    out = np.empty((size, size))
    for i, a in enumerate(basis):
        for j in range(i, size):
            ab = add_index(a, basis[j])
            out[i, j] = out[j, i] = sum(c * z[add_index(ab, gamma)] for gamma, c in g.terms.items())
    return out


def numerical_rank(m: np.ndarray, tol: float = RANK_TOL) -> int:
    """Number of singular values above ``tol * max(sigma_max, 1)``."""
    m = np.asarray(m)
    if m.size == 0:
        return 0
    s = np.linalg.svd(m, compute_uv=False)
    return int(np.sum(s > tol * max(float(s[0]), 1.0)))


def flatness_ranks(z: Tms, k: int, d0: int, tol: float = RANK_TOL) -> tuple[int, int]:
    if k - d0 < 0:
        raise DomainError("need k >= d0")
    return numerical_rank(moment_matrix(z, k), tol), numerical_rank(moment_matrix(z, k - d0), tol)


def flatness_check(z: Tms, k: int, d0: int, tol: float = RANK_TOL) -> bool:
    """``rank M_k(z) == rank M_{k-d0}(z)`` at the given relative tolerance."""
    high, low = flatness_ranks(z, k, d0, tol)
    return high == low
