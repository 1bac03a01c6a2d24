"""Compact semialgebraic sets ``K = {x : g_i(x) >= 0 or = 0}``."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import DomainError
from .polynomial import Polynomial, Relation
from .quantum import PartitionSpec, local_constraint_polynomials

MEMBERSHIP_TOL = 1e-6


@dataclass(frozen=True)
class SemialgebraicSet:
    n: int
    constraints: tuple[tuple[Polynomial, Relation], ...]

    def __post_init__(self) -> None:
        cons = tuple((g, Relation(rel)) for g, rel in self.constraints)
        for g, _ in cons:
            if g.n != self.n:
                raise DomainError("constraint has the wrong number of variables")
            if g.degree < 1:
                raise DomainError("constraints must have degree >= 1")
        object.__setattr__(self, "constraints", cons)

    @property
    def inequalities(self) -> list[Polynomial]:
        return [g for g, rel in self.constraints if rel is Relation.GEQ]

    @property
    def equalities(self) -> list[Polynomial]:
        return [g for g, rel in self.constraints if rel is Relation.EQ]

    @property
    def d0(self) -> int:
        """``max(1, ceil(deg g_i / 2))`` over all constraints."""
        return max([1] + [(g.degree + 1) // 2 for g, _ in self.constraints])

    def contains(self, x: Sequence[float], tol: float = MEMBERSHIP_TOL) -> bool:
        return membership(x, self, tol)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "constraints": [{"poly": g.to_json(), "relation": rel.value} for g, rel in self.constraints],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> SemialgebraicSet:
        return cls(
            int(data["n"]),
            tuple((Polynomial.from_json(c["poly"]), Relation(c["relation"])) for c in data["constraints"]),
        )


def unit_sphere(n: int = 3) -> SemialgebraicSet:
    g = Polynomial(n, {(0,) * n: -1.0})
    for i in range(n):
        g = g + Polynomial.variable(n, i) * Polynomial.variable(n, i)
    return SemialgebraicSet(n, ((g, Relation.EQ),))


def unit_ball(n: int = 3) -> SemialgebraicSet:
    g, _ = unit_sphere(n).constraints[0]
    return SemialgebraicSet(n, ((-g, Relation.GEQ),))


def from_local_constraints(dim: int, pure: bool) -> SemialgebraicSet:
    if dim < 2:
        raise DomainError("local dimension must be at least 2")
    return SemialgebraicSet(dim * dim - 1, tuple(local_constraint_polynomials(dim, pure)))


def product(sets: Sequence[SemialgebraicSet]) -> SemialgebraicSet:
    """Cartesian product; each factor keeps its own block of variables."""
    if not sets:
        raise DomainError("product of an empty list")
    if len(sets) == 1:
        return sets[0]
    n = sum(s.n for s in sets)
    cons, offset = [], 0
    for s in sets:
        cons.extend((g.embed(n, offset), rel) for g, rel in s.constraints)
        offset += s.n
    return SemialgebraicSet(n, tuple(cons))


def for_partition(spec: PartitionSpec) -> SemialgebraicSet:
    """The product of local state bodies, one per symmetry class."""
    return product([
        from_local_constraints(spec.class_dim(ci), spec.purity_flags[ci])
        for ci in range(len(spec.symmetry_classes))
    ])


def membership(x: Sequence[float], k: SemialgebraicSet, tol: float = MEMBERSHIP_TOL) -> bool:
    x = np.asarray(x, dtype=float)
    if x.shape != (k.n,):
        raise DomainError(f"point has {x.size} coordinates, set lives in R^{k.n}")
    for g, rel in k.constraints:
        v = g(x)
        if rel is Relation.GEQ and v < -tol:
            return False
        if rel is Relation.EQ and abs(v) > tol:
            return False
    return True


def constraint_violation(x: Sequence[float], k: SemialgebraicSet) -> float:
    """Largest violation over all constraints (0 when inside)."""
    x = np.asarray(x, dtype=float)
    worst = 0.0
    for g, rel in k.constraints:
        v = g(x)
        worst = max(worst, abs(v) if rel is Relation.EQ else max(0.0, -v))
    return worst
