from __future__ import annotations

import numpy as np
import pytest

from momentsep.errors import DomainError
from momentsep.polynomial import Polynomial, Relation
from momentsep.quantum import PartitionSpec
from momentsep.semialgebraic import (SemialgebraicSet, constraint_violation, for_partition,
                                     from_local_constraints, membership, product, unit_ball, unit_sphere)


def test_unit_sphere_membership():
    k = unit_sphere()
    assert k.n == 3 and k.d0 == 1
    assert membership([0, 0, 1], k)
    assert not membership([0, 0, 0], k)
    assert membership(np.full(3, 1 / np.sqrt(3)), k, tol=1e-12)


def test_local_qubit_sets():
    assert from_local_constraints(2, pure=True).constraints == unit_sphere().constraints
    ball = from_local_constraints(2, pure=False)
    assert ball.constraints == unit_ball(3).constraints
    assert membership([0, 0, 0], ball) and not membership([1, 1, 0], ball)


def test_qutrit_body():
    k = from_local_constraints(3, pure=False)
    assert k.n == 8 and len(k.constraints) == 2
    assert k.d0 == 2
    assert membership(np.zeros(8), k)


def test_products():
    s = unit_sphere()
    ss = product([s, s])
    assert ss.n == 6 and len(ss.equalities) == 2
    assert product([s]) is s
    bs = product([unit_ball(3), s])
    assert membership([0, 0, 0, 0, 0, 1], bs)
    assert not membership([0, 0, 0, 0, 0, 0.5], bs)
    with pytest.raises(DomainError):
        product([])


def test_for_partition_uses_one_block_per_class():
    spec = PartitionSpec((2, 2, 3), ((0, 1), (2,)), (True, False))
    k = for_partition(spec)
    assert k.n == 3 + 8
    assert [rel for _, rel in k.constraints] == [Relation.EQ, Relation.GEQ, Relation.GEQ]


def test_validation():
    with pytest.raises(DomainError):
        SemialgebraicSet(3, ((Polynomial.constant(3, 1.0), Relation.GEQ),))
    with pytest.raises(DomainError):
        SemialgebraicSet(2, ((Polynomial.variable(3, 0), Relation.GEQ),))
    with pytest.raises(DomainError):
        membership([0, 1], unit_sphere())


def test_violation_and_json():
    k = product([unit_ball(3), unit_sphere()])
    assert constraint_violation([0, 0, 0, 0, 0, 1], k) == 0.0
    assert constraint_violation([2, 0, 0, 0, 0, 1], k) == pytest.approx(3.0)
    assert SemialgebraicSet.from_json(k.to_json()) == k
