from __future__ import annotations

import sys

import numpy as np
import pytest

from momentsep.quantum import DensityMatrix, PartitionSpec, dicke_state, state_to_tensor, symmetric_projector
from momentsep.tms import Tms, tensor_to_tms


def sym_tms(rho: DensityMatrix) -> Tms:
    n = len(rho.dims)
    return tensor_to_tms(state_to_tensor(rho, PartitionSpec.symmetric(n)))


def dicke(n: int, zeros: int = 1) -> DensityMatrix:
    return DensityMatrix.from_vector(dicke_state(n, zeros), (2,) * n)


def maximally_mixed_symmetric(n: int) -> DensityMatrix:
    p = symmetric_projector(n)
    return DensityMatrix(p / np.trace(p).real, (2,) * n)


def random_sphere_points(rng: np.random.Generator, r: int, n: int = 3) -> np.ndarray:
    pts = rng.standard_normal((r, n))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


TETRAHEDRON = np.array([
    [0.0, 0.0, 1.0],
    [2 * np.sqrt(2) / 3, 0.0, -1 / 3],
    [-np.sqrt(2) / 3, np.sqrt(2 / 3), -1 / 3],
    [-np.sqrt(2) / 3, -np.sqrt(2 / 3), -1 / 3],
])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for i, (ok, detail) in sorted(mod.RESULTS.items()):
        terminalreporter.write_line(mod.report_line(i, ok, detail))
