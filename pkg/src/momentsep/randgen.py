"""Seeded random states for experiments and tests.

All generators draw from a :class:`numpy.random.Generator` backed by the
counter-based Philox bit generator, so a seed reproduces the same stream on
every platform.
"""
from __future__ import annotations

import numpy as np

from .errors import DomainError
from .quantum import DensityMatrix, PartitionSpec, product_state, symmetric_basis


def make_rng(seed: int | np.random.Generator | None = 0) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(seed))


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def haar_random_state(dim: int, rank: int | None = None, rng=None,
                      dims: tuple[int, ...] | None = None) -> DensityMatrix:
    """``G G^dag / tr(G G^dag)`` for a ``dim x rank`` Ginibre matrix ``G``."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise DomainError(f"rank must lie in [1, {dim}]")
    g = ginibre(make_rng(rng), dim, rank)
    rho = g @ g.conj().T
    return DensityMatrix(rho / np.trace(rho).real, dims or (dim,))


def haar_random_symmetric_state(n_qubits: int, rank: int | None = None, rng=None) -> DensityMatrix:
    """A Ginibre-random state on the symmetric subspace of ``n_qubits`` qubits."""
    sym_dim = n_qubits + 1
    local = haar_random_state(sym_dim, rank, rng).matrix
    basis = symmetric_basis(n_qubits)
    rho = basis @ local @ basis.T
    return DensityMatrix((rho + rho.conj().T) / 2, (2,) * n_qubits)


def random_bloch_vector(rng=None) -> np.ndarray:
    v = make_rng(rng).standard_normal(3)
    return v / np.linalg.norm(v)


def qubit_ket(n: np.ndarray) -> np.ndarray:
    """Pure qubit state with Bloch vector ``n``."""
    theta = np.arccos(np.clip(n[2], -1.0, 1.0))
    phi = np.arctan2(n[1], n[0])
    return np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])


def default_mixture_size(n_qubits: int) -> int:
    return 25 if n_qubits <= 6 else 45


def random_separable_atoms(m: int, rng=None) -> tuple[np.ndarray, np.ndarray]:
    """``m`` uniform Bloch vectors with flat-Dirichlet weights."""
    if m < 1:
        raise DomainError("need at least one component")
    rng = make_rng(rng)
    weights = rng.exponential(size=m)
    points = np.array([random_bloch_vector(rng) for _ in range(m)])
    return weights / weights.sum(), points


def coherent_mixture(weights: np.ndarray, points: np.ndarray, n_qubits: int) -> DensityMatrix:
    """``sum_j w_j (|n_j><n_j|)^{x N}``."""
    dim = 2**n_qubits
    rho = np.zeros((dim, dim), dtype=complex)
    for w, n in zip(weights, points):
        ket = qubit_ket(n)
        psi = ket
        for _ in range(n_qubits - 1):
            psi = np.kron(psi, ket)
        rho += w * np.outer(psi, psi.conj())
    rho /= np.trace(rho).real
    return DensityMatrix((rho + rho.conj().T) / 2, (2,) * n_qubits)


def random_separable_symmetric(n_qubits: int, m: int | None = None, rng=None) -> DensityMatrix:
    m = default_mixture_size(n_qubits) if m is None else m
    weights, points = random_separable_atoms(m, rng)
    return coherent_mixture(weights, points, n_qubits)


def random_product_state(spec: PartitionSpec, rng=None) -> DensityMatrix:
    """Independent Haar local states, pure for pure classes.

    Parties of one symmetry class share the same pure local state so that the
    product stays on the symmetric subspace.
    """
    rng = make_rng(rng)
    local = {}
    for ci, cls in enumerate(spec.symmetry_classes):
        dim = spec.class_dim(ci)
        if spec.purity_flags[ci] or len(cls) > 1:
            local[ci] = haar_random_state(dim, 1, rng).matrix
        else:
            local[ci] = haar_random_state(dim, dim, rng).matrix
    mats = [local[spec.class_of(i)] for i in range(spec.n_parties)]
    return DensityMatrix(product_state(mats), spec.parties)
