"""Quantum-state representations: operator bases, symmetric subspaces,
tensor coordinates, partial transposition and local positivity constraints.

Conventions
-----------
Every local basis satisfies ``tr(S_mu S_nu) = d * delta_{mu nu}`` with
``S_0 = I``.  A state on parties of dimensions ``d_1..d_p`` is expanded as

    rho = prod_i (1/d_i) * sum_mu X_{mu_1..mu_p} S_{mu_1} x ... x S_{mu_p}

so that ``X_{mu} = tr(rho S_{mu_1} x ... x S_{mu_p})`` and ``X_{0..0} = tr rho``.
For qubits this is the Pauli expansion with prefactor ``1/2^N``.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError
from .polynomial import MultiIndex, Polynomial, Relation

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
STATE_PSD_TOL = -1e-10
PSD_TOL = 1e-9


def is_psd(matrix: np.ndarray, tol: float = PSD_TOL) -> bool:
    """Scale-aware PSD test: ``lambda_min >= -tol * max(1, ||M||_2)``."""
    return psd_margin(matrix, tol) >= 0.0


def psd_margin(matrix: np.ndarray, tol: float = PSD_TOL) -> float:
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0.0
    eig = np.linalg.eigvalsh((matrix + matrix.conj().T) / 2)
    scale = max(1.0, float(np.max(np.abs(eig))))
    return float(eig[0] + tol * scale)


@dataclass(frozen=True)
class DensityMatrix:
    """A Hermitian unit-trace matrix on ``H_1 x ... x H_p``.

    ``check_psd=False`` admits Hermitian unit-trace operators that are not
    positive, which is what :func:`tensor_to_state` may legitimately return.
    """

    matrix: np.ndarray
    dims: tuple[int, ...]
    check_psd: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        dims = tuple(int(d) for d in self.dims)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError("density matrix must be square")
        if math.prod(dims) != m.shape[0]:
            raise DomainError(f"factor dims {dims} do not multiply to {m.shape[0]}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > HERMITIAN_TOL * max(1.0, np.abs(m).max()):
            raise DomainError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1.0) > TRACE_TOL * 10 * m.shape[0]:
            raise DomainError(f"density matrix trace is {np.trace(m).real}, expected 1")
        m = (m + m.conj().T) / 2
        if self.check_psd and np.linalg.eigvalsh(m)[0] < STATE_PSD_TOL:
            raise DomainError("density matrix is not positive semidefinite")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_vector(cls, psi: np.ndarray, dims: Sequence[int]) -> DensityMatrix:
        psi = np.asarray(psi, dtype=complex).ravel()
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()), tuple(dims))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigvalsh(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


@dataclass(frozen=True)
class LocalBasis:
    dim: int
    ops: tuple[np.ndarray, ...]

    @property
    def t(self) -> int:
        return len(self.ops) - 1

    def stack(self) -> np.ndarray:
        return np.array(self.ops)


@dataclass(frozen=True)
class PartitionSpec:
    """How a Hilbert space is split into parties and which parties share variables.

    ``symmetry_classes`` partitions the party indices (0-based).  Parties in
    one class are identified: the state is assumed to live on their symmetric
    subspace and they share a single block of local variables.
    ``purity_flags`` has one entry per class: ``True`` restricts atoms to pure
    local states, ``False`` to mixed ones.  ``known_support`` optionally lists
    the multi-indices whose moments are known.
    """

    parties: tuple[int, ...]
    symmetry_classes: tuple[tuple[int, ...], ...] | None = None
    purity_flags: tuple[bool, ...] | None = None
    known_support: frozenset[MultiIndex] | None = None

    def __post_init__(self) -> None:
        parties = tuple(int(d) for d in self.parties)
        if not parties or any(d < 2 for d in parties):
            raise DomainError("every party needs local dimension >= 2")
        classes = self.symmetry_classes
        if classes is None:
            classes = tuple((i,) for i in range(len(parties)))
        classes = tuple(tuple(sorted(int(i) for i in c)) for c in classes)
        flat = sorted(i for c in classes for i in c)
        if flat != list(range(len(parties))) or any(not c for c in classes):
            raise DomainError("symmetry classes must partition the party list")
        classes = tuple(sorted(classes, key=lambda c: c[0]))
        for c in classes:
            if len({parties[i] for i in c}) != 1:
                raise DomainError("identified parties must have equal local dimension")
        flags = self.purity_flags
        if flags is None:
            flags = tuple(parties[c[0]] == 2 for c in classes)
        flags = tuple(bool(f) for f in flags)
        if len(flags) != len(classes):
            raise DomainError("need one purity flag per symmetry class")
        support = self.known_support
        if support is not None:
            support = frozenset(tuple(int(a) for a in alpha) for alpha in support)
        object.__setattr__(self, "parties", parties)
        object.__setattr__(self, "symmetry_classes", classes)
        object.__setattr__(self, "purity_flags", flags)
        object.__setattr__(self, "known_support", support)

    @classmethod
    def symmetric(cls, n_parties: int, dim: int = 2, pure: bool = True) -> PartitionSpec:
        return cls((dim,) * n_parties, (tuple(range(n_parties)),), (pure,))

    @classmethod
    def product(cls, dims: Sequence[int], pure: bool | Sequence[bool] | None = None) -> PartitionSpec:
        if isinstance(pure, bool):
            pure = (pure,) * len(dims)
        return cls(tuple(dims), None, None if pure is None else tuple(pure))

    @property
    def n_parties(self) -> int:
        return len(self.parties)

    @property
    def dim(self) -> int:
        return math.prod(self.parties)

    @property
    def degree(self) -> int:
        return len(self.parties)

    @property
    def is_fully_symmetric(self) -> bool:
        return len(self.symmetry_classes) == 1 and len(self.parties) > 1

    @property
    def has_symmetry(self) -> bool:
        return any(len(c) > 1 for c in self.symmetry_classes)

    def class_of(self, party: int) -> int:
        for ci, c in enumerate(self.symmetry_classes):
            if party in c:
                return ci
        raise DomainError(f"party {party} not in partition")

    def class_dim(self, ci: int) -> int:
        return self.parties[self.symmetry_classes[ci][0]]

    def class_t(self, ci: int) -> int:
        return self.class_dim(ci) ** 2 - 1

    def class_offsets(self) -> list[int]:
        offsets, acc = [], 0
        for ci in range(len(self.symmetry_classes)):
            offsets.append(acc)
            acc += self.class_t(ci)
        return offsets

    @property
    def n_vars(self) -> int:
        return sum(self.class_t(ci) for ci in range(len(self.symmetry_classes)))

    def with_support(self, support: Iterable[MultiIndex] | None) -> PartitionSpec:
        return PartitionSpec(
            self.parties,
            self.symmetry_classes,
            self.purity_flags,
            None if support is None else frozenset(support),
        )

    def to_json(self) -> dict:
        out = {
            "parties": list(self.parties),
            "symmetry_classes": [list(c) for c in self.symmetry_classes],
            "purity_flags": list(self.purity_flags),
        }
        if self.known_support is not None:
            out["known_support"] = [list(a) for a in sorted(self.known_support)]
        return out

    @classmethod
    def from_json(cls, data: dict) -> PartitionSpec:
        support = data.get("known_support")
        return cls(
            tuple(data["parties"]),
            tuple(tuple(c) for c in data["symmetry_classes"]) if data.get("symmetry_classes") else None,
            tuple(data["purity_flags"]) if data.get("purity_flags") is not None else None,
            None if support is None else frozenset(tuple(a) for a in support),
        )


@dataclass(frozen=True)
class StateTensor:
    """Real coordinates ``X[mu_1, ..., mu_p]`` of a state in the local bases.

    ``projected`` records that the input state had weight outside the
    symmetric subspace required by the partition and was projected.
    """

    partition: PartitionSpec
    coords: np.ndarray
    projected: bool = False

    def __post_init__(self) -> None:
        coords = np.array(self.coords, dtype=float)
        expected = tuple(self.partition.class_t(self.partition.class_of(i)) + 1
                         for i in range(self.partition.n_parties))
        if coords.shape != expected:
            raise DomainError(f"coordinate array has shape {coords.shape}, expected {expected}")
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)

    def __getitem__(self, mu: tuple[int, ...]) -> float:
        return float(self.coords[tuple(mu)])

    def items(self) -> Iterable[tuple[tuple[int, ...], float]]:
        for mu in np.ndindex(*self.coords.shape):
            yield mu, float(self.coords[mu])


# --------------------------------------------------------------------------
# Symmetric subspace


def dicke_state(n_qubits: int, zeros: int) -> np.ndarray:
    """Normalized Dicke state with ``zeros`` qubits in |0> (qubit 0 is the leftmost factor)."""
    if n_qubits < 1 or not 0 <= zeros <= n_qubits:
        raise DomainError(f"need 0 <= k <= N, got N={n_qubits}, k={zeros}")
    psi = np.zeros(2**n_qubits)
    for ones in itertools.combinations(range(n_qubits), n_qubits - zeros):
        psi[sum(1 << (n_qubits - 1 - q) for q in ones)] = 1.0
    return psi / math.sqrt(math.comb(n_qubits, zeros))


def symmetric_projector(n_qubits: int) -> np.ndarray:
    if n_qubits < 1:
        raise DomainError("need at least one qubit")
    return _symmetric_projector(n_qubits, 2).copy()


@lru_cache(maxsize=32)
def _symmetric_projector(n_sites: int, dim: int) -> np.ndarray:
    if dim == 2:
        basis = [dicke_state(n_sites, k) for k in range(n_sites + 1)]
    else:
        basis = []
        for occ in itertools.combinations_with_replacement(range(dim), n_sites):
            vec = np.zeros(dim**n_sites)
            for perm in set(itertools.permutations(occ)):
                vec[np.ravel_multi_index(perm, (dim,) * n_sites)] = 1.0
            basis.append(vec / np.linalg.norm(vec))
    b = np.array(basis).T
    p = b @ b.T
    p.setflags(write=False)
    return p


def symmetric_basis(n_sites: int, dim: int = 2) -> np.ndarray:
    """Orthonormal basis of the symmetric subspace as columns (Dicke order for qubits)."""
    if dim == 2:
        return np.array([dicke_state(n_sites, k) for k in range(n_sites + 1)]).T
    w, v = np.linalg.eigh(_symmetric_projector(n_sites, dim))
    return v[:, w > 0.5]


def embed_operator(op: np.ndarray, sites: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    """Lift an operator on the factors ``sites`` to the full tensor product."""
    dims = list(dims)
    sites = list(sites)
    rest = [i for i in range(len(dims)) if i not in sites]
    d_rest = math.prod(dims[i] for i in rest) if rest else 1
    full = np.kron(op, np.eye(d_rest))
    order = sites + rest
    p = len(dims)
    shape = [dims[i] for i in order]
    t = full.reshape(shape + shape)
    inv = np.argsort(order)
    t = t.transpose(list(inv) + [p + i for i in inv])
    return t.reshape(math.prod(dims), math.prod(dims))


def partition_projector(spec: PartitionSpec) -> np.ndarray | None:
    """Projector onto the subspace symmetric within every class, or ``None`` if trivial."""
    if not spec.has_symmetry:
        return None
    proj = np.eye(spec.dim)
    for c in spec.symmetry_classes:
        if len(c) > 1:
            proj = proj @ embed_operator(
                _symmetric_projector(len(c), spec.parties[c[0]]), c, spec.parties
            )
    return proj


# --------------------------------------------------------------------------
# Local operator bases


def gell_mann_matrices(dim: int) -> list[np.ndarray]:
    """Generalized Gell-Mann matrices: symmetric, antisymmetric, then diagonal."""
    sym, anti, diag = [], [], []
    for j in range(dim):
        for k in range(j + 1, dim):
            m = np.zeros((dim, dim), dtype=complex)
            m[j, k] = m[k, j] = 1.0
            sym.append(m)
            m = np.zeros((dim, dim), dtype=complex)
            m[j, k] = -1j
            m[k, j] = 1j
            anti.append(m)
    for l in range(1, dim):
        m = np.zeros((dim, dim), dtype=complex)
        m[np.arange(l), np.arange(l)] = 1.0
        m[l, l] = -l
        diag.append(m * math.sqrt(2.0 / (l * (l + 1))))
    return sym + anti + diag


@lru_cache(maxsize=16)
def standard_basis(dim: int) -> LocalBasis:
    """Identity plus generalized Gell-Mann matrices scaled to ``tr(S_a S_b) = dim delta_ab``.

    For ``dim = 2`` this is exactly ``{I, sigma_x, sigma_y, sigma_z}``.
    """
    if dim < 2:
        raise DomainError("local dimension must be at least 2")
    scale = math.sqrt(dim / 2.0)
    ops = [np.eye(dim, dtype=complex)] + [scale * g for g in gell_mann_matrices(dim)]
    for op in ops:
        op.setflags(write=False)
    return LocalBasis(dim, tuple(ops))


def _party_bases(spec: PartitionSpec) -> list[np.ndarray]:
    return [standard_basis(d).stack() for d in spec.parties]


# --------------------------------------------------------------------------
# Tensor coordinates


def state_to_tensor(rho: DensityMatrix, spec: PartitionSpec) -> StateTensor:
    """Coordinates ``X_mu = tr(rho P S_mu P)`` in the partition's local bases.

    When the partition identifies parties, a state with weight outside the
    symmetric subspace is projected and renormalized; a ``UserWarning`` is
    emitted and the result carries ``projected=True``.
    """
    if tuple(rho.dims) != spec.parties:
        raise DomainError(f"state factors {rho.dims} do not match partition {spec.parties}")
    m = np.asarray(rho.matrix)
    projected = False
    proj = partition_projector(spec)
    if proj is not None:
        pm = proj @ m @ proj
        if np.max(np.abs(pm - m)) > 1e-10:
            projected = True
            weight = np.trace(pm).real
            if weight <= 1e-12:
                raise DomainError("state has no weight on the symmetric subspace")
            warnings.warn(
                "state is not supported on the symmetric subspace; projecting", UserWarning,
                stacklevel=2,
            )
            m = pm / weight
    coords = _expectations(m, spec.parties, _party_bases(spec))
    return StateTensor(spec, coords, projected)


def _expectations(m: np.ndarray, dims: Sequence[int], bases: Sequence[np.ndarray]) -> np.ndarray:
    p = len(dims)
    t = m.reshape(tuple(dims) * 2)
    for i in range(p):
        rem = p - i
        # current axes: mu_0..mu_{i-1}, a_i..a_{p-1}, b_i..b_{p-1}
        t = np.tensordot(t, bases[i], axes=([i, i + rem], [2, 1]))
        t = np.moveaxis(t, -1, i)
    if np.max(np.abs(t.imag), initial=0.0) > 1e-9:
        raise DomainError("state coordinates are not real; is the input Hermitian?")
    return np.ascontiguousarray(t.real)


def tensor_to_state(x: StateTensor) -> DensityMatrix:
    """Inverse of :func:`state_to_tensor`; positivity is not checked."""
    spec = x.partition
    bases = _party_bases(spec)
    t = np.asarray(x.coords, dtype=complex)
    for b in bases:
        t = np.tensordot(t, b, axes=([0], [0]))
    p = spec.n_parties
    t = t.transpose(list(range(0, 2 * p, 2)) + list(range(1, 2 * p, 2)))
    m = t.reshape(spec.dim, spec.dim) / spec.dim
    proj = partition_projector(spec)
    if proj is not None:
        m = proj @ m @ proj
    m = (m + m.conj().T) / 2
    tr = np.trace(m).real
    if abs(tr) > 1e-14:
        m = m / tr
    return DensityMatrix(m, spec.parties, check_psd=False)


# --------------------------------------------------------------------------
# Partial transpose


def partial_transpose(rho: DensityMatrix | np.ndarray, subset: Iterable[int],
                      dims: Sequence[int] | None = None) -> np.ndarray:
    """Transpose the tensor factors listed in ``subset`` (0-based party indices)."""
    if isinstance(rho, DensityMatrix):
        m, dims = np.asarray(rho.matrix), rho.dims
    else:
        m = np.asarray(rho)
        if dims is None:
            raise DomainError("dims are required for a bare matrix")
    dims = tuple(dims)
    subset = sorted(set(int(i) for i in subset))
    p = len(dims)
    if not subset or len(subset) >= p or subset[0] < 0 or subset[-1] >= p:
        raise DomainError(f"subset {subset} must be a nonempty proper subset of range({p})")
    t = m.reshape(dims * 2)
    axes = list(range(2 * p))
    for i in subset:
        axes[i], axes[p + i] = axes[p + i], axes[i]
    return t.transpose(axes).reshape(m.shape)


def ppt_check(rho: DensityMatrix, subset: Iterable[int], tol: float = PSD_TOL) -> tuple[bool, float]:
    pt = partial_transpose(rho, subset)
    lam = float(np.linalg.eigvalsh((pt + pt.conj().T) / 2)[0])
    return lam >= -tol, lam


def t_matrix(x: StateTensor) -> np.ndarray:
    """Reshape a symmetric ``2k``-qubit tensor into the ``4^k x 4^k`` matrix ``T_{mu,nu}``."""
    spec = x.partition
    if not spec.is_fully_symmetric or set(spec.parties) != {2}:
        raise DomainError("t_matrix needs a fully symmetric qubit partition")
    n = spec.n_parties
    if n % 2:
        raise DomainError("t_matrix needs an even number of qubits")
    half = 4 ** (n // 2)
    return np.asarray(x.coords).reshape(half, half).copy()


# --------------------------------------------------------------------------
# Local positivity constraints


def _matrix_poly_mul(a: dict, b: dict) -> dict:
    out: dict[MultiIndex, np.ndarray] = {}
    for ka, ma in a.items():
        for kb, mb in b.items():
            key = tuple(i + j for i, j in zip(ka, kb))
            prod = ma @ mb
            if key in out:
                out[key] = out[key] + prod
            else:
                out[key] = prod
    return out


@lru_cache(maxsize=16)
def _char_poly_coefficients(dim: int) -> tuple[Polynomial, ...]:
    """Elementary symmetric functions ``e_1..e_dim`` of the eigenvalues of
    ``rho(x) = (I + sum_a x_a S_a)/dim`` as polynomials in ``x``."""
    basis = standard_basis(dim)
    t = basis.t
    zero = (0,) * t
    rho = {zero: basis.ops[0] / dim}
    for a in range(t):
        alpha = [0] * t
        alpha[a] = 1
        rho[tuple(alpha)] = basis.ops[a + 1] / dim
    power_sums = []
    current = rho
    for j in range(1, dim + 1):
        if j > 1:
            current = _matrix_poly_mul(current, rho)
        power_sums.append(Polynomial(t, {k: np.trace(m).real for k, m in current.items()}))
    e = [Polynomial.constant(t, 1.0)]
    for k in range(1, dim + 1):
        acc = Polynomial(t)
        for i in range(1, k + 1):
            acc = acc + e[k - i] * power_sums[i - 1] * ((-1) ** (i - 1))
        e.append(acc * (1.0 / k))
    cleaned = []
    for poly in e[1:]:
        cleaned.append(Polynomial(t, {a: c for a, c in poly.terms.items() if abs(c) > 1e-13}))
    return tuple(cleaned)


def local_constraint_polynomials(dim: int, pure: bool) -> list[tuple[Polynomial, Relation]]:
    """Polynomial description of the local state body for ``(I + x.S)/dim``.

    Mixed: every characteristic-polynomial coefficient ``e_k`` (k >= 2) is
    nonnegative, which by Descartes' rule is equivalent to positivity.
    Pure: ``e_2 = 0`` (unit purity) plus ``e_k >= 0`` for ``k >= 3``; for a
    qubit this is the Bloch sphere.  Each polynomial is scaled so that its
    constant term is +-1.
    """
    if dim < 2:
        raise DomainError("local dimension must be at least 2")
    coeffs = _char_poly_coefficients(dim)
    t = dim * dim - 1
    out = []
    for k in range(2, dim + 1):
        poly = coeffs[k - 1]
        const = poly.terms.get((0,) * t, 0.0)
        poly = poly * (1.0 / const)
        if pure and k == 2:
            out.append((-poly, Relation.EQ))
        else:
            out.append((poly, Relation.GEQ))
    return out


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    """Local coordinates ``x_a = tr(rho S_a)`` of a single-party state."""
    rho = np.asarray(rho)
    basis = standard_basis(rho.shape[0])
    return np.array([np.trace(rho @ s).real for s in basis.ops[1:]])


def local_state(x: Sequence[float], dim: int) -> np.ndarray:
    """``(I + sum_a x_a S_a) / dim``."""
    basis = standard_basis(dim)
    x = np.asarray(x, dtype=float)
    if x.shape != (basis.t,):
        raise DomainError(f"need {basis.t} local coordinates for dim {dim}")
    return (basis.ops[0] + np.tensordot(x, basis.stack()[1:], axes=1)) / dim


def product_state(local_states: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, local_states)
