"""Closed-form separability tests for small symmetric qubit systems and the
constructive four-atom decomposition of separable symmetric two-qubit states."""
from __future__ import annotations

import numpy as np

from .errors import DomainError, ExtractionError
from .hierarchy import Decomposition, Verdict
from .quantum import DensityMatrix, PartitionSpec, StateTensor, ppt_check, state_to_tensor, tensor_to_state
from .randgen import make_rng
from .tms import Tms, moment_matrix, tensor_to_tms

NSC_TOL = 1e-9
CLIP_TOL = 1e-10
DELTA_TOL = 1e-10


def _require(y: Tms, degree: int) -> None:
    if y.n != 3 or y.degree != degree:
        raise DomainError(f"expected a degree-{degree} tms in 3 variables, got n={y.n}, d={y.degree}")


def _lambda_min(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((m + m.conj().T) / 2)[0])


def normalization_defect(y: Tms) -> float:
    """``y000 - y200 - y020 - y002``; zero for every symmetric two-qubit state."""
    return y[(0, 0, 0)] - y[(2, 0, 0)] - y[(0, 2, 0)] - y[(0, 0, 2)]


def two_qubit_sym_nsc(y: Tms, tol: float = NSC_TOL) -> bool:
    _require(y, 2)
    return _lambda_min(moment_matrix(y, 1)) >= -tol and abs(normalization_defect(y)) <= tol


# Entries of the degree-3 block matrix: (a, op, b) means y_a op y_b with
# op in {"+", "-", "+i", "-i"}.
_CNS32 = [
    [("000", "+", "001"), ("100", "-i", "010"), ("100", "+", "101"), ("200", "-i", "110"),
     ("010", "+", "011"), ("110", "-i", "020"), ("001", "+", "002"), ("101", "-i", "011")],
    [("100", "+i", "010"), ("000", "-", "001"), ("200", "+i", "110"), ("100", "-", "101"),
     ("110", "+i", "020"), ("010", "-", "011"), ("101", "+i", "011"), ("001", "-", "002")],
    [("100", "+", "101"), ("200", "-i", "110"), ("200", "+", "201"), ("300", "-i", "210"),
     ("110", "+", "111"), ("210", "-i", "120"), ("101", "+", "102"), ("201", "-i", "111")],
    [("200", "+i", "110"), ("100", "-", "101"), ("300", "+i", "210"), ("200", "-", "201"),
     ("210", "+i", "120"), ("110", "-", "111"), ("201", "+i", "111"), ("101", "-", "102")],
    [("010", "+", "011"), ("110", "-i", "020"), ("110", "+", "111"), ("210", "-i", "120"),
     ("020", "+", "021"), ("120", "-i", "030"), ("011", "+", "012"), ("111", "-i", "021")],
    [("110", "+i", "020"), ("010", "-", "011"), ("210", "+i", "120"), ("110", "-", "111"),
     ("120", "+i", "030"), ("020", "-", "021"), ("111", "+i", "021"), ("011", "-", "012")],
    [("001", "+", "002"), ("101", "-i", "011"), ("101", "+", "102"), ("201", "-i", "111"),
     ("011", "+", "012"), ("111", "-i", "021"), ("002", "+", "003"), ("102", "-i", "012")],
    [("101", "+i", "011"), ("001", "-", "002"), ("201", "+i", "111"), ("101", "-", "102"),
     ("111", "+i", "021"), ("011", "-", "012"), ("102", "+i", "012"), ("002", "-", "003")],
]
_OPS = {"+": 1.0, "-": -1.0, "+i": 1j, "-i": -1j}


def cns_matrix(y: Tms) -> np.ndarray:
    """The 8x8 Hermitian matrix whose positivity characterizes degree-3 sphere tms."""
    _require(y, 3)

    def val(code: str) -> float:
        return y[tuple(int(c) for c in code)]

    return np.array([[val(a) + _OPS[op] * val(b) for a, op, b in row] for row in _CNS32])


def three_qubit_sym_nsc(y: Tms, tol: float = NSC_TOL) -> bool:
    return _lambda_min(cns_matrix(y)) >= -tol


def ppt_rank_sufficient(rho: DensityMatrix, tol: float = NSC_TOL) -> Verdict | None:
    """SEPARABLE when the state is PPT and either N <= 3 or rank <= N; no claim otherwise."""
    n = len(rho.dims)
    if set(rho.dims) != {2}:
        raise DomainError("expects a symmetric multi-qubit state")
    ok, _ = ppt_check(rho, [0], tol)
    if not ok:
        return None
    if n <= 3:
        return Verdict.SEPARABLE
    rank = int(np.sum(rho.eigvalsh() > tol))
    return Verdict.SEPARABLE if rank <= n else None


def moment_ppt_equivalence(x: StateTensor, tol: float = NSC_TOL) -> tuple[bool, bool]:
    """``(M_{N/2}(y) >= 0, rho^{T_A} >= 0)`` for an even symmetric qubit tensor,
    with the partial transpose taken on the first ``N/2`` qubits."""
    spec = x.partition
    if not spec.is_fully_symmetric or set(spec.parties) != {2}:
        raise DomainError("expects a fully symmetric qubit tensor")
    n = spec.n_parties
    if n % 2:
        raise DomainError("needs an even number of qubits")
    y = tensor_to_tms(x)
    mom = _lambda_min(moment_matrix(y, n // 2)) >= -tol
    ppt, _ = ppt_check(tensor_to_state(x), range(n // 2), tol)
    return mom, ppt


def _delta(u: np.ndarray) -> float:
    return float(u[0] ** 2 - u[1:] @ u[1:])


def _crossing(ui: np.ndarray, uj: np.ndarray) -> float:
    """Root in (0, 1) of ``Delta(t ui + (1-t) uj)`` given opposite endpoint signs."""
    # Delta(v) = v^T J v with J = diag(1, -1, -1, -1)
    j = np.array([1.0, -1.0, -1.0, -1.0])
    d = ui - uj
    a = float(d @ (j * d))
    b = 2.0 * float(d @ (j * uj))
    c = float(uj @ (j * uj))
    if abs(a) < 1e-300:
        return -c / b
    roots = np.roots([a, b, c])
    roots = np.sort(roots[np.abs(roots.imag) <= 1e-12 * max(1.0, np.abs(roots).max())].real)
    inside = [t for t in roots if 0.0 < t < 1.0]
    if not inside:
        # endpoints have opposite signs, so the bracketing root sits at the boundary numerically
        inside = [float(np.clip(roots[np.argmin(np.abs(roots - 0.5))], 0.0, 1.0))]
    return float(inside[0])


def two_qubit_four_atom_decomposition(y: Tms, tol: float = NSC_TOL, rng=None,
                                      max_retries: int = 3) -> Decomposition:
    """Split ``M_1(y)`` into at most four rank-one terms ``w n n^T`` with ``n = (1, n_vec)``
    and ``|n_vec| = 1``.

    Start from the eigen-decomposition ``M_1 = sum_k u_k u_k^T``. While some
    ``Delta(u) = u_0^2 - |u_vec|^2`` is nonzero, pair a negative one with a
    positive one and rotate the pair within its span so that one of the two
    new vectors has ``Delta = 0``; that vector is a pure product atom.
    """
    if not two_qubit_sym_nsc(y, tol):
        raise DomainError("tms violates the two-qubit separability condition")
    m1 = moment_matrix(y, 1)
    rng = make_rng(rng)
    for attempt in range(max_retries + 1):
        mat = m1 if attempt == 0 else m1 + 1e-12 * _sym_jitter(rng)
        try:
            return _pairwise_split(mat)
        except ExtractionError:
            continue
    raise ExtractionError("no sign-opposed pair found; numerical degeneracy")


def _sym_jitter(rng) -> np.ndarray:
    a = rng.standard_normal((4, 4))
    return (a + a.T) / 2


def _pairwise_split(m1: np.ndarray) -> Decomposition:
    w, v = np.linalg.eigh(m1)
    scale = max(1.0, float(np.abs(w).max()))
    w = np.where(w >= -CLIP_TOL * scale, np.clip(w, 0.0, None), w)
    keep = w > CLIP_TOL * scale
    vecs = [v[:, i] * np.sqrt(w[i]) for i in np.flatnonzero(keep)]
    initial = len(vecs)
    atoms: list[np.ndarray] = []
    pending: list[np.ndarray] = []
    dtol = DELTA_TOL * scale
    for u in vecs:
        (atoms if abs(_delta(u)) <= dtol else pending).append(u)
    iterations = 0
    while pending:
        iterations += 1
        if iterations > initial:
            raise ExtractionError("split did not terminate")
        deltas = [_delta(u) for u in pending]
        neg = [i for i, d in enumerate(deltas) if d < -dtol]
        pos = [i for i, d in enumerate(deltas) if d > dtol]
        if not neg or not pos:
            if all(abs(d) <= dtol * 10 for d in deltas):
                atoms.extend(pending)
                break
            raise ExtractionError("no sign-opposed pair")
        i, j = neg[0], pos[0]
        ui, uj = pending[i], pending[j]
        t = _crossing(ui, uj)
        s = np.sqrt(t * t + (1 - t) ** 2)
        vt = (t * ui + (1 - t) * uj) / s
        vp = (-(1 - t) * ui + t * uj) / s
        pending = [u for idx, u in enumerate(pending) if idx not in (i, j)]
        atoms.append(vt)
        if abs(_delta(vp)) <= dtol:
            atoms.append(vp)
        elif np.linalg.norm(vp) > 0:
            pending.append(vp)
    weights, points = [], []
    for u in atoms:
        if abs(u[0]) <= 1e-300:
            continue
        n = u[1:] / u[0]
        norm = np.linalg.norm(n)
        weights.append(u[0] ** 2)
        points.append(n / norm if norm > 0 else n)
    weights = np.array(weights)
    return Decomposition(weights / weights.sum() * m1[0, 0], np.array(points))


def decomposition_error(dec: Decomposition, y: Tms) -> float:
    """Max entry deviation of ``sum_j w_j (1, n_j)(1, n_j)^T`` from ``M_1(y)``."""
    ext = np.hstack([np.ones((dec.rank, 1)), dec.points])
    recon = (ext.T * dec.weights) @ ext
    return float(np.abs(recon - moment_matrix(y, 1)).max())


def symmetric_tms(rho: DensityMatrix) -> Tms:
    return tensor_to_tms(state_to_tensor(rho, PartitionSpec.symmetric(len(rho.dims))))
