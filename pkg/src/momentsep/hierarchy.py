"""Flat-extension hierarchy for the truncated K-moment problem.

For increasing relaxation order ``k`` the moments ``z_beta`` (``|beta| <= 2k``)
of a candidate extension are searched by an SDP with ``M_k(z) >= 0``,
localizing constraints for the set ``K`` and ``z_alpha = y_alpha`` on the
known moments, minimizing a random sum-of-squares functional.  An
infeasible SDP proves that no representing measure exists; a flat optimum
yields atoms that are checked against the input moments.
"""
from __future__ import annotations

import logging
import math
import time
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from scipy.optimize import least_squares, nnls

from .errors import DomainError, ExtractionError, IntegrityError
from .polynomial import MultiIndex, Polynomial, Relation
from .quantum import DensityMatrix, PartitionSpec, local_state, product_state
from .randgen import make_rng
from .sdp import LmiBlock, SdpProblem, SdpSolution, SolverOptions, Status, solve, \
    verify_infeasibility_certificate
from .semialgebraic import SemialgebraicSet, membership
from .tms import (RANK_TOL, Tms, add_index, localizing_order, moment_matrix, monomial_basis,
                  monomial_index, numerical_rank, vandermonde)

log = logging.getLogger(__name__)


class Verdict(str, Enum):
    ENTANGLED = "ENTANGLED"
    SEPARABLE = "SEPARABLE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class HierarchyOptions:
    k_max: int | None = None  # default k0 + 2
    objectives_per_order: int = 6
    rank_tol: float = RANK_TOL
    seed: int = 0
    solver: SolverOptions = field(default_factory=SolverOptions)
    decomposition_tol: float = 1e-6
    facial_reduction: bool = True
    polish: bool = True
    near_optimal_tol: float = 1e-6
    max_coefficients: int = 60_000_000  # dense LMI entries allowed per relaxation


@dataclass
class Decomposition:
    weights: np.ndarray
    points: np.ndarray
    partition: PartitionSpec | None = None

    def __post_init__(self) -> None:
        self.weights = np.asarray(self.weights, dtype=float).ravel()
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        if self.points.shape[0] != self.weights.size:
            raise DomainError("need one weight per atom")

    @property
    def rank(self) -> int:
        return int(self.weights.size)

    def moments(self, alphas: Sequence[MultiIndex]) -> np.ndarray:
        return vandermonde(self.points, alphas).T @ self.weights

    def to_json(self) -> list[dict]:
        return [{"w": float(w), "point": p.tolist()} for w, p in zip(self.weights, self.points)]


@dataclass
class Witness:
    """A verified Farkas certificate for the order-``k`` relaxation."""

    order: int
    blocks: list[np.ndarray] | None = None
    equality_certificate: np.ndarray | None = None

    def as_certificate(self):
        if self.blocks is not None:
            return self.blocks
        return self.equality_certificate

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "blocks": None if self.blocks is None else [b.tolist() for b in self.blocks],
            "equality_certificate": None if self.equality_certificate is None
            else self.equality_certificate.tolist(),
        }

    @classmethod
    def from_json(cls, data: dict) -> Witness:
        blocks = data.get("blocks")
        eq = data.get("equality_certificate")
        return cls(
            int(data["order"]),
            None if blocks is None else [np.array(b, dtype=float) for b in blocks],
            None if eq is None else np.array(eq, dtype=float),
        )


@dataclass
class SeparabilityCertificate:
    verdict: Verdict
    order: int | None = None
    witness: Witness | None = None
    decomposition: Decomposition | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "order": self.order,
            "witness": None if self.witness is None else self.witness.to_json(),
            "atoms": None if self.decomposition is None else self.decomposition.to_json(),
            "diagnostics": self.diagnostics,
        }


# --------------------------------------------------------------------------
# Objective and relaxation


def k0_of(tms: Tms | int) -> int:
    d = tms if isinstance(tms, int) else tms.degree
    return d // 2 + 1


def random_sos_objective(n: int, k0: int, rng=None) -> Polynomial:
    """``R = sum_i q_i^2`` with ``C(n+k0, k0)`` standard-normal polynomials of degree <= k0."""
    rng = make_rng(rng)
    basis = monomial_basis(n, k0)
    s = len(basis)
    q = rng.standard_normal((s, s))
    gram = q.T @ q
    terms: dict[MultiIndex, float] = {}
    for i, a in enumerate(basis):
        for j, b in enumerate(basis):
            key = add_index(a, b)
            terms[key] = terms.get(key, 0.0) + gram[i, j]
    return Polynomial(n, terms)


@dataclass
class Relaxation:
    order: int
    variables: list[MultiIndex]
    problem: SdpProblem
    moment_block: int
    kernel_basis: np.ndarray | None

    def extension(self, z: np.ndarray) -> Tms:
        n = len(self.variables[0])
        return Tms(n, 2 * self.order, dict(zip(self.variables, z)))


def _moment_coeffs(n: int, k: int, index: dict, m: int, shift: Polynomial | None = None) -> np.ndarray:
    basis = monomial_basis(n, k)
    s = len(basis)
    coeffs = np.zeros((m, s, s))
    rows, cols = np.triu_indices(s)
    terms = [((0,) * n, 1.0)] if shift is None else list(shift.terms.items())
    for gamma, c in terms:
        idx = np.array([index[add_index(add_index(basis[i], basis[j]), gamma)] for i, j in zip(rows, cols)])
        np.add.at(coeffs, (idx, rows, cols), c)
        off = rows != cols
        np.add.at(coeffs, (idx[off], cols[off], rows[off]), c)
    return coeffs


def _kernel_vectors(tms: Tms, k: int, equalities: Sequence[Polynomial], facial: bool) -> np.ndarray | None:
    """Polynomials (as coefficient vectors in the degree-``k`` basis) that lie
    in the kernel of ``M_k(z)`` for every feasible extension ``z``."""
    n = tms.n
    basis = monomial_basis(n, k)
    index = monomial_index(n, k)
    vecs = []
    for g in equalities:
        for delta in monomial_basis(n, k - g.degree) if k >= g.degree else []:
            v = np.zeros(len(basis))
            for gamma, c in g.terms.items():
                v[index[add_index(gamma, delta)]] += c
            vecs.append(v)
    if facial:
        # kernel of the largest fully known moment matrix: such p vanish on the
        # support of any representing measure, and so do all multiples x^delta p
        j = tms.degree // 2
        while j >= 1:
            try:
                mj = moment_matrix(tms, j)
                break
            except KeyError:
                j -= 1
        if j >= 1:
            w, v = np.linalg.eigh(mj)
            scale = max(1.0, float(np.abs(w).max()))
            small = v[:, np.abs(w) <= 1e-9 * scale]
            sub = monomial_basis(n, j)
            for col in small.T:
                poly = dict(zip(sub, col))
                for delta in monomial_basis(n, k - j):
                    vec = np.zeros(len(basis))
                    for a, c in poly.items():
                        vec[index[add_index(a, delta)]] += c
                    vecs.append(vec)
    if not vecs:
        return None
    return np.array(vecs).T


def relaxation_size(n: int, k: int) -> int:
    """Dense coefficient count of the order-``k`` moment block."""
    return math.comb(n + 2 * k, 2 * k) * math.comb(n + k, k) ** 2


def build_relaxation(tms: Tms, k_set: SemialgebraicSet, k: int, objective: Polynomial | None = None,
                     facial_reduction: bool = True, max_coefficients: int | None = None) -> Relaxation:
    """Order-``k`` SDP relaxation of the K-moment problem for ``tms``."""
    if k_set.n != tms.n:
        raise DomainError("tms and set have different variable counts")
    if k < k0_of(tms):
        raise DomainError(f"relaxation order {k} below k0 = {k0_of(tms)}")
    if (0,) * tms.n in tms.values and abs(tms.values[(0,) * tms.n]) <= 0:
        raise IntegrityError("zeroth moment must be positive")
    n = tms.n
    if max_coefficients is not None and relaxation_size(n, k) > max_coefficients:
        raise DomainError(f"order-{k} relaxation in {n} variables exceeds the size budget")
    variables = monomial_basis(n, 2 * k)
    index = monomial_index(n, 2 * k)
    m = len(variables)
    for alpha in tms.values:
        if alpha not in index:
            raise IntegrityError(f"moment {alpha} exceeds the relaxation degree")

    blocks = []
    moment = _moment_coeffs(n, k, index, m)
    kernel = _kernel_vectors(tms, k, k_set.equalities, facial_reduction)
    q = None
    rows = []
    if kernel is not None:
        # M_k(z) v = 0 for every kernel vector; rows touching only known
        # moments carry no information and would only echo data noise
        known = np.zeros(m, dtype=bool)
        known[[index[a] for a in tms.values]] = True
        for v in kernel.T:
            for i in range(moment.shape[1]):
                r = moment[:, i, :] @ v
                nz = np.abs(r) > 1e-14
                if nz.any() and not known[nz].all():
                    rows.append(r)
        u, s, _ = np.linalg.svd(kernel, full_matrices=True)
        rank = int(np.sum(s > 1e-10 * max(1.0, s[0])))
        q = u[:, rank:]
        moment = q.T @ moment @ q
    blocks.append(LmiBlock(np.zeros(moment.shape[1:]), moment))

    for g, rel in k_set.constraints:
        dg = localizing_order(g)
        if k - dg < 0:
            continue
        if rel is Relation.GEQ:
            coeffs = _moment_coeffs(n, k - dg, index, m, shift=g)
            blocks.append(LmiBlock(np.zeros(coeffs.shape[1:]), coeffs))
        else:
            for alpha in monomial_basis(n, 2 * (k - dg)):
                r = np.zeros(m)
                for gamma, c in g.terms.items():
                    r[index[add_index(alpha, gamma)]] += c
                rows.append(r)

    c = np.zeros(m)
    if objective is not None:
        for alpha, coef in objective.terms.items():
            if alpha not in index:
                raise DomainError("objective degree exceeds the relaxation order")
            c[index[alpha]] = coef
    fixed = {index[a]: v for a, v in tms.values.items()}
    eq = np.array(rows) if rows else None
    problem = SdpProblem(m, c, blocks, fixed, eq, np.zeros(len(rows)) if rows else None)
    return Relaxation(k, variables, problem, 0, q)


# --------------------------------------------------------------------------
# Atom extraction


def _column_echelon(v: np.ndarray, tol: float) -> tuple[np.ndarray, list[int]]:
    u = v.copy()
    r = u.shape[1]
    pivots: list[int] = []
    col = 0
    scale = max(float(np.abs(u).max(initial=0.0)), 1e-300)
    for row in range(u.shape[0]):
        if col == r:
            break
        c = col + int(np.argmax(np.abs(u[row, col:])))
        if abs(u[row, c]) <= tol * scale:
            continue
        u[:, [col, c]] = u[:, [c, col]]
        u[:, col] /= u[row, col]
        for other in range(r):
            if other != col:
                u[:, other] -= u[row, other] * u[:, col]
        pivots.append(row)
        col += 1
    if col < r:
        raise ExtractionError("echelon form is rank deficient")
    return u, pivots


def extract_atoms(z: Tms, k: int, rank_tol: float = RANK_TOL, rng=None, retries: int = 5) -> Decomposition:
    """Recover the atoms of a flat moment matrix ``M_k(z)``.

    Factor ``M_k(z) = V V^T``, bring ``V`` to column echelon form to obtain a
    monomial basis ``B`` and the multiplication operators ``N_i`` on ``B``,
    then read joint eigenvalues off the Schur vectors of a random
    combination ``sum_i lambda_i N_i``.
    """
    rng = make_rng(rng)
    n = z.n
    mk = moment_matrix(z, k)
    basis = monomial_basis(n, k)
    index = monomial_index(n, k)
    r = numerical_rank(mk, rank_tol)
    if r == 0:
        raise ExtractionError("moment matrix is zero")
    w, vecs = np.linalg.eigh(mk)
    order = np.argsort(w)[::-1][:r]
    v = vecs[:, order] * np.sqrt(np.maximum(w[order], 0.0))
    u, pivots = _column_echelon(v, 1e-8)
    b_monos = [basis[p] for p in pivots]
    mult = []
    for i in range(n):
        rows = []
        for b in b_monos:
            shifted = list(b)
            shifted[i] += 1
            shifted = tuple(shifted)
            if shifted not in index:
                raise ExtractionError("basis monomials are not of low enough degree; not flat")
            rows.append(u[index[shifted]])
        mult.append(np.array(rows))

    points = None
    for _ in range(retries):
        lam = rng.random(n)
        lam /= lam.sum()
        combo = sum(l * nmat for l, nmat in zip(lam, mult))
        t, qmat = sla.schur(combo, output="real")
        if r > 1 and np.abs(np.diag(t, -1)).max() > 1e-6 * max(1.0, np.abs(t).max()):
            continue
        points = np.array([[qmat[:, j] @ nmat @ qmat[:, j] for nmat in mult] for j in range(r)])
        if len(np.unique(np.round(points, 6), axis=0)) == r:
            break
    if points is None:
        raise ExtractionError("multiplication operators have complex or defective spectrum")

    alphas = [a for a in monomial_basis(n, 2 * k) if a in z.values]
    vand = vandermonde(points, alphas).T
    target = np.array([z.values[a] for a in alphas])
    weights, _ = nnls(vand, target)
    keep = weights > 1e-10
    if not keep.any():
        raise ExtractionError("all recovered weights vanish")
    weights, points = weights[keep], points[keep]
    return Decomposition(weights / weights.sum() * z.values.get((0,) * n, 1.0), points)


def polish_decomposition(dec: Decomposition, tms: Tms, k_set: SemialgebraicSet) -> Decomposition:
    """Gauss-Newton refinement of weights and atoms against the known moments."""
    alphas = sorted(tms.values)
    target = np.array([tms.values[a] for a in alphas])
    r, n = dec.points.shape
    eqs = k_set.equalities
    ineqs = k_set.inequalities

    def residual(p):
        w = p[:r]
        pts = p[r:].reshape(r, n)
        out = [vandermonde(pts, alphas).T @ w - target]
        for g in eqs:
            out.append(g.evaluate_many(pts))
        for g in ineqs:
            out.append(np.minimum(0.0, g.evaluate_many(pts)))
        return np.concatenate(out)

    p0 = np.concatenate([dec.weights, dec.points.ravel()])
    lower = np.concatenate([np.zeros(r), np.full(r * n, -np.inf)])
    try:
        res = least_squares(residual, p0, bounds=(lower, np.inf), xtol=1e-15, ftol=1e-15, gtol=1e-15,
                            max_nfev=200)
    except ValueError:
        return dec
    w = res.x[:r]
    pts = res.x[r:].reshape(r, n)
    keep = w > 1e-12
    return Decomposition(w[keep], pts[keep], dec.partition)


def verify_decomposition(dec: Decomposition, tms: Tms, k_set: SemialgebraicSet | None = None,
                         tol: float = 1e-6) -> tuple[bool, float]:
    """Max deviation between the atoms' moments and ``tms`` on its support;
    ``ok`` also requires positive weights and every atom inside ``K``."""
    alphas = sorted(tms.values)
    target = np.array([tms.values[a] for a in alphas])
    err = float(np.abs(dec.moments(alphas) - target).max(initial=0.0))
    ok = err <= tol and bool(np.all(dec.weights > 0))
    if k_set is not None:
        ok = ok and all(membership(p, k_set, tol) for p in dec.points)
    return ok, err


def decomposition_to_states(dec: Decomposition, spec: PartitionSpec,
                            psd_tol: float = 1e-8) -> list[tuple[float, DensityMatrix]]:
    """Turn atoms into weighted product states, one local state per party."""
    offsets = spec.class_offsets()
    if dec.points.shape[1] != spec.n_vars:
        raise DomainError("atoms do not match the partition's variable count")
    out = []
    for w, point in zip(dec.weights, dec.points):
        locals_ = []
        for ci in range(len(spec.symmetry_classes)):
            dim = spec.class_dim(ci)
            block = point[offsets[ci]: offsets[ci] + spec.class_t(ci)]
            rho = local_state(block, dim)
            ev, vecs = np.linalg.eigh(rho)
            if ev[0] < -psd_tol:
                warnings.warn("local block is not PSD; projecting onto the PSD cone", UserWarning,
                              stacklevel=2)
            if ev[0] < 0:
                ev = np.clip(ev, 0.0, None)
                rho = (vecs * ev) @ vecs.conj().T
                rho /= np.trace(rho).real
            locals_.append(rho)
        mats = [locals_[spec.class_of(i)] for i in range(spec.n_parties)]
        out.append((float(w), DensityMatrix(product_state(mats), spec.parties, check_psd=False)))
    return out


def mixture(states: Sequence[tuple[float, DensityMatrix]]) -> np.ndarray:
    return sum(w * s.matrix for w, s in states)


# --------------------------------------------------------------------------
# Main loop


def _witness_from(sol: SdpSolution, k: int) -> Witness:
    if sol.dual_blocks is not None:
        return Witness(k, [np.asarray(b) for b in sol.dual_blocks])
    return Witness(k, None, np.asarray(sol.equality_certificate))


def _flat_orders(d: int, k: int, d0: int) -> range:
    lo = max(d0, (d + 1) // 2)
    return range(lo, k + 1)


def run_hierarchy(tms: Tms, k_set: SemialgebraicSet, opts: HierarchyOptions | None = None) -> SeparabilityCertificate:
    """Search for a flat extension of ``tms`` supported on ``k_set``.

    ENTANGLED is reported with a verified infeasibility certificate and
    SEPARABLE with atoms that reproduce the known moments; anything else is
    INCONCLUSIVE with per-order diagnostics.
    """
    opts = opts or HierarchyOptions()
    if tms.degree < 1:
        raise DomainError("tms degree must be at least 1")
    start = time.perf_counter()
    rng = make_rng(opts.seed)
    k0 = k0_of(tms)
    k_max = k0 + 2 if opts.k_max is None else opts.k_max
    if k_max < k0:
        raise DomainError(f"k_max = {k_max} is below k0 = {k0}")
    d0 = k_set.d0
    objectives = [random_sos_objective(tms.n, k0, rng) for _ in range(opts.objectives_per_order)]
    diag: dict = {"k0": k0, "d0": d0, "orders": [], "objectives_tried": 0}

    for k in range(k0, k_max + 1):
        order_diag: dict = {"k": k, "runs": []}
        diag["orders"].append(order_diag)
        try:
            relax = build_relaxation(tms, k_set, k, None, opts.facial_reduction, opts.max_coefficients)
        except DomainError as exc:
            order_diag["reason"] = str(exc)
            break
        for j, objective in enumerate(objectives):
            relax.problem.objective = np.zeros(relax.problem.num_vars)
            for alpha, coef in objective.terms.items():
                relax.problem.objective[monomial_index(tms.n, 2 * k)[alpha]] = coef
            sol = solve(relax.problem, opts.solver)
            diag["objectives_tried"] += 1
            run = {"objective": j, "status": sol.status.value, "iterations": sol.iterations,
                   "residuals": sol.residuals, "reason": sol.reason}
            order_diag["runs"].append(run)
            if sol.status is Status.INFEASIBLE:
                witness = _witness_from(sol, k)
                if not verify_infeasibility_certificate(relax.problem, witness.as_certificate()):
                    run["reason"] = "certificate failed verification"
                    continue
                diag["seconds"] = time.perf_counter() - start
                return SeparabilityCertificate(Verdict.ENTANGLED, k, witness, None, diag)
            if sol.primal is None:
                continue
            res = sol.residuals
            if sol.status is not Status.OPTIMAL and max(
                    res.get("primal", np.inf), res.get("dual", np.inf), res.get("gap", np.inf)) > opts.near_optimal_tol:
                continue
            z = relax.extension(sol.primal)
            found = _try_flat(z, tms, k_set, k, d0, opts, rng, run)
            if found is not None:
                diag["seconds"] = time.perf_counter() - start
                return SeparabilityCertificate(Verdict.SEPARABLE, k, None, found, diag)
    diag["seconds"] = time.perf_counter() - start
    return SeparabilityCertificate(Verdict.INCONCLUSIVE, None, None, None, diag)


def _try_flat(z: Tms, tms: Tms, k_set: SemialgebraicSet, k: int, d0: int, opts: HierarchyOptions,
              rng, run: dict) -> Decomposition | None:
    ranks = {t: numerical_rank(moment_matrix(z, t), opts.rank_tol) for t in range(0, k + 1)}
    run["ranks"] = [ranks[t] for t in range(k + 1)]
    for t in _flat_orders(tms.degree, k, d0):
        if ranks[t] != ranks[t - d0]:
            continue
        trunc = Tms(z.n, 2 * t, {a: v for a, v in z.values.items() if sum(a) <= 2 * t})
        try:
            dec = extract_atoms(trunc, t, opts.rank_tol, rng)
        except ExtractionError as exc:
            run["extraction"] = str(exc)
            continue
        ok, err = verify_decomposition(dec, tms, k_set, opts.decomposition_tol)
        if not ok and opts.polish:
            polished = polish_decomposition(dec, tms, k_set)
            mass = tms.values.get((0,) * tms.n, 1.0)
            polished.weights *= mass / polished.weights.sum()
            ok, err = verify_decomposition(polished, tms, k_set, opts.decomposition_tol)
            if ok:
                dec = polished
        run["flat_order"] = t
        run["reconstruction_error"] = err
        if ok:
            return dec
    return None
