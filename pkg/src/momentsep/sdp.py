"""Dense SDP solver for affine LMI problems.

The problem handled is::

    minimize    c^T z
    subject to  F_b(z) = A0_b + sum_i z_i A_{b,i}  >= 0    for every block b
                z_i = v_i                                  for fixed indices i
                E z = e                                    (optional linear rows)

Equalities are eliminated by a nullspace parametrization ``z = z_p + N w``.
The reduced LMI is solved as the dual of a standard-form SDP with a
homogeneous self-dual embedding, so that an infeasible LMI produces a
Farkas certificate ``W_b >= 0`` with ``<W, A_i> = 0`` on free directions
and ``<W, A0> < 0``.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
import scipy.linalg as sla

from .errors import DomainError

log = logging.getLogger(__name__)


class Status(str, Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass
class LmiBlock:
    """``z -> a0 + sum_i z_i coeffs[i]`` with symmetric matrices."""

    a0: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        self.a0 = np.asarray(self.a0, dtype=float)
        self.coeffs = np.asarray(self.coeffs, dtype=float)
        if self.a0.ndim != 2 or self.a0.shape[0] != self.a0.shape[1]:
            raise DomainError("LMI constant term must be square")
        if self.coeffs.ndim != 3 or self.coeffs.shape[1:] != self.a0.shape:
            raise DomainError("LMI coefficient array must have shape (m, s, s)")

    @property
    def size(self) -> int:
        return self.a0.shape[0]

    def evaluate(self, z: np.ndarray) -> np.ndarray:
        return self.a0 + np.tensordot(z, self.coeffs, axes=1)


@dataclass
class SdpProblem:
    num_vars: int
    objective: np.ndarray
    blocks: list[LmiBlock]
    fixed: dict[int, float] = field(default_factory=dict)
    eq_matrix: np.ndarray | None = None
    eq_rhs: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (self.num_vars,):
            raise DomainError("objective length does not match num_vars")
        if not self.blocks:
            raise DomainError("an SDP needs at least one LMI block")
        for blk in self.blocks:
            if blk.coeffs.shape[0] != self.num_vars:
                raise DomainError("block coefficient count does not match num_vars")
            scale = max(1.0, float(np.abs(blk.a0).max(initial=0.0)), float(np.abs(blk.coeffs).max(initial=0.0)))
            asym = max(
                float(np.abs(blk.a0 - blk.a0.T).max(initial=0.0)),
                float(np.abs(blk.coeffs - blk.coeffs.transpose(0, 2, 1)).max(initial=0.0)),
            )
            if asym > 1e-12 * scale:
                raise DomainError("LMI block data is not symmetric")
            if not (np.all(np.isfinite(blk.a0)) and np.all(np.isfinite(blk.coeffs))):
                raise DomainError("LMI block data is not finite")
        self.fixed = {int(i): float(v) for i, v in self.fixed.items()}
        if any(not 0 <= i < self.num_vars for i in self.fixed):
            raise DomainError("fixed index out of range")
        if self.eq_matrix is not None:
            self.eq_matrix = np.atleast_2d(np.asarray(self.eq_matrix, dtype=float))
            self.eq_rhs = np.asarray(self.eq_rhs, dtype=float).ravel()
            if self.eq_matrix.shape != (self.eq_rhs.size, self.num_vars):
                raise DomainError("equality system has inconsistent shape")
            if self.eq_rhs.size == 0:
                self.eq_matrix = self.eq_rhs = None

    def to_json(self) -> dict:
        """Dense export for cross-checking against external solvers."""
        return {
            "num_vars": self.num_vars,
            "objective": self.objective.tolist(),
            "fixed": [{"index": i, "value": v} for i, v in sorted(self.fixed.items())],
            "eq_matrix": None if self.eq_matrix is None else self.eq_matrix.tolist(),
            "eq_rhs": None if self.eq_rhs is None else self.eq_rhs.tolist(),
            "blocks": [{"a0": b.a0.tolist(), "coeffs": b.coeffs.tolist()} for b in self.blocks],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json())


@dataclass
class SolverOptions:
    tol: float = 1e-8
    infeasibility_tol: float = 1e-8
    # looser ray quality at which a Farkas candidate is handed to the verifier
    certificate_gate: float = 1e-6
    max_iter: int = 200
    step_fraction: float = 0.98
    predictor_corrector: bool = False
    centering: float = 0.1
    tikhonov: float = 1e-12
    equality_tol: float = 1e-9


@dataclass
class SdpSolution:
    status: Status
    primal: np.ndarray | None = None
    objective_value: float | None = None
    dual_blocks: list[np.ndarray] | None = None
    equality_certificate: np.ndarray | None = None
    iterations: int = 0
    residuals: dict[str, float] = field(default_factory=dict)
    reason: str = ""


# --------------------------------------------------------------------------
# Equality elimination


@dataclass
class _Reduction:
    z_p: np.ndarray
    basis: np.ndarray  # columns span the feasible directions
    a0: list[np.ndarray]
    coeffs: list[np.ndarray]
    c: np.ndarray
    c0: float


def _equality_system(p: SdpProblem) -> tuple[np.ndarray, np.ndarray]:
    rows, rhs = [], []
    for i, v in sorted(p.fixed.items()):
        r = np.zeros(p.num_vars)
        r[i] = 1.0
        rows.append(r)
        rhs.append(v)
    if p.eq_matrix is not None:
        rows.extend(p.eq_matrix)
        rhs.extend(p.eq_rhs)
    if not rows:
        return np.zeros((0, p.num_vars)), np.zeros(0)
    return np.array(rows), np.array(rhs)


def _affine_parametrization(p: SdpProblem, tol: float) -> tuple[np.ndarray, np.ndarray] | np.ndarray:
    """Return ``(z_p, N)`` with ``{z : Ez = e} = z_p + range(N)``, or a vector
    ``lam`` with ``E^T lam = 0`` and ``e^T lam > 0`` when the system is inconsistent."""
    m = p.num_vars
    fixed_idx = np.array(sorted(p.fixed), dtype=int)
    free_idx = np.array([i for i in range(m) if i not in p.fixed], dtype=int)
    z_p = np.zeros(m)
    if fixed_idx.size:
        z_p[fixed_idx] = [p.fixed[i] for i in fixed_idx]
    if p.eq_matrix is None:
        basis = np.zeros((m, free_idx.size))
        basis[free_idx, np.arange(free_idx.size)] = 1.0
        return z_p, basis
    e_free = p.eq_matrix[:, free_idx]
    rhs = p.eq_rhs - p.eq_matrix @ z_p
    if free_idx.size == 0:
        resid = rhs
        null = np.zeros((0, 0))
        w_p = np.zeros(0)
    else:
        u, s, vt = np.linalg.svd(e_free, full_matrices=True)
        rank = int(np.sum(s > tol * max(1.0, s[0] if s.size else 0.0)))
        w_p = vt[:rank].T @ ((u[:, :rank].T @ rhs) / s[:rank])
        null = vt[rank:].T
        resid = rhs - e_free @ w_p
    scale = max(1.0, float(np.abs(p.eq_rhs).max(initial=0.0)))
    if np.abs(resid).max(initial=0.0) > tol * scale:
        e_full, e_rhs = _equality_system(p)
        # least-squares residual is orthogonal to range(E)
        z_ls, *_ = np.linalg.lstsq(e_full, e_rhs, rcond=None)
        lam = e_rhs - e_full @ z_ls
        return lam / np.dot(e_rhs, lam)
    z_p[free_idx] = w_p
    basis = np.zeros((m, null.shape[1]))
    basis[free_idx] = null
    return z_p, basis


def _reduce(p: SdpProblem, z_p: np.ndarray, basis: np.ndarray) -> _Reduction:
    a0, coeffs = [], []
    for blk in p.blocks:
        a0.append(blk.a0 + np.tensordot(z_p, blk.coeffs, axes=1))
        coeffs.append(np.tensordot(basis.T, blk.coeffs, axes=1))
    return _Reduction(z_p, basis, a0, coeffs, basis.T @ p.objective, float(p.objective @ z_p))


# --------------------------------------------------------------------------
# Certificates


def _block_psd_margin(w: np.ndarray) -> float:
    return float(np.linalg.eigvalsh((w + w.T) / 2)[0]) if w.size else 0.0


def verify_infeasibility_certificate(p: SdpProblem, cert: Sequence[np.ndarray] | np.ndarray,
                                     psd_tol: float = 1e-9, stationarity_tol: float = 1e-7,
                                     strict_tol: float = 1e-9) -> bool:
    """Check a Farkas certificate of LMI infeasibility.

    ``cert`` is either one symmetric matrix per block (``W_b``) or, for an
    inconsistent equality system, a vector ``lam`` over the stacked
    equalities (fixed indices first, then ``eq_matrix`` rows).  For block
    certificates the checks are scaled by ``s = -<A0_bar, W>``, where
    ``A0_bar`` absorbs a particular solution of the equalities: ``s`` must
    exceed ``strict_tol``, every ``W_b / s`` must be PSD to ``-psd_tol`` and
    ``<W, A_i> / s`` must vanish to ``stationarity_tol`` on every direction
    left free by the equalities.
    """
    e_full, e_rhs = _equality_system(p)
    if isinstance(cert, np.ndarray) and cert.ndim == 1:
        lam = cert
        if lam.shape != e_rhs.shape:
            raise DomainError("equality certificate has the wrong length")
        gap = float(e_rhs @ lam)
        if gap <= strict_tol:
            return False
        return bool(np.abs(e_full.T @ lam).max(initial=0.0) <= stationarity_tol * gap)
    cert = [np.asarray(w, dtype=float) for w in cert]
    if len(cert) != len(p.blocks) or any(w.shape != b.a0.shape for w, b in zip(cert, p.blocks)):
        raise DomainError("certificate block shapes do not match the problem")
    for w in cert:
        if np.abs(w - w.T).max(initial=0.0) > 1e-9 * max(1.0, np.abs(w).max(initial=0.0)):
            raise DomainError("certificate blocks must be symmetric")
    param = _affine_parametrization(p, 1e-9)
    if not isinstance(param, tuple):
        return False
    z_p, basis = param
    g = np.zeros(p.num_vars)
    strict = 0.0
    for w, blk in zip(cert, p.blocks):
        g += np.tensordot(blk.coeffs, w, axes=([1, 2], [0, 1]))
        strict += float(np.sum(w * blk.evaluate(z_p)))
    scale = -strict
    if scale <= strict_tol:
        return False
    if min(_block_psd_margin(w) for w in cert) < -psd_tol * scale:
        return False
    free = basis.T @ g
    return bool(np.abs(free).max(initial=0.0) <= stationarity_tol * scale)


def dual_bound(p: SdpProblem, w_blocks: Sequence[np.ndarray]) -> tuple[float, float]:
    """Lower bound on ``c^T z`` over the feasible set implied by ``W_b >= 0``.

    Returns ``(bound, stationarity_residual)``; the bound is rigorous only
    when the residual is zero, otherwise it is off by at most
    ``residual * ||N^T z||``.
    """
    param = _affine_parametrization(p, 1e-9)
    if not isinstance(param, tuple):
        return np.inf, 0.0
    z_p, basis = param
    g = np.zeros(p.num_vars)
    const = 0.0
    for w, blk in zip(w_blocks, p.blocks):
        g += np.tensordot(blk.coeffs, w, axes=([1, 2], [0, 1]))
        const += float(np.sum(w * blk.evaluate(z_p)))
    # c^T z = c^T z_p + (N^T c)^T t ; <F(z), W> = const + (N^T g)^T t >= 0
    resid = basis.T @ (p.objective - g)
    return float(p.objective @ z_p - const), float(np.abs(resid).max(initial=0.0))


# --------------------------------------------------------------------------
# Interior point method


def _max_step(l_factor: np.ndarray, d: np.ndarray) -> float:
    tmp = sla.solve_triangular(l_factor, d, lower=True)
    tmp = sla.solve_triangular(l_factor, tmp.T, lower=True)
    lam = np.linalg.eigvalsh((tmp + tmp.T) / 2)[0]
    return np.inf if lam >= 0 else -1.0 / lam


def _sym(a: np.ndarray) -> np.ndarray:
    return (a + a.T) / 2


def _chol(a: np.ndarray) -> np.ndarray | None:
    try:
        return np.linalg.cholesky(_sym(a))
    except np.linalg.LinAlgError:
        return None


def _solve_psd(m: np.ndarray, rhs: np.ndarray, tikhonov: float) -> np.ndarray:
    reg = tikhonov * max(1.0, float(np.max(np.diag(m), initial=0.0)))
    for _ in range(8):
        try:
            cf = sla.cho_factor(m + reg * np.eye(m.shape[0]) if reg else m)
            return sla.cho_solve(cf, rhs)
        except (np.linalg.LinAlgError, ValueError):
            reg = max(reg * 100, 1e-14)
    return np.linalg.lstsq(m, rhs, rcond=None)[0]


@dataclass
class _HsdResult:
    status: str
    y: np.ndarray
    x: list[np.ndarray]
    s: list[np.ndarray]
    tau: float
    kappa: float
    iterations: int
    residuals: dict[str, float]
    reason: str = ""


def _hsd(c_mats: list[np.ndarray], a_mats: list[np.ndarray], b: np.ndarray,
         opts: SolverOptions, accept_ray=None) -> _HsdResult:
    """Homogeneous self-dual interior point method for

        primal: min <C, X>  s.t. <A_i, X> = b_i, X >= 0
        dual:   max b^T y   s.t. C - sum_i y_i A_i >= 0
    """
    m = b.size
    sizes = [c.shape[0] for c in c_mats]
    nu = sum(sizes) + 1
    x = [np.eye(s) for s in sizes]
    s_m = [np.eye(s) for s in sizes]
    y = np.zeros(m)
    tau = kappa = 1.0
    a_flat = [a.reshape(m, -1) for a in a_mats]
    norm_b = 1.0 + np.linalg.norm(b)
    norm_c = 1.0 + np.sqrt(sum(np.sum(c * c) for c in c_mats))
    resid: dict[str, float] = {}

    def a_op(mats):
        out = np.zeros(m)
        for af, mat in zip(a_flat, mats):
            out += af @ mat.ravel()
        return out

    def a_adj(vec):
        return [np.tensordot(vec, a, axes=1) for a in a_mats]

    for it in range(opts.max_iter + 1):
        ax = a_op(x)
        aty = a_adj(y)
        f1 = ax - b * tau
        f2 = [at + sb - cb * tau for at, sb, cb in zip(aty, s_m, c_mats)]
        cx = sum(float(np.sum(cb * xb)) for cb, xb in zip(c_mats, x))
        by = float(b @ y)
        f3 = cx - by + kappa
        mu = (sum(float(np.sum(xb * sb)) for xb, sb in zip(x, s_m)) + tau * kappa) / nu
        f2norm = np.sqrt(sum(np.sum(f * f) for f in f2))
        resid = {
            "primal": float(np.linalg.norm(ax / tau - b) / norm_b),
            "dual": float(f2norm / tau / norm_c),
            "gap": float(abs(cx - by) / tau / (1.0 + abs(cx / tau) + abs(by / tau))),
            "mu": float(mu),
            "tau": float(tau),
            "kappa": float(kappa),
        }
        if max(resid["primal"], resid["dual"], resid["gap"]) <= opts.tol:
            return _HsdResult("optimal", y, x, s_m, tau, kappa, it, resid)
        if cx < 0:
            ray = float(np.linalg.norm(ax) / -cx)
            resid["ray"] = ray
            gate = opts.infeasibility_tol if accept_ray is None else max(opts.infeasibility_tol, opts.certificate_gate)
            if ray <= gate and (accept_ray is None or accept_ray(x, -cx)):
                return _HsdResult("dual_infeasible", y, x, s_m, tau, kappa, it, resid)
        if by > 0:
            ray = float(np.sqrt(sum(np.sum((at + sb) ** 2) for at, sb in zip(aty, s_m))) / by)
            if ray <= opts.infeasibility_tol:
                return _HsdResult("primal_infeasible", y, x, s_m, tau, kappa, it, resid)
        if it == opts.max_iter:
            break

        lx, ls, sinv = [], [], []
        for xb, sb in zip(x, s_m):
            lxb, lsb = _chol(xb), _chol(sb)
            if lxb is None or lsb is None:
                return _HsdResult("breakdown", y, x, s_m, tau, kappa, it, resid, "lost definiteness")
            lx.append(lxb)
            ls.append(lsb)
            sinv.append(sla.cho_solve((lsb, True), np.eye(sb.shape[0])))

        u_parts, gc_parts = [], []
        for a, cb, lxb, lsb in zip(a_mats, c_mats, lx, ls):
            s = cb.shape[0]
            t = sla.solve_triangular(lsb, a.transpose(1, 0, 2).reshape(s, -1), lower=True)
            t = t.reshape(s, m, s).transpose(1, 0, 2) @ lxb
            u_parts.append(t.reshape(m, -1))
            gc_parts.append((sla.solve_triangular(lsb, cb, lower=True) @ lxb).ravel())
        u_mat = np.hstack(u_parts)
        gc = np.concatenate(gc_parts)
        with np.errstate(over="ignore", invalid="ignore"):
            schur = u_mat @ u_mat.T
            q = u_mat @ gc
        cc = float(gc @ gc)
        if not (np.all(np.isfinite(schur)) and np.all(np.isfinite(q)) and np.isfinite(cc)):
            return _HsdResult("breakdown", y, x, s_m, tau, kappa, it, resid, "non-finite Schur complement")
        try:
            qb_v = _solve_psd(schur, np.column_stack([q + b]), opts.tikhonov)[:, 0] if m else np.zeros(0)
        except np.linalg.LinAlgError:
            return _HsdResult("breakdown", y, x, s_m, tau, kappa, it, resid, "Schur solve failed")

        def direction(sigma, corr=None):
            eta = 1.0 - sigma
            target = sigma * mu
            r_mats = []
            for i, (xb, sb_inv) in enumerate(zip(x, sinv)):
                r = target * sb_inv - xb + _sym(xb @ (eta * f2[i]) @ sb_inv)
                if corr is not None:
                    r -= _sym(corr[0][i] @ corr[1][i] @ sb_inv)
                r_mats.append(r)
            t_k = target - tau * kappa
            if corr is not None:
                t_k -= corr[2] * corr[3]
            t_k /= tau
            h = -eta * f1 - a_op(r_mats)
            u = _solve_psd(schur, h[:, None], opts.tikhonov)[:, 0] if m else np.zeros(0)
            cr = sum(float(np.sum(cb * r)) for cb, r in zip(c_mats, r_mats))
            denom = float((q - b) @ qb_v) - cc - kappa / tau
            dtau = (-eta * f3 - cr - float((q - b) @ u) - t_k) / denom
            dy = u + dtau * qb_v
            ady = a_adj(dy)
            ds = [-eta * f2[i] - ady[i] + c_mats[i] * dtau for i in range(len(x))]
            dx = []
            for i, (xb, sb_inv) in enumerate(zip(x, sinv)):
                d = target * sb_inv - xb - _sym(xb @ ds[i] @ sb_inv)
                if corr is not None:
                    d -= _sym(corr[0][i] @ corr[1][i] @ sb_inv)
                dx.append(_sym(d))
            dkappa = t_k - kappa / tau * dtau
            return dx, dy, ds, dtau, dkappa

        def step_length(dx, ds, dtau, dkappa):
            alpha = np.inf
            for lxb, lsb, dxb, dsb in zip(lx, ls, dx, ds):
                alpha = min(alpha, _max_step(lxb, dxb), _max_step(lsb, dsb))
            if dtau < 0:
                alpha = min(alpha, -tau / dtau)
            if dkappa < 0:
                alpha = min(alpha, -kappa / dkappa)
            return alpha

        try:
            with np.errstate(over="ignore", invalid="ignore"):
                dx, dy, ds, dtau, dkappa = _search_direction(direction, step_length, opts, x, s_m, tau, kappa, mu, nu)
        except np.linalg.LinAlgError:
            return _HsdResult("breakdown", y, x, s_m, tau, kappa, it, resid, "linear solve failed")
        if not (np.all(np.isfinite(dy)) and np.isfinite(dtau) and np.isfinite(dkappa)
                and all(np.all(np.isfinite(d)) for d in dx + ds)):
            return _HsdResult("breakdown", y, x, s_m, tau, kappa, it, resid, "non-finite search direction")
        alpha = min(1.0, opts.step_fraction * step_length(dx, ds, dtau, dkappa))
        if alpha < 1e-10:
            return _HsdResult("stalled", y, x, s_m, tau, kappa, it, resid, "step length collapsed")
        x = [_sym(xb + alpha * dxb) for xb, dxb in zip(x, dx)]
        s_m = [_sym(sb + alpha * dsb) for sb, dsb in zip(s_m, ds)]
        y = y + alpha * dy
        tau += alpha * dtau
        kappa += alpha * dkappa
    return _HsdResult("max_iter", y, x, s_m, tau, kappa, opts.max_iter, resid, "iteration cap")


def _search_direction(direction, step_length, opts, x, s_m, tau, kappa, mu, nu):
    if not opts.predictor_corrector:
        return direction(opts.centering)
    dx, dy, ds, dtau, dkappa = direction(0.0)
    a_aff = min(1.0, step_length(dx, ds, dtau, dkappa))
    mu_aff = (sum(float(np.sum((xb + a_aff * dxb) * (sb + a_aff * dsb)))
                  for xb, dxb, sb, dsb in zip(x, dx, s_m, ds))
              + (tau + a_aff * dtau) * (kappa + a_aff * dkappa)) / nu
    sigma = min(1.0, max(0.0, (mu_aff / mu) ** 3))
    return direction(sigma, (dx, ds, dtau, dkappa))


def solve(p: SdpProblem, opts: SolverOptions | None = None) -> SdpSolution:
    """Solve ``p``; INFEASIBLE is only returned with a certificate that verifies."""
    opts = opts or SolverOptions()
    param = _affine_parametrization(p, opts.equality_tol)
    if not isinstance(param, tuple):
        return SdpSolution(Status.INFEASIBLE, equality_certificate=param,
                           reason="equality constraints are inconsistent")
    red = _reduce(p, *param)
    m = red.c.size
    if m == 0:
        return _solve_fixed(p, red)

    # per-block scaling keeps the embedding well conditioned
    scales = []
    for a0, coeffs in zip(red.a0, red.coeffs):
        scales.append(max(1.0, float(np.abs(a0).max(initial=0.0)), float(np.abs(coeffs).max(initial=0.0))))
    c_mats = [a0 / s for a0, s in zip(red.a0, scales)]
    a_mats = [-coeffs / s for coeffs, s in zip(red.coeffs, scales)]
    c_scale = max(float(np.linalg.norm(red.c)), 1e-300)
    b = -red.c / c_scale if np.linalg.norm(red.c) > 0 else np.zeros(m)

    def to_certificate(x_blocks, strict):
        return [xb / (s * strict) for xb, s in zip(x_blocks, scales)]

    def accept(x_blocks, strict):
        return verify_infeasibility_certificate(p, to_certificate(x_blocks, strict))

    res = _hsd(c_mats, a_mats, b, opts, accept_ray=accept)
    z = red.z_p + red.basis @ (res.y / res.tau)
    if res.status == "optimal":
        dual = [xb / res.tau * c_scale / s for xb, s in zip(res.x, scales)]
        return SdpSolution(Status.OPTIMAL, z, float(p.objective @ z), dual, None,
                           res.iterations, res.residuals)
    if res.status == "dual_infeasible":
        cx = sum(float(np.sum(cb * xb)) for cb, xb in zip(c_mats, res.x))
        cert = to_certificate(res.x, -cx)
        return SdpSolution(Status.INFEASIBLE, None, None, cert, None, res.iterations, res.residuals,
                           "LMI is infeasible")
    reason = {
        "primal_infeasible": "objective is unbounded below",
        "max_iter": "iteration cap reached",
    }.get(res.status, res.reason or res.status)
    return SdpSolution(Status.INCONCLUSIVE, z, float(p.objective @ z), None, None,
                       res.iterations, res.residuals, reason)


def _solve_fixed(p: SdpProblem, red: _Reduction) -> SdpSolution:
    """No free variables: the LMI is just a PSD test of the constant blocks."""
    worst, worst_b, worst_v = np.inf, -1, None
    for i, a0 in enumerate(red.a0):
        w, v = np.linalg.eigh(a0)
        margin = w[0] / max(1.0, float(np.abs(w).max()))
        if margin < worst:
            worst, worst_b, worst_v = margin, i, v[:, 0] * np.sign(w[0] or 1.0)
    if worst >= -1e-9:
        return SdpSolution(Status.OPTIMAL, red.z_p.copy(), float(p.objective @ red.z_p),
                           [np.zeros_like(a0) for a0 in red.a0], None, 0,
                           {"primal": 0.0, "dual": 0.0, "gap": 0.0})
    cert = [np.zeros_like(a0) for a0 in red.a0]
    v = worst_v
    cert[worst_b] = np.outer(v, v) / -float(v @ red.a0[worst_b] @ v)
    return SdpSolution(Status.INFEASIBLE, None, None, cert, None, 0, {}, "fixed blocks are not PSD")
