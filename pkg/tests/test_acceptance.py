"""Acceptance criteria 1-11.

Each ``criterion_N`` returns ``(passed, detail)``. Under pytest the results
are collected and printed as one PASS/FAIL line per criterion in the
terminal summary; ``python3 tests/test_acceptance.py`` prints them directly.
"""
from __future__ import annotations

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from momentsep.criteria import (decomposition_error, moment_ppt_equivalence, symmetric_tms,
                                three_qubit_sym_nsc, two_qubit_four_atom_decomposition, two_qubit_sym_nsc)
from momentsep.errors import ExtractionError
from momentsep.hierarchy import (HierarchyOptions, Verdict, build_relaxation, extract_atoms, k0_of,
                                 run_hierarchy, verify_decomposition)
from momentsep.quantum import DensityMatrix, PartitionSpec, dicke_state, ppt_check, state_to_tensor
from momentsep.randgen import (haar_random_state, haar_random_symmetric_state, make_rng,
                               random_separable_symmetric)
from momentsep.sdp import verify_infeasibility_certificate
from momentsep.semialgebraic import for_partition, unit_sphere
from momentsep.tms import Tms, localizing_matrix, local_support, moment_matrix, tensor_to_tms, tms_from_atoms

SPHERE = unit_sphere()
EIG_TOL = 1e-9
RESULTS: dict[int, tuple[bool, str]] = {}


def _sym(rho: DensityMatrix) -> Tms:
    return symmetric_tms(rho)


def criterion_1() -> tuple[bool, str]:
    rng = make_rng(101)
    start = time.perf_counter()
    mismatches = 0
    counts = {v: 0 for v in Verdict}
    for i in range(200):
        rho = haar_random_symmetric_state(2, rank=1 + i % 3, rng=rng)
        y = _sym(rho)
        nsc = two_qubit_sym_nsc(y, EIG_TOL)
        ppt = ppt_check(rho, [0], EIG_TOL)[0]
        verdict = run_hierarchy(y, SPHERE, HierarchyOptions(seed=i)).verdict
        counts[verdict] += 1
        expected = Verdict.SEPARABLE if nsc else Verdict.ENTANGLED
        mismatches += (nsc != ppt) or (verdict is not expected)
    elapsed = time.perf_counter() - start
    detail = (f"{mismatches} disagreements in 200 "
              f"(sep {counts[Verdict.SEPARABLE]}, ent {counts[Verdict.ENTANGLED]}), {elapsed:.1f}s")
    return mismatches == 0 and elapsed < 60, detail


def criterion_2() -> tuple[bool, str]:
    ok = True
    parts = []
    for n in (2, 3, 4):
        rho = DensityMatrix.from_vector(dicke_state(n, 1), (2,) * n)
        y = _sym(rho)
        start = time.perf_counter()
        cert = run_hierarchy(y, SPHERE)
        elapsed = time.perf_counter() - start
        verified = False
        if cert.verdict is Verdict.ENTANGLED:
            relax = build_relaxation(y, SPHERE, cert.order)
            verified = verify_infeasibility_certificate(relax.problem, cert.witness.as_certificate())
        good = cert.verdict is Verdict.ENTANGLED and cert.order == k0_of(y) and verified and elapsed < 10
        ok &= good
        parts.append(f"N={n} {cert.verdict.value} k={cert.order} {elapsed:.2f}s")
    return ok, "; ".join(parts)


def criterion_3() -> tuple[bool, str]:
    ok = True
    parts = []
    for n in (2, 3, 4):
        rng = make_rng(300 + n)
        good = 0
        for i in range(50):
            y = _sym(random_separable_symmetric(n, rng=rng))
            cert = run_hierarchy(y, SPHERE, HierarchyOptions(objectives_per_order=6, seed=i))
            if cert.verdict is not Verdict.SEPARABLE:
                continue
            dec = cert.decomposition
            _, err = verify_decomposition(dec, y, SPHERE, 1e-6)
            on_sphere = np.abs(np.linalg.norm(dec.points, axis=1) - 1).max() <= 1e-6
            good += err <= 1e-6 and on_sphere
        ok &= good >= 0.95 * 50
        parts.append(f"N={n} {good}/50")
    return ok, "; ".join(parts)


def criterion_4() -> tuple[bool, str]:
    rng = make_rng(404)
    states = [_sym(random_separable_symmetric(2, rng=rng)) for _ in range(500)]
    start = time.perf_counter()
    worst_err = worst_sphere = 0.0
    max_r = 0
    for y in states:
        dec = two_qubit_four_atom_decomposition(y, rng=rng)
        max_r = max(max_r, dec.rank)
        worst_err = max(worst_err, decomposition_error(dec, y))
        worst_sphere = max(worst_sphere, float(np.abs(np.linalg.norm(dec.points, axis=1) - 1).max()))
    elapsed = time.perf_counter() - start
    ok = max_r <= 4 and worst_err <= 1e-8 and worst_sphere <= 1e-8 and elapsed < 10
    return ok, f"max r {max_r}, max error {worst_err:.1e}, sphere {worst_sphere:.1e}, {elapsed:.2f}s"


def _min_rank(n: int, samples: int, seed: int) -> tuple[int | None, int]:
    rng = make_rng(seed)
    ranks = []
    for i in range(samples):
        y = _sym(random_separable_symmetric(n, rng=rng))
        cert = run_hierarchy(y, SPHERE, HierarchyOptions(seed=i))
        if cert.verdict is Verdict.SEPARABLE:
            ranks.append(cert.decomposition.rank)
    return (min(ranks) if ranks else None), len(ranks)


def criterion_5() -> tuple[bool, str]:
    r2, s2 = _min_rank(2, 2000, 502)
    r3, s3 = _min_rank(3, 500, 503)
    ok = r2 == 4 and r3 is not None and r3 <= 6
    return ok, f"N=2 min r {r2} ({s2}/2000 separable); N=3 min r {r3} ({s3}/500 separable)"


def criterion_6() -> tuple[bool, str]:
    rng = make_rng(606)
    mismatches = 0
    entangled = 0
    for i in range(300):
        if i % 2:
            rho = random_separable_symmetric(3, m=1 + i % 7, rng=rng)
        else:
            rho = haar_random_symmetric_state(3, rank=1 + (i // 2) % 4, rng=rng)
        nsc = three_qubit_sym_nsc(_sym(rho), EIG_TOL)
        ppt = ppt_check(rho, [0], EIG_TOL)[0]
        mismatches += nsc != ppt
        entangled += not ppt
    return mismatches == 0, f"{mismatches} disagreements in 300 ({entangled} NPT)"


def criterion_7() -> tuple[bool, str]:
    rng = make_rng(707)
    mismatches = 0
    npt = 0
    for i in range(200):
        n = 2 if i < 100 else 4
        if i % 3 == 2:
            rho = random_separable_symmetric(n, m=1 + i % 6, rng=rng)
        else:
            rho = haar_random_symmetric_state(n, rank=1 + i % (n + 1), rng=rng)
        mom, ppt = moment_ppt_equivalence(state_to_tensor(rho, PartitionSpec.symmetric(n)), EIG_TOL)
        mismatches += mom != ppt
        npt += not ppt
    return mismatches == 0, f"{mismatches} disagreements in 200 ({npt} NPT)"


def criterion_8() -> tuple[bool, str]:
    rng = make_rng(808)
    g = SPHERE.constraints[0][0]
    worst_eig = worst_loc = 0.0
    for _ in range(1000):
        r = int(rng.integers(1, 11))
        pts = rng.standard_normal((r, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        z = tms_from_atoms(pts, rng.exponential(size=r), 6)
        for k in (1, 2, 3):
            m = moment_matrix(z, k)
            worst_eig = min(worst_eig, float(np.linalg.eigvalsh(m)[0]) / max(1.0, np.abs(m).max()))
            worst_loc = max(worst_loc, float(np.abs(localizing_matrix(g, z, k)).max()))
    ok = worst_eig >= -1e-10 and worst_loc <= 1e-10
    return ok, f"min eigenvalue {worst_eig:.1e}, max localizing entry {worst_loc:.1e}"


def criterion_9() -> tuple[bool, str]:
    rng = make_rng(909)
    failures = 0
    worst_pt = worst_w = 0.0
    for _ in range(200):
        r = int(rng.integers(1, 7))
        pts = rng.standard_normal((r, 3))
        pts /= np.linalg.norm(pts, axis=1, keepdims=True)
        w = rng.exponential(size=r)
        w /= w.sum()
        try:
            dec = extract_atoms(tms_from_atoms(pts, w, 6), 3, rng=rng)
        except ExtractionError:
            failures += 1
            continue
        if dec.rank != r:
            failures += 1
            continue
        dist = np.linalg.norm(pts[:, None, :] - dec.points[None, :, :], axis=2)
        match = dist.argmin(axis=1)
        if len(set(match)) != r:
            failures += 1
            continue
        worst_pt = max(worst_pt, float(dist[np.arange(r), match].max()))
        worst_w = max(worst_w, float(np.abs(dec.weights[match] - w).max()))
    ok = failures == 0 and worst_pt <= 1e-6 and worst_w <= 1e-6
    return ok, f"{failures} failures, max atom error {worst_pt:.1e}, max weight error {worst_w:.1e}"


def criterion_10() -> tuple[bool, str]:
    rng = make_rng(1010)
    verdicts = {v: 0 for v in Verdict}
    truly_entangled = 0
    for i in range(100):
        if i % 4 == 3:
            spec = PartitionSpec.product((2, 2), pure=False)
            rho = haar_random_state(4, rank=1 + i % 4, rng=rng, dims=(2, 2))
        else:
            n = 2 + i % 3
            spec = PartitionSpec.symmetric(n)
            if i % 5 == 0:
                rho = DensityMatrix.from_vector(dicke_state(n, 1), (2,) * n)
            else:
                rho = haar_random_symmetric_state(n, rank=1 + i % 3, rng=rng)
        truly_entangled += not ppt_check(rho, [0], EIG_TOL)[0]
        restricted = spec.with_support(local_support(spec))
        y = tensor_to_tms(state_to_tensor(rho, restricted))
        verdicts[run_hierarchy(y, for_partition(spec), HierarchyOptions(seed=i)).verdict] += 1
    ok = verdicts[Verdict.ENTANGLED] == 0
    return ok, (f"ENTANGLED {verdicts[Verdict.ENTANGLED]}, SEPARABLE {verdicts[Verdict.SEPARABLE]}, "
                f"INCONCLUSIVE {verdicts[Verdict.INCONCLUSIVE]} ({truly_entangled} NPT inputs)")


def criterion_11() -> tuple[bool, str]:
    import test_sdp

    checks = [
        test_sdp.TestWorkedExamples().test_disk_minimum,
        test_sdp.TestWorkedExamples().test_empty_intersection,
        test_sdp.TestWorkedExamples().test_fixed_variable,
        test_sdp.test_weak_duality_random_instances,
        test_sdp.test_certificate_soundness_random_instances,
    ]
    failed = []
    for check in checks:
        try:
            check()
        except AssertionError:
            failed.append(check.__name__)
    return not failed, "worked examples and 2x100 random instances" + (f"; failed {failed}" if failed else "")


CRITERIA = {i: globals()[f"criterion_{i}"] for i in range(1, 12)}


def report_line(i: int, ok: bool, detail: str) -> str:
    return f"criterion {i:2d}: {'PASS' if ok else 'FAIL'}  {detail}"


@pytest.mark.parametrize("i", list(CRITERIA))
def test_criterion(i):
    ok, detail = CRITERIA[i]()
    RESULTS[i] = (ok, detail)
    assert ok, report_line(i, ok, detail)


if __name__ == "__main__":
    selected = [int(a) for a in sys.argv[1:]] or list(CRITERIA)
    for i in selected:
        start = time.perf_counter()
        ok, detail = CRITERIA[i]()
        print(report_line(i, ok, detail) + f"  [{time.perf_counter() - start:.1f}s]", flush=True)
