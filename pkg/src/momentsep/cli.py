"""Command-line interface: ``momentsep certify|decompose|bench|witness-verify``.

Exit codes: 0 separable (or success), 2 entangled, 3 inconclusive, 1 error.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import criteria
from .errors import DomainError, ExtractionError, IntegrityError
from .hierarchy import (Decomposition, HierarchyOptions, SeparabilityCertificate, Verdict, Witness,
                        build_relaxation, decomposition_to_states, mixture, run_hierarchy,
                        verify_decomposition)
from .io import dump, load
from .quantum import (DensityMatrix, PartitionSpec, StateTensor, dicke_state, state_to_tensor,
                      symmetric_projector, tensor_to_state)
from .randgen import (haar_random_state, haar_random_symmetric_state, make_rng, random_product_state,
                      random_separable_symmetric)
from .sdp import SolverOptions, verify_infeasibility_certificate
from .semialgebraic import SemialgebraicSet, for_partition, unit_sphere
from .tms import Tms, admissible_support, local_support, tensor_to_tms

log = logging.getLogger("momentsep")

EXIT = {Verdict.SEPARABLE: 0, Verdict.ENTANGLED: 2, Verdict.INCONCLUSIVE: 3}


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    gen: str | None = None
    partition: PartitionSpec | None = None
    partial: str | None = None
    options: HierarchyOptions = field(default_factory=HierarchyOptions)
    seed: int = 0
    out: str | None = None
    fmt: str = "json"
    extra: dict = field(default_factory=dict)


@dataclass
class Problem:
    """A resolved input: the moment data, the set K and, when known, the state."""

    tms: Tms
    k_set: SemialgebraicSet
    spec: PartitionSpec | None
    state: DensityMatrix | None
    source: dict


# --------------------------------------------------------------------------
# Input resolution


def generate(spec_text: str, rng, pure: bool | None = None) -> tuple[DensityMatrix, PartitionSpec]:
    """Build a state from ``kind:args``.

    Kinds: ``dicke:N[:zeros]``, ``coherent:N``, ``ps:N``, ``haar:N[:rank]``,
    ``sep:N[:m]`` (symmetric qubits) and ``product:d1,d2,...``,
    ``haar-full:d1,d2,...`` (general parties).
    """
    kind, _, rest = spec_text.partition(":")
    args = [a for a in rest.split(":") if a]
    try:
        if kind in {"dicke", "coherent", "ps", "haar", "sep"}:
            n = int(args[0])
            spec = PartitionSpec.symmetric(n)
            if kind == "dicke":
                zeros = int(args[1]) if len(args) > 1 else 1
                return DensityMatrix.from_vector(dicke_state(n, zeros), (2,) * n), spec
            if kind == "coherent":
                return DensityMatrix.from_vector(dicke_state(n, n), (2,) * n), spec
            if kind == "ps":
                p = symmetric_projector(n)
                return DensityMatrix(p / np.trace(p).real, (2,) * n), spec
            if kind == "haar":
                rank = int(args[1]) if len(args) > 1 else None
                return haar_random_symmetric_state(n, rank, rng), spec
            m = int(args[1]) if len(args) > 1 else None
            return random_separable_symmetric(n, m, rng), spec
        if kind in {"product", "haar-full"}:
            dims = tuple(int(d) for d in args[0].split(","))
            spec = PartitionSpec.product(dims, pure)
            if kind == "product":
                return random_product_state(spec, rng), spec
            return haar_random_state(int(np.prod(dims)), None, rng, dims), spec
    except (IndexError, ValueError) as exc:
        raise DomainError(f"bad generator spec {spec_text!r}: {exc}") from None
    raise DomainError(f"unknown generator {kind!r}")


def _partial_support(pattern: str, spec: PartitionSpec):
    if pattern == "local":
        return local_support(spec)
    if pattern.startswith("degree:"):
        try:
            deg = int(pattern.split(":", 1)[1])
        except ValueError:
            raise DomainError(f"bad --partial pattern {pattern!r}") from None
        return frozenset(a for a in admissible_support(spec) if sum(a) <= deg)
    raise DomainError(f"unknown --partial pattern {pattern!r} (use 'local' or 'degree:K')")


def resolve(cfg: RunConfig) -> Problem:
    rng = make_rng(cfg.seed)
    state = None
    spec = cfg.partition
    pure = cfg.extra.get("pure")
    if cfg.gen is not None:
        state, gen_spec = generate(cfg.gen, rng, pure)
        spec = spec or gen_spec
        source = {"gen": cfg.gen}
        obj = state
    else:
        obj = load(cfg.input)
        source = {"input": str(cfg.input)}
    if isinstance(obj, DensityMatrix):
        state = obj
        if spec is None:
            if len(set(state.dims)) == 1 and state.dims[0] == 2 and len(state.dims) > 1:
                spec = PartitionSpec.symmetric(len(state.dims))
            else:
                spec = PartitionSpec.product(state.dims, pure)
        if cfg.partial:
            spec = spec.with_support(_partial_support(cfg.partial, spec))
        x = state_to_tensor(state, spec)
        tms = tensor_to_tms(x)
    elif isinstance(obj, StateTensor):
        spec = spec or obj.partition
        if cfg.partial:
            spec = spec.with_support(_partial_support(cfg.partial, spec))
        x = StateTensor(spec, obj.coords)
        state = tensor_to_state(x)
        tms = tensor_to_tms(x)
    else:
        tms = obj
        if cfg.partial:
            raise DomainError("--partial applies to state or tensor inputs")
        if spec is not None and spec.n_vars != tms.n:
            raise DomainError("tms variable count does not match the partition")
    if spec is not None:
        k_set = for_partition(spec)
    elif tms.n == 3:
        k_set = unit_sphere()
    else:
        raise DomainError("a raw tms needs --partition or --symmetric to define the set K")
    return Problem(tms, k_set, spec, state, source)


# --------------------------------------------------------------------------
# Shortcuts


def _two_qubit_symmetric(p: Problem) -> bool:
    return (p.spec is not None and p.spec.is_fully_symmetric and p.spec.parties == (2, 2)
            and p.spec.known_support is None and p.spec.purity_flags == (True,))


def shortcuts(p: Problem) -> dict:
    """Exact closed-form tests for symmetric two- and three-qubit inputs."""
    out: dict = {}
    spec = p.spec
    if spec is None or not spec.is_fully_symmetric or set(spec.parties) != {2}:
        return out
    if spec.known_support is not None or not spec.purity_flags[0]:
        return out
    n = spec.n_parties
    try:
        if n == 2:
            out["two_qubit_nsc"] = criteria.two_qubit_sym_nsc(p.tms)
        elif n == 3:
            out["three_qubit_nsc"] = criteria.three_qubit_sym_nsc(p.tms)
        if p.state is not None:
            claim = criteria.ppt_rank_sufficient(p.state)
            out["ppt_rank"] = None if claim is None else claim.value
    except (DomainError, KeyError) as exc:
        out["error"] = str(exc)
    return out


# --------------------------------------------------------------------------
# Commands


def _certify(p: Problem, cfg: RunConfig) -> tuple[SeparabilityCertificate, dict]:
    cuts = shortcuts(p)
    cert = run_hierarchy(p.tms, p.k_set, cfg.options)
    if cert.verdict is Verdict.INCONCLUSIVE and cuts.get("two_qubit_nsc"):
        dec = criteria.two_qubit_four_atom_decomposition(p.tms, rng=cfg.seed)
        ok, err = verify_decomposition(dec, p.tms, p.k_set, cfg.options.decomposition_tol)
        if ok:
            cert.verdict = Verdict.SEPARABLE
            cert.decomposition = dec
            cert.diagnostics["fallback"] = "two-qubit four-atom decomposition"
    if cert.decomposition is not None:
        cert.decomposition.partition = p.spec
    return cert, cuts


def _envelope(cfg: RunConfig, p: Problem, payload: dict) -> dict:
    return {
        **payload,
        "seed": cfg.seed,
        "source": p.source,
        "partition": None if p.spec is None else p.spec.to_json(),
        "options": {
            "k_max": cfg.options.k_max,
            "objectives_per_order": cfg.options.objectives_per_order,
            "rank_tol": cfg.options.rank_tol,
            "decomposition_tol": cfg.options.decomposition_tol,
            "facial_reduction": cfg.options.facial_reduction,
        },
    }


def cmd_certify(cfg: RunConfig) -> int:
    p = resolve(cfg)
    cert, cuts = _certify(p, cfg)
    doc = _envelope(cfg, p, {**cert.to_json(), "shortcuts": cuts})
    _emit(doc, cfg, _human_certificate)
    return EXIT[cert.verdict]


def _states_payload(dec: Decomposition, p: Problem) -> list[dict]:
    atoms = []
    if p.spec is None:
        return [{"w": float(w), "point": pt.tolist()} for w, pt in zip(dec.weights, dec.points)]
    offsets = p.spec.class_offsets()
    from .quantum import local_state
    for w, pt in zip(dec.weights, dec.points):
        local = []
        for ci in range(len(p.spec.symmetry_classes)):
            block = pt[offsets[ci]: offsets[ci] + p.spec.class_t(ci)]
            rho = local_state(block, p.spec.class_dim(ci))
            local.append({"parties": list(p.spec.symmetry_classes[ci]),
                          "dims": [p.spec.class_dim(ci)], "re": rho.real.tolist(), "im": rho.imag.tolist()})
        atoms.append({"w": float(w), "point": pt.tolist(), "local_states": local})
    return atoms


def cmd_decompose(cfg: RunConfig) -> int:
    p = resolve(cfg)
    cuts = shortcuts(p)
    method = "hierarchy"
    dec = None
    verdict = None
    if cuts.get("two_qubit_nsc"):
        dec = criteria.two_qubit_four_atom_decomposition(p.tms, rng=cfg.seed)
        method = "two-qubit four-atom decomposition"
        verdict = Verdict.SEPARABLE
    elif cuts.get("two_qubit_nsc") is False:
        verdict = Verdict.ENTANGLED
    else:
        cert, _ = _certify(p, cfg)
        verdict = cert.verdict
        dec = cert.decomposition
    doc: dict = {"verdict": verdict.value, "method": method, "shortcuts": cuts}
    if dec is not None:
        ok, err = verify_decomposition(dec, p.tms, p.k_set, cfg.options.decomposition_tol)
        doc["atoms"] = _states_payload(dec, p)
        doc["rank"] = dec.rank
        doc["reconstruction_error"] = err
        doc["verified"] = ok
        if p.state is not None and p.spec is not None and p.spec.known_support is None:
            states = decomposition_to_states(dec, p.spec)
            doc["state_error"] = float(np.abs(mixture(states) - p.state.matrix).max())
    _emit(_envelope(cfg, p, doc), cfg, _human_decomposition)
    return EXIT[verdict]


def cmd_witness_verify(cfg: RunConfig) -> int:
    cert_path = cfg.extra.get("certificate")
    if not cert_path:
        raise DomainError("witness-verify needs --certificate PATH")
    try:
        doc = json.loads(Path(cert_path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read certificate: {exc}") from None
    if doc.get("witness") is None:
        raise DomainError("certificate has no witness")
    witness = Witness.from_json(doc["witness"])
    if cfg.partition is None and doc.get("partition") and cfg.input is not None:
        part = PartitionSpec.from_json(doc["partition"])
        cfg.partition = part.with_support(None)
    p = resolve(cfg)
    facial = doc.get("options", {}).get("facial_reduction", True)
    relax = build_relaxation(p.tms, p.k_set, witness.order, None, facial)
    try:
        ok = verify_infeasibility_certificate(relax.problem, witness.as_certificate())
    except (DomainError, ValueError) as exc:
        log.error("witness does not match the problem: %s", exc)
        ok = False
    result = {"valid": bool(ok), "order": witness.order}
    _emit(result, cfg, lambda d: f"witness {'VALID' if d['valid'] else 'INVALID'} at order {d['order']}")
    return 0 if ok else 1


def _bench_one(n: int, kind: str, seed: int, options: HierarchyOptions) -> dict:
    rng = make_rng(seed)
    if kind == "entangled":
        rho = haar_random_symmetric_state(n, None, rng)
    else:
        rho = random_separable_symmetric(n, None, rng)
    y = tensor_to_tms(state_to_tensor(rho, PartitionSpec.symmetric(n)))
    opts = HierarchyOptions(**{**options.__dict__, "seed": seed})
    start = time.perf_counter()
    cert = run_hierarchy(y, unit_sphere(), opts)
    return {
        "verdict": cert.verdict.value,
        "order": cert.order,
        "rank": None if cert.decomposition is None else cert.decomposition.rank,
        "seconds": time.perf_counter() - start,
    }


def cmd_bench(cfg: RunConfig) -> int:
    ns = cfg.extra.get("ns") or [2, 3]
    samples = cfg.extra.get("samples", 20)
    kinds = {"timing": ["entangled", "separable"], "minrank": ["separable"],
             "both": ["entangled", "separable"]}[cfg.extra.get("protocol", "both")]
    workers = max(1, cfg.extra.get("workers", 1))
    rows = []
    for n in ns:
        for kind in kinds:
            seeds = [cfg.seed * 1_000_003 + 7919 * n + 104_729 * (kind == "entangled") + i
                     for i in range(samples)]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                runs = list(pool.map(lambda s: _bench_one(n, kind, s, cfg.options), seeds))
            counts: dict = {}
            orders: dict = {}
            for r in runs:
                counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
                orders[str(r["order"])] = orders.get(str(r["order"]), 0) + 1
            ranks = [r["rank"] for r in runs if r["rank"] is not None]
            rows.append({
                "N": n, "kind": kind, "tested": samples, "verdicts": counts, "orders": orders,
                "mean_seconds": float(np.mean([r["seconds"] for r in runs])),
                "min_r": min(ranks) if ranks else None,
                "count_min_r": ranks.count(min(ranks)) if ranks else 0,
            })
    doc = {"seed": cfg.seed, "rows": rows}
    if cfg.fmt == "csv":
        buf = _io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["N", "kind", "tested", "separable", "entangled", "inconclusive",
                         "mean_seconds", "min_r", "count_min_r"])
        for r in rows:
            v = r["verdicts"]
            writer.writerow([r["N"], r["kind"], r["tested"], v.get("SEPARABLE", 0), v.get("ENTANGLED", 0),
                             v.get("INCONCLUSIVE", 0), f"{r['mean_seconds']:.4f}", r["min_r"], r["count_min_r"]])
        _write(buf.getvalue(), cfg.out)
    else:
        _emit(doc, cfg, _human_bench)
    return 0


# --------------------------------------------------------------------------
# Output


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit(doc: dict, cfg: RunConfig, human) -> None:
    if cfg.fmt == "human":
        if cfg.out:
            dump(doc, cfg.out)
        _write(human(doc), None)
    else:
        text = dump(doc)
        _write(text, cfg.out)


def _human_certificate(doc: dict) -> str:
    lines = [f"verdict: {doc['verdict']}"]
    if doc.get("order") is not None:
        lines.append(f"order:   {doc['order']}")
    if doc.get("shortcuts"):
        lines.append("shortcuts: " + ", ".join(f"{k}={v}" for k, v in doc["shortcuts"].items()))
    if doc.get("atoms"):
        lines.append(f"atoms:   {len(doc['atoms'])}")
        for a in doc["atoms"]:
            lines.append(f"  w={a['w']:.6f}  x=({', '.join(f'{c:+.6f}' for c in a['point'])})")
    if doc.get("witness"):
        lines.append("witness: infeasibility certificate verified")
    return "\n".join(lines)


def _human_decomposition(doc: dict) -> str:
    lines = [f"verdict: {doc['verdict']} ({doc['method']})"]
    if "atoms" in doc:
        lines.append(f"rank {doc['rank']}, reconstruction error {doc['reconstruction_error']:.2e}")
        for a in doc["atoms"]:
            lines.append(f"  w={a['w']:.6f}  x=({', '.join(f'{c:+.6f}' for c in a['point'])})")
    return "\n".join(lines)


def _human_bench(doc: dict) -> str:
    lines = [f"{'N':>3} {'kind':>10} {'tested':>6} {'sep':>5} {'ent':>5} {'inc':>5} {'mean s':>8} {'min r':>6} {'#min':>5}"]
    for r in doc["rows"]:
        v = r["verdicts"]
        lines.append(f"{r['N']:>3} {r['kind']:>10} {r['tested']:>6} {v.get('SEPARABLE', 0):>5} "
                     f"{v.get('ENTANGLED', 0):>5} {v.get('INCONCLUSIVE', 0):>5} {r['mean_seconds']:>8.3f} "
                     f"{str(r['min_r']):>6} {r['count_min_r']:>5}")
    return "\n".join(lines)


# --------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--input", help="state, tensor or tms JSON file")
    src.add_argument("--gen", help="generator spec, e.g. dicke:3, sep:4, haar:2, product:2,3")
    common.add_argument("--partition", help="partition spec as JSON (parties, symmetry_classes, purity_flags)")
    common.add_argument("--symmetric", type=int, metavar="N", help="N identical qubits on the symmetric subspace")
    purity = common.add_mutually_exclusive_group()
    purity.add_argument("--pure", dest="pure", action="store_const", const=True, default=None,
                        help="restrict atoms to pure local states")
    purity.add_argument("--mixed", dest="pure", action="store_const", const=False,
                        help="allow mixed local states")
    common.add_argument("--partial", metavar="PATTERN", help="keep only some moments: 'local' or 'degree:K'")
    common.add_argument("--kmax", type=int, help="highest relaxation order (default k0 + 2)")
    common.add_argument("--objectives", type=int, default=6, help="random objectives per order")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=1e-6, help="reconstruction tolerance")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--format", dest="fmt", choices=["json", "human", "csv"], default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="momentsep", description="Separability certificates via truncated moment problems.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("certify", parents=[common], help="decide separability and emit a certificate")
    sub.add_parser("decompose", parents=[common], help="emit an explicit product-state decomposition")
    wv = sub.add_parser("witness-verify", parents=[common], help="re-check an entanglement certificate")
    wv.add_argument("--certificate", required=True)
    bench = sub.add_parser("bench", parents=[common], help="timing and minimal-rank experiments")
    bench.add_argument("--ns", default="2,3", help="comma-separated qubit counts")
    bench.add_argument("--samples", type=int, default=20)
    bench.add_argument("--protocol", choices=["timing", "minrank", "both"], default="both")
    bench.add_argument("--workers", type=int, default=1)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    spec = None
    if args.partition and args.symmetric:
        raise DomainError("use either --partition or --symmetric")
    if args.partition:
        try:
            data = json.loads(args.partition)
        except json.JSONDecodeError as exc:
            raise DomainError(f"--partition is not valid JSON: {exc}") from None
        if args.pure is not None and data.get("purity_flags") is None:
            n_cls = len(data.get("symmetry_classes") or data["parties"])
            data["purity_flags"] = [args.pure] * n_cls
        spec = PartitionSpec.from_json(data)
    elif args.symmetric:
        spec = PartitionSpec.symmetric(args.symmetric, 2, True if args.pure is None else args.pure)
    if args.command != "bench" and args.input is None and args.gen is None:
        raise DomainError("one of --input or --gen is required")
    if args.kmax is not None and args.kmax < 1:
        raise DomainError("--kmax must be positive")
    if args.objectives < 1:
        raise DomainError("--objectives must be at least 1")
    options = HierarchyOptions(k_max=args.kmax, objectives_per_order=args.objectives, seed=args.seed,
                               decomposition_tol=args.tol, solver=SolverOptions())
    extra: dict = {"pure": args.pure}
    if args.command == "witness-verify":
        extra["certificate"] = args.certificate
    if args.command == "bench":
        extra.update(ns=[int(n) for n in args.ns.split(",") if n], samples=args.samples,
                     protocol=args.protocol, workers=args.workers)
    return RunConfig(args.command, args.input, args.gen, spec, args.partial, options, args.seed,
                     args.out, args.fmt, extra)


COMMANDS = {
    "certify": cmd_certify,
    "decompose": cmd_decompose,
    "witness-verify": cmd_witness_verify,
    "bench": cmd_bench,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[cfg.command](cfg)
    except (DomainError, IntegrityError, ExtractionError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
