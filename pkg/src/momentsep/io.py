"""JSON readers and writers for states, tensors and moment sequences."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DomainError
from .quantum import DensityMatrix, PartitionSpec, StateTensor
from .tms import Tms


def density_to_json(rho: DensityMatrix) -> dict:
    m = np.asarray(rho.matrix)
    return {"dims": list(rho.dims), "re": m.real.tolist(), "im": m.imag.tolist()}


def density_from_json(data: dict, check_psd: bool = True) -> DensityMatrix:
    re = np.asarray(data["re"], dtype=float)
    im = np.asarray(data.get("im", np.zeros_like(re)), dtype=float)
    return DensityMatrix(re + 1j * im, tuple(int(d) for d in data["dims"]), check_psd=check_psd)


def tensor_to_json(x: StateTensor) -> dict:
    return {
        "partition": x.partition.to_json(),
        "coords": [{"mu": list(mu), "value": float(v)} for mu, v in x.items()],
    }


def tensor_from_json(data: dict) -> StateTensor:
    spec = PartitionSpec.from_json(data["partition"])
    shape = tuple(spec.class_t(spec.class_of(i)) + 1 for i in range(spec.n_parties))
    coords = np.zeros(shape)
    seen = np.zeros(shape, dtype=bool)
    for entry in data["coords"]:
        mu = tuple(int(m) for m in entry["mu"])
        if len(mu) != len(shape) or any(not 0 <= m < s for m, s in zip(mu, shape)):
            raise DomainError(f"index {mu} does not fit the partition")
        coords[mu] = float(entry["value"])
        seen[mu] = True
    if not seen.all():
        raise DomainError(f"tensor has {int(seen.sum())} of {seen.size} coordinates")
    return StateTensor(spec, coords)


def detect(data: dict) -> str:
    if "re" in data and "dims" in data:
        return "density"
    if "coords" in data and "partition" in data:
        return "tensor"
    if "moments" in data:
        return "tms"
    raise DomainError("unrecognized input: expected a density matrix, tensor or tms document")


def load(path: str | Path) -> DensityMatrix | StateTensor | Tms:
    """Read any of the three documented JSON inputs."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise DomainError(f"{path}: top-level JSON value must be an object")
    kind = detect(data)
    try:
        if kind == "density":
            return density_from_json(data)
        if kind == "tensor":
            return tensor_from_json(data)
        return Tms.from_json(data)
    except (KeyError, TypeError) as exc:
        raise DomainError(f"{path}: malformed {kind} document ({exc})") from None


def dump(obj: Any, path: str | Path | None = None) -> str:
    """Serialize ``obj`` (with ``to_json`` if it has one); write to ``path`` when given."""
    if hasattr(obj, "to_json"):
        obj = obj.to_json()
    text = json.dumps(obj, indent=2, default=_default)
    if path is not None:
        Path(path).write_text(text + "\n")
    return text


def _default(o: Any) -> Any:
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer, np.bool_)):
        return o.item()
    if hasattr(o, "value"):
        return o.value
    raise TypeError(f"cannot serialize {type(o).__name__}")
