"""Separability of multipartite quantum states via truncated moment problems."""
from __future__ import annotations

from .errors import DomainError, ExtractionError, IncompleteTmsError, IntegrityError
from .hierarchy import (Decomposition, HierarchyOptions, SeparabilityCertificate, Verdict, build_relaxation,
                        extract_atoms, k0_of, run_hierarchy, verify_decomposition)
from .quantum import DensityMatrix, PartitionSpec, StateTensor, state_to_tensor, tensor_to_state
from .semialgebraic import SemialgebraicSet, for_partition, unit_sphere
from .tms import Tms, moment_matrix, tensor_to_tms

__version__ = "0.1.0"

__all__ = [
    "Decomposition", "DensityMatrix", "DomainError", "ExtractionError", "HierarchyOptions",
    "IncompleteTmsError", "IntegrityError", "PartitionSpec", "SemialgebraicSet",
    "SeparabilityCertificate", "StateTensor", "Tms", "Verdict", "build_relaxation", "extract_atoms",
    "for_partition", "k0_of", "moment_matrix", "run_hierarchy", "state_to_tensor", "tensor_to_state",
    "tensor_to_tms", "unit_sphere", "verify_decomposition",
]
