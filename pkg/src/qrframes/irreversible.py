"""Truncation ``|n·p⟩ ↦ |n⟩`` and the irreversible change of frame built on it."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import FrameError, GroupSpecError, ModelError
from .groups import SubgroupDecomposition
from .hilbert import QuantumState, Regular, SystemModel, normalize
from .reversible import _check_dimension, build_dense_operator, change_frame


@dataclass(frozen=True)
class TruncationMap:
    decomposition: SubgroupDecomposition

    def __call__(self, g: int) -> int:
        return self.decomposition.normal_part(g)

    def matrix(self) -> np.ndarray:
        """``|G|×|G|`` matrix; rows outside N are zero since N-labels keep their group index."""
        n = self.decomposition.parent.order
        m = np.zeros((n, n))
        for g in range(n):
            m[self(g), g] = 1.0
        return m

    def preimage_counts(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for g in range(self.decomposition.parent.order):
            counts[self(g)] = counts.get(self(g), 0) + 1
        return counts


def truncation_map(model: SystemModel) -> TruncationMap:
    if not isinstance(model, Regular):
        raise ModelError("only regular systems can be truncated")
    if model.group.decomposition is None:
        raise GroupSpecError(f"{model.group.name} has no subgroup decomposition attached")
    return TruncationMap(model.group.decomposition)


def _slots(psi: QuantumState, slots: Iterable[int]) -> list[int]:
    out = sorted(set(int(s) for s in slots))
    for s in out:
        if not 0 <= s < psi.size:
            raise IndexError(f"system index {s} out of range for {psi.size} systems")
    return out


def truncate_state(psi: QuantumState, slots: Iterable[int]) -> QuantumState:
    """Apply truncation to the given slots. Colliding terms add; no renormalization.

    The resulting norm is recorded in ``meta["norm"]``.
    """
    slots = _slots(psi, slots)
    maps = {s: truncation_map(psi.models[s]) for s in slots}
    out: dict[tuple, complex] = {}
    for labels, amp in psi.terms.items():
        new = tuple(maps[k](x) if k in maps else x for k, x in enumerate(labels))
        out[new] = out.get(new, 0j) + amp
    result = QuantumState(psi.frame, psi.models, out, psi.meta)
    return result.with_meta(norm=result.norm)


def change_frame_irreversible(psi: QuantumState, target: int) -> QuantumState:
    """Truncate every system onto N, renormalize, then change frame coherently to ``target``.

    ``target`` must be an N-system. The norm before renormalization is kept
    in ``meta["norm_factor"]``.
    """
    if isinstance(target, bool) or not isinstance(target, int) or not 0 <= target < psi.size:
        raise IndexError(f"system index {target!r} out of range for {psi.size} systems")
    model = psi.models[target]
    if not isinstance(model, Regular) or model.kind != "N":
        raise FrameError(f"system {target} is not an N-system; irreversible changes target N-systems")
    truncated = truncate_state(psi, range(psi.size))
    if truncated.norm < 1e-12:
        raise FrameError("truncation annihilates the state")
    meta = {k: v for k, v in truncated.meta.items() if k != "norm"}
    truncated = normalize(QuantumState(truncated.frame, truncated.models, truncated.terms, meta))
    return change_frame(truncated, target)


def build_dense_truncation(models: Sequence[SystemModel], slots: Iterable[int]) -> np.ndarray:
    models = tuple(models)
    _check_dimension(models)
    chosen = set(slots)
    mat = np.ones((1, 1))
    for k, m in enumerate(models):
        mat = np.kron(mat, truncation_map(m).matrix() if k in chosen else np.eye(m.dim))
    return mat


def build_dense_irreversible(models: Sequence[SystemModel], source: int, target: int) -> np.ndarray:
    """Unnormalized dense matrix of truncation on all systems followed by the frame change."""
    models = tuple(models)
    T = build_dense_truncation(models, range(len(models)))
    return build_dense_operator(models, source, target).matrix @ T


__all__ = [
    "TruncationMap",
    "build_dense_irreversible",
    "build_dense_truncation",
    "change_frame_irreversible",
    "truncate_state",
    "truncation_map",
]
