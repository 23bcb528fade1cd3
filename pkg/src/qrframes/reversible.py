"""Coherent change of quantum reference frame and its dense-matrix oracle.

The sparse path relabels each term: with ``h`` the target's label, the
source slot receives ``h⁻¹``, the target slot the identity, every other
regular slot is right-multiplied by ``h⁻¹`` and every encoded slot is hit
by ``V_R(h)``. The dense path builds the same operator as

    SWAP_{source,target} · Σ_g  1_source ⊗ |g⁻¹⟩⟨g|_target ⊗ V_R(g)_rest

and is used only to verify the sparse path and the group-law identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DimensionError, FrameError, ModelError
from .groups import FiniteGroup, build_group
from .hilbert import (
    DENSE_CAP,
    DROP_TOL,
    Encoded,
    QuantumState,
    Regular,
    SystemModel,
    amplitude_distance,
    basis_state,
    dimension,
    from_dense,
    superpose,
    to_dense,
)
from .report import VerificationReport


@dataclass(frozen=True)
class RegularActionMap:
    """``left``: ``|h⟩ ↦ |g·h⟩``; ``right``: ``|h⟩ ↦ |h·g⁻¹⟩``."""

    group: FiniteGroup
    side: str
    element: int
    permutation: tuple[int, ...]

    def matrix(self) -> np.ndarray:
        n = self.group.order
        m = np.zeros((n, n))
        m[list(self.permutation), range(n)] = 1.0
        return m

    def __call__(self, h: int) -> int:
        return self.permutation[h]


def regular_action(G: FiniteGroup, side: str, g: int) -> RegularActionMap:
    if side == "left":
        perm = tuple(G.compose(g, h) for h in G.elements())
    elif side == "right":
        gi = G.inverse(g)
        perm = tuple(G.compose(h, gi) for h in G.elements())
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return RegularActionMap(G, side, G._check(g), perm)


# -- sparse path -------------------------------------------------------------

def _frame_group(models: Sequence[SystemModel], source: int, target: int) -> FiniteGroup:
    n = len(models)
    for idx in (source, target):
        if isinstance(idx, bool) or not isinstance(idx, int) or not 0 <= idx < n:
            raise IndexError(f"system index {idx!r} out of range for {n} systems")
    src, tgt = models[source], models[target]
    if not isinstance(tgt, Regular):
        raise ModelError(f"system {target} is encoded; only regular systems can serve as frames")
    if not isinstance(src, Regular):
        raise ModelError(f"system {source} is encoded; only regular systems can serve as frames")
    G = src.group
    if tgt.group != G:
        raise ModelError("source and target systems are over different groups")
    for k, m in enumerate(models):
        if m.group != G:
            raise ModelError(f"system {k} is over a different group")
    return G


def change_frame(psi: QuantumState, target: int, *, allow_encoded: bool = True) -> QuantumState:
    """Coherent change from ``psi.frame`` to ``target`` (linear over terms)."""
    source = psi.frame
    models = psi.models
    G = _frame_group(models, source, target)
    if not allow_encoded:
        bad = [k for k, m in enumerate(models) if not isinstance(m, Regular)]
        if bad:
            raise ModelError(f"systems {bad} are encoded; use change_frame_mixed")
    if target == source:
        return QuantumState(source, models, psi.terms, psi.meta)
    e = G.identity
    out: dict[tuple, complex] = {}
    for labels, amp in psi.terms.items():
        h = labels[target]
        h_inv = G.inverse(h)
        partial: list[tuple[tuple, complex]] = [((), amp)]
        for k, (m, x) in enumerate(zip(models, labels)):
            if k == source:
                choices = [(h_inv, 1.0)]
            elif k == target:
                choices = [(e, 1.0)]
            elif isinstance(m, Regular):
                choices = [(G.compose(x, h_inv), 1.0)]
            else:
                col = m.v_right(h)[:, x]
                choices = [(j, v) for j, v in enumerate(col) if abs(v) >= DROP_TOL]
            partial = [(lab + (j,), a * v) for lab, a in partial for j, v in choices]
        for lab, a in partial:
            out[lab] = out.get(lab, 0j) + a
    return QuantumState(target, models, out, psi.meta)


def change_frame_quantum(psi: QuantumState, target: int) -> QuantumState:
    """Frame change for states whose systems are all regular."""
    return change_frame(psi, target, allow_encoded=False)


def change_frame_mixed(psi: QuantumState, target: int) -> QuantumState:
    """Frame change where non-frame systems may be encoded; encoded slots transform by ``V_R``."""
    return change_frame(psi, target, allow_encoded=True)


# -- dense path ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DenseOperator:
    matrix: np.ndarray
    models: tuple

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, psi: QuantumState, frame: int) -> QuantumState:
        if psi.models != self.models:
            raise ModelError("operator and state are over different system models")
        return from_dense(self.models, frame, self.matrix @ to_dense(psi))


def _check_dimension(models: Sequence[SystemModel]) -> int:
    dim = dimension(models)
    if dim > DENSE_CAP:
        raise DimensionError(f"product dimension {dim} exceeds the dense cap of {DENSE_CAP}")
    return dim


def _swap_permutation(dims: tuple[int, ...], a: int, b: int) -> np.ndarray:
    idx = np.arange(math.prod(dims)).reshape(dims)
    return np.swapaxes(idx, a, b).ravel()


def build_dense_operator(models: Sequence[SystemModel], source: int, target: int) -> DenseOperator:
    """Explicit matrix of the change from ``source`` to ``target`` (identity when equal)."""
    models = tuple(models)
    G = _frame_group(models, source, target)
    dim = _check_dimension(models)
    real = all(isinstance(m, Regular) or m.is_real for m in models)
    dtype = float if real else complex
    if source == target:
        return DenseOperator(np.eye(dim, dtype=dtype), models)
    total = np.zeros((dim, dim), dtype=dtype)
    for g in G.elements():
        factors = []
        for k, m in enumerate(models):
            if k == source:
                factors.append(np.eye(m.dim))
            elif k == target:
                proj = np.zeros((m.dim, m.dim))
                proj[G.inverse(g), g] = 1.0
                factors.append(proj)
            else:
                v = m.v_right(g)
                factors.append(v.real if real else v)
        term = factors[0]
        for f in factors[1:]:
            term = np.kron(term, f)
        total += term
    dims = tuple(m.dim for m in models)
    perm = _swap_permutation(dims, source, target)
    return DenseOperator(total[perm], models)


# -- observables ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class ObservableMatrix:
    matrix: np.ndarray
    models: tuple

    def __post_init__(self):
        m = np.asarray(self.matrix)
        dim = dimension(self.models)
        if m.shape != (dim, dim):
            raise ModelError(f"observable must be {dim}×{dim}, got {m.shape}")
        if np.max(np.abs(m - m.conj().T), initial=0.0) > 1e-10:
            raise ValueError("observable is not Hermitian")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "models", tuple(self.models))

    def expectation(self, psi: QuantumState) -> float:
        v = to_dense(psi)
        return float(np.real(np.vdot(v, self.matrix @ v)))


def transform_observable(Z: ObservableMatrix, source: int, target: int) -> ObservableMatrix:
    """Conjugate an observable from frame ``source`` to frame ``target``."""
    U = build_dense_operator(Z.models, source, target).matrix
    out = U @ Z.matrix @ U.conj().T
    return ObservableMatrix((out + out.conj().T) / 2, Z.models)


def local_observable(models: Sequence[SystemModel], slot: int, op) -> ObservableMatrix:
    """``1 ⊗ … ⊗ op ⊗ … ⊗ 1`` with ``op`` on system ``slot``."""
    models = tuple(models)
    _check_dimension(models)
    mat = np.ones((1, 1))
    for k, m in enumerate(models):
        mat = np.kron(mat, np.asarray(op) if k == slot else np.eye(m.dim))
    return ObservableMatrix(mat, models)


# -- verification --------------------------------------------------------------

def verify_lemmas(G: FiniteGroup, n: int, tol: float = 1e-10) -> VerificationReport:
    """Unitarity, adjoint-inverse and composition law for every ordered pair of frames."""
    if n < 2:
        raise ValueError("need at least two systems")
    models = tuple(Regular(G) for _ in range(n))
    _check_dimension(models)
    ops = {(i, j): build_dense_operator(models, i, j).matrix for i in range(n) for j in range(n)}
    eye = np.eye(ops[0, 0].shape[0])
    unit = adj = trans = 0.0
    worst_unit = worst_adj = worst_trans = None
    for (i, j), U in ops.items():
        if i == j:
            continue
        r = float(np.max(np.abs(U.conj().T @ U - eye)))
        if r >= unit:
            unit, worst_unit = r, [i, j]
        r = float(np.max(np.abs(U.conj().T - ops[j, i])))
        if r >= adj:
            adj, worst_adj = r, [i, j]
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if i in (j, k):
                    continue
                r = float(np.max(np.abs(ops[i, j] @ ops[k, i] - ops[k, j])))
                if r >= trans:
                    trans, worst_trans = r, [i, j, k]
    rep = VerificationReport(f"lemmas {G.name} n={n}")
    rep.add_residual("unitarity", unit, tol, worst_pair=worst_unit)
    rep.add_residual("adjoint_inverse", adj, tol, worst_pair=worst_adj)
    rep.add_residual("transitivity", trans, tol, worst_triple=worst_trans)
    return rep


def shift_operator(d: int, x: int) -> np.ndarray:
    """``exp(i·x·p̂)`` on ``ℂ^d`` built spectrally: ``p̂`` has eigenvalue ``2πk/d`` on ``|k̃⟩``."""
    omega = np.exp(2j * np.pi / d)
    ks = np.arange(d)
    fourier = omega ** np.outer(ks, ks) / math.sqrt(d)  # column k is |k̃⟩
    phases = np.exp(1j * x * 2 * np.pi * ks / d)
    return fourier @ np.diag(phases) @ fourier.conj().T


def parity_swap(d: int) -> np.ndarray:
    """``|a⟩|x⟩ ↦ |−x⟩|a⟩`` on ``ℂ^d ⊗ ℂ^d``."""
    m = np.zeros((d * d, d * d))
    for a in range(d):
        for x in range(d):
            m[((-x) % d) * d + a, a * d + x] = 1.0
    return m


def translation_equivalence_check(d: int, tol: float = 1e-12) -> VerificationReport:
    """Compare the frame change A→B on three ``ℤ_d`` systems with parity-swap · controlled shift."""
    if not 2 <= d <= 16:
        raise ValueError("d must lie in [2, 16]")
    G = build_group(f"Z:{d}")
    models = (Regular(G),) * 3
    U = build_dense_operator(models, 0, 1).matrix
    controlled = np.zeros((d ** 3, d ** 3), dtype=complex)
    for x in range(d):
        block = slice(x * d, (x + 1) * d)
        sub = np.zeros((d * d, d * d), dtype=complex)
        sub[block, block] = shift_operator(d, x)
        controlled += np.kron(np.eye(d), sub)
    S = np.kron(parity_swap(d), np.eye(d)) @ controlled
    rep = VerificationReport(f"translation equivalence d={d}")
    rep.add_residual("max_deviation", float(np.max(np.abs(U - S))), tol)
    if d >= 4:
        psi = superpose(
            [math.sqrt(1 / 3), math.sqrt(2 / 3)],
            [basis_state(models, 0, (0, 1, 3)), basis_state(models, 0, (0, 2, 3))],
        )
        sparse = change_frame_quantum(psi, 1)
        dense = from_dense(models, 1, S @ to_dense(psi))
        rep.add_residual("spot_state", amplitude_distance(sparse, dense), tol)
    return rep


__all__ = [
    "DenseOperator",
    "ObservableMatrix",
    "RegularActionMap",
    "build_dense_operator",
    "change_frame",
    "change_frame_mixed",
    "change_frame_quantum",
    "local_observable",
    "parity_swap",
    "regular_action",
    "shift_operator",
    "transform_observable",
    "translation_equivalence_check",
    "verify_lemmas",
]
