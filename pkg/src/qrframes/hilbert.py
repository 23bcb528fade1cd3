"""Sparse pure states over products of regular and encoded systems.

A *regular* slot has one basis vector ``|g⟩`` per group element and its
labels are element indices. An *encoded* slot is ``ℂ^d`` with a chosen
injection ``g ↦ |ψ(g)⟩`` and matrices ``V_R(g)`` satisfying
``V_R(g)|ψ(h)⟩ = phase · |ψ(h·g⁻¹)⟩``; its labels are computational indices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .errors import DimensionError, FrameError, ModelError
from .groups import FiniteGroup, build_group

DROP_TOL = 1e-12
UNITARY_TOL = 1e-10
DENSE_CAP = 4096


# -- system models ------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Regular:
    """``ℂ[G]`` with basis ``|g⟩``. ``kind`` is ``"G"`` or ``"N"`` (an N-system)."""

    group: FiniteGroup
    kind: str = "G"

    def __post_init__(self):
        if self.kind not in ("G", "N"):
            raise ModelError(f"system kind must be 'G' or 'N', got {self.kind!r}")
        if self.kind == "N" and self.group.decomposition is None:
            raise ModelError("an N-system needs a group with a subgroup decomposition")

    is_regular = True

    @property
    def dim(self) -> int:
        return self.group.order

    def v_right(self, g: int) -> np.ndarray:
        """Permutation matrix of ``|h⟩ ↦ |h·g⁻¹⟩``."""
        G = self.group
        gi = G.inverse(g)
        m = np.zeros((G.order, G.order))
        for h in G.elements():
            m[G.compose(h, gi), h] = 1.0
        return m

    def describe(self) -> dict:
        return {"type": "regular", "group": self.group.name, "kind": self.kind}

    def __eq__(self, other) -> bool:
        return isinstance(other, Regular) and self.group == other.group and self.kind == other.kind

    def __hash__(self) -> int:
        return hash(("regular", self.group, self.kind))


@dataclass(frozen=True, eq=False)
class Encoded:
    """``ℂ^d`` carrying group elements through a (not necessarily orthogonal) injection.

    Construction checks unit norms, distinct injection vectors, unitarity of
    every ``V_R(g)`` (and ``V_L(g)`` when given) and projective equivariance.
    ``phases[g, h]`` records the unit factor in
    ``V_R(g)|ψ(h)⟩ = phases[g, h]·|ψ(h·g⁻¹)⟩``.
    """

    group: FiniteGroup
    injection: np.ndarray
    v_right_table: np.ndarray
    v_left_table: np.ndarray | None = None
    name: str = "encoded"
    phases: np.ndarray = field(init=False, repr=False)

    is_regular = False
    kind = "G"

    def __post_init__(self):
        G = self.group
        inj = np.array(self.injection, dtype=complex)
        if inj.ndim != 2 or inj.shape[0] != G.order:
            raise ModelError(f"injection must be |G|×d, got shape {inj.shape}")
        d = inj.shape[1]
        vr = np.array(self.v_right_table, dtype=complex)
        if vr.shape != (G.order, d, d):
            raise ModelError(f"v_right table must be |G|×d×d, got shape {vr.shape}")
        norms = np.linalg.norm(inj, axis=1)
        if np.max(np.abs(norms - 1)) > UNITARY_TOL:
            raise ModelError("injection vectors must have unit norm")
        for g in range(G.order):
            for h in range(g):
                if np.max(np.abs(inj[g] - inj[h])) < UNITARY_TOL:
                    raise ModelError(f"injection is not injective: elements {h} and {g} coincide")
        eye = np.eye(d)
        tables = [vr] if self.v_left_table is None else [vr, np.array(self.v_left_table, dtype=complex)]
        for t in tables:
            if t.shape != (G.order, d, d):
                raise ModelError("v_left table must be |G|×d×d")
            for g in range(G.order):
                if np.max(np.abs(t[g].conj().T @ t[g] - eye)) > UNITARY_TOL:
                    raise ModelError(f"matrix for element {g} is not unitary")
        phases = np.empty((G.order, G.order), dtype=complex)
        for g in range(G.order):
            gi = G.inverse(g)
            for h in range(G.order):
                moved = vr[g] @ inj[h]
                target = inj[G.compose(h, gi)]
                ph = np.vdot(target, moved)
                if abs(abs(ph) - 1) > UNITARY_TOL or np.max(np.abs(moved - ph * target)) > UNITARY_TOL:
                    raise ModelError(f"V_R({g}) does not carry ψ({h}) onto ψ({h}·{g}⁻¹) up to a phase")
                phases[g, h] = ph
        for arr in (inj, vr, phases):
            arr.flags.writeable = False
        object.__setattr__(self, "injection", inj)
        object.__setattr__(self, "v_right_table", vr)
        if self.v_left_table is not None:
            vl = np.array(self.v_left_table, dtype=complex)
            vl.flags.writeable = False
            object.__setattr__(self, "v_left_table", vl)
        object.__setattr__(self, "phases", phases)

    @property
    def dim(self) -> int:
        return self.injection.shape[1]

    def v_right(self, g: int) -> np.ndarray:
        return self.v_right_table[self.group._check(g)]

    def v_left(self, g: int) -> np.ndarray:
        if self.v_left_table is None:
            raise ModelError("this encoding has no left action")
        return self.v_left_table[self.group._check(g)]

    @property
    def is_real(self) -> bool:
        return not (np.any(self.injection.imag) or np.any(self.v_right_table.imag))

    def describe(self) -> dict:
        return {"type": "encoded", "encoding": self.name}

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Encoded)
            and self.group == other.group
            and np.array_equal(self.injection, other.injection)
            and np.array_equal(self.v_right_table, other.v_right_table)
        )

    def __hash__(self) -> int:
        return hash(("encoded", self.group, self.injection.tobytes()))


SystemModel = Union[Regular, Encoded]


def _rotation(phi: float) -> np.ndarray:
    c, s = math.cos(phi), math.sin(phi)
    return np.array([[c, -s], [s, c]])


def half_angle_encoding(m: int) -> Encoded:
    """``ℤ_m`` on a qubit: ``k ↦ cos(θ/2)|0⟩ + sin(θ/2)|1⟩``.

    The angle of ``k`` is taken in ``(−π, π]``, so ``k > m/2`` maps to
    ``θ = 2π(k − m)/m``. ``V_R(k)`` rotates by ``-θ/2`` and ``V_L(k)`` by
    ``+θ/2``; both are equivariant only up to sign.
    """
    if m < 2:
        raise ModelError("half-angle encoding needs m >= 2")
    G = build_group(f"Z:{m}")
    theta = [2 * math.pi * (k if 2 * k <= m else k - m) / m for k in range(m)]
    inj = np.array([[math.cos(t / 2), math.sin(t / 2)] for t in theta])
    vr = np.array([_rotation(-t / 2) for t in theta])
    vl = np.array([_rotation(t / 2) for t in theta])
    return Encoded(G, inj, vr, vl, name=f"half-angle:{m}")


def regular_encoding(group: FiniteGroup) -> Encoded:
    """The regular system written as an encoding (standard basis, permutation ``V_R``)."""
    reg = Regular(group)
    inj = np.eye(group.order)
    vr = np.array([reg.v_right(g) for g in group.elements()])
    vl = np.zeros_like(vr)
    for g in group.elements():
        for h in group.elements():
            vl[g, group.compose(g, h), h] = 1.0
    return Encoded(group, inj, vr, vl, name=f"regular:{group.name}")


def build_encoding(spec: str) -> Encoded:
    """``half-angle:m`` or ``regular:<group spec>``."""
    kind, sep, body = spec.partition(":")
    if not sep:
        raise ModelError(f"malformed encoding spec {spec!r}")
    if kind == "half-angle":
        try:
            return half_angle_encoding(int(body))
        except ValueError:
            raise ModelError(f"malformed encoding spec {spec!r}") from None
    if kind == "regular":
        return regular_encoding(build_group(body))
    raise ModelError(f"unknown encoding family {kind!r}")


def encode_group_element(model: SystemModel, g: int) -> np.ndarray:
    if not isinstance(model, Encoded):
        raise ModelError("regular systems use the group label directly")
    return model.injection[model.group._check(g)].copy()


# -- states ---------------------------------------------------------------------

Labels = tuple


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Sparse pure state: ``terms`` maps a label tuple to its amplitude.

    The frame slot (when regular) may only carry the identity label. Terms
    with ``|amp| < 1e-12`` are dropped. ``meta`` holds auxiliary results such
    as ``norm_factor``.
    """

    frame: int
    models: tuple
    terms: Mapping[Labels, complex]
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        models = tuple(self.models)
        if not models:
            raise ModelError("a state needs at least one system")
        if isinstance(self.frame, bool) or not isinstance(self.frame, int) or not 0 <= self.frame < len(models):
            raise IndexError(f"frame {self.frame!r} is not a system index")
        dims = tuple(m.dim for m in models)
        clean: dict[Labels, complex] = {}
        for labels, amp in self.terms.items():
            labels = tuple(int(x) for x in labels)
            if len(labels) != len(dims):
                raise ModelError(f"label tuple {labels} does not match {len(dims)} systems")
            for x, d in zip(labels, dims):
                if not 0 <= x < d:
                    raise IndexError(f"label {x} out of range for a system of dimension {d}")
            amp = complex(amp)
            if abs(amp) >= DROP_TOL:
                clean[labels] = amp
        fm = models[self.frame]
        if isinstance(fm, Regular):
            e = fm.group.identity
            bad = [lab for lab in clean if lab[self.frame] != e]
            if bad:
                raise FrameError(f"frame slot {self.frame} must hold the identity, found term {bad[0]}")
        object.__setattr__(self, "models", models)
        object.__setattr__(self, "terms", MappingProxyType(dict(sorted(clean.items()))))
        object.__setattr__(self, "meta", MappingProxyType(dict(self.meta)))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(m.dim for m in self.models)

    @property
    def size(self) -> int:
        return len(self.models)

    @property
    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.terms.values()))

    @property
    def normalized(self) -> bool:
        return abs(self.norm ** 2 - 1) < UNITARY_TOL

    def amplitude(self, labels: Sequence[int]) -> complex:
        return self.terms.get(tuple(labels), 0j)

    def with_meta(self, **extra) -> QuantumState:
        return QuantumState(self.frame, self.models, self.terms, {**self.meta, **extra})

    def scaled(self, c: complex) -> QuantumState:
        return QuantumState(self.frame, self.models, {k: c * a for k, a in self.terms.items()}, self.meta)

    def __repr__(self) -> str:
        body = " + ".join(f"({a:.6g})|{','.join(map(str, k))}⟩" for k, a in self.terms.items())
        return f"QuantumState(frame={self.frame}, {body or '0'})"


def _check_compatible(a: QuantumState, b: QuantumState, what: str):
    if a.frame != b.frame:
        raise FrameError(f"cannot {what} states relative to different frames ({a.frame} vs {b.frame})")
    if a.models != b.models:
        raise ModelError(f"cannot {what} states over different system models")


def basis_state(models: Sequence[SystemModel], frame: int, labels: Sequence[int]) -> QuantumState:
    return QuantumState(frame, tuple(models), {tuple(labels): 1.0})


def product_state(models: Sequence[SystemModel], frame: int, factors: Sequence) -> QuantumState:
    """Tensor product of per-slot factors.

    An integer factor is a basis label; any other factor is an amplitude
    vector of the slot's dimension (for instance ``encode_group_element``).
    """
    models = tuple(models)
    if len(factors) != len(models):
        raise ModelError("one factor per system is required")
    terms: dict[Labels, complex] = {(): 1.0}
    for model, f in zip(models, factors):
        if isinstance(f, (int, np.integer)) and not isinstance(f, bool):
            entries = [(int(f), 1.0)]
        else:
            vec = np.asarray(f, dtype=complex)
            if vec.shape != (model.dim,):
                raise ModelError(f"factor of length {vec.shape} does not match dimension {model.dim}")
            entries = [(k, v) for k, v in enumerate(vec) if abs(v) >= DROP_TOL]
        terms = {lab + (k,): a * v for lab, a in terms.items() for k, v in entries}
    return QuantumState(frame, models, terms)


def superpose(coeffs: Sequence[complex], states: Sequence[QuantumState]) -> QuantumState:
    if len(coeffs) != len(states) or not states:
        raise ValueError("need one coefficient per state and at least one state")
    first = states[0]
    out: dict[Labels, complex] = {}
    for c, s in zip(coeffs, states):
        _check_compatible(first, s, "superpose")
        for k, a in s.terms.items():
            out[k] = out.get(k, 0j) + c * a
    return QuantumState(first.frame, first.models, out)


def inner_product(a: QuantumState, b: QuantumState) -> complex:
    """``⟨a|b⟩``, conjugate-linear in ``a``."""
    if a.models != b.models:
        raise ModelError("inner product of states over different system models")
    small, large = (a, b) if len(a.terms) <= len(b.terms) else (b, a)
    total = 0j
    for k in small.terms:
        if k in large.terms:
            total += a.terms[k].conjugate() * b.terms[k]
    return total


def amplitude_distance(a: QuantumState, b: QuantumState) -> float:
    """Largest absolute amplitude difference over all labels (frames must match)."""
    _check_compatible(a, b, "compare")
    keys = set(a.terms) | set(b.terms)
    return max((abs(a.amplitude(k) - b.amplitude(k)) for k in keys), default=0.0)


def state_distance(a: QuantumState, b: QuantumState) -> float:
    """Euclidean norm of ``a - b``."""
    _check_compatible(a, b, "compare")
    keys = set(a.terms) | set(b.terms)
    return math.sqrt(sum(abs(a.amplitude(k) - b.amplitude(k)) ** 2 for k in keys))


def normalize(state: QuantumState) -> QuantumState:
    """Rescale to unit norm, recording the previous norm as ``norm_factor``."""
    n = state.norm
    if n < DROP_TOL:
        raise ValueError("cannot normalize the zero state")
    return QuantumState(state.frame, state.models, {k: a / n for k, a in state.terms.items()},
                        {**state.meta, "norm_factor": n})


def dimension(models: Iterable[SystemModel]) -> int:
    return math.prod(m.dim for m in models)


def to_dense(state: QuantumState) -> np.ndarray:
    dims = state.dims
    if math.prod(dims) > DENSE_CAP * DENSE_CAP:
        raise DimensionError("state too large to materialize")
    vec = np.zeros(math.prod(dims), dtype=complex)
    for k, a in state.terms.items():
        vec[np.ravel_multi_index(k, dims)] = a
    return vec


def from_dense(models: Sequence[SystemModel], frame: int, vec) -> QuantumState:
    models = tuple(models)
    dims = tuple(m.dim for m in models)
    vec = np.asarray(vec).ravel()
    idx = np.flatnonzero(np.abs(vec) >= DROP_TOL)
    labels = np.array(np.unravel_index(idx, dims)).T
    return QuantumState(frame, models, {tuple(int(x) for x in lab): complex(vec[i]) for lab, i in zip(labels, idx)})


def schmidt_coefficients(state: QuantumState, left: Iterable[int]) -> np.ndarray:
    left = sorted(set(int(i) for i in left))
    n = state.size
    if not left or len(left) >= n or left[0] < 0 or left[-1] >= n:
        raise ValueError("left systems must be a non-empty proper subset of the systems")
    right = [i for i in range(n) if i not in left]
    rows: dict[tuple, int] = {}
    cols: dict[tuple, int] = {}
    entries = []
    for k, a in state.terms.items():
        r = rows.setdefault(tuple(k[i] for i in left), len(rows))
        c = cols.setdefault(tuple(k[i] for i in right), len(cols))
        entries.append((r, c, a))
    if not entries:
        return np.zeros(0)
    mat = np.zeros((len(rows), len(cols)), dtype=complex)
    for r, c, a in entries:
        mat[r, c] = a
    return np.linalg.svd(mat, compute_uv=False)


def schmidt_rank(state: QuantumState, left: Iterable[int], tol: float = 1e-10) -> int:
    """Number of singular values above ``tol`` times the largest one.

    Only the rows and columns that carry amplitude are materialized; the
    remaining ones are zero and do not change the rank.
    """
    sv = schmidt_coefficients(state, left)
    if sv.size == 0 or sv[0] == 0:
        return 0
    return int(np.sum(sv > tol * sv[0]))


__all__ = [
    "Encoded",
    "QuantumState",
    "Regular",
    "SystemModel",
    "amplitude_distance",
    "basis_state",
    "build_encoding",
    "dimension",
    "encode_group_element",
    "from_dense",
    "half_angle_encoding",
    "inner_product",
    "normalize",
    "product_state",
    "regular_encoding",
    "schmidt_coefficients",
    "schmidt_rank",
    "state_distance",
    "superpose",
    "to_dense",
]
