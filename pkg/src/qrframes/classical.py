"""Classical relational states, frame changes, truncation and averaging.

A :class:`ClassicalState` lists one configuration per system. Relative to a
system ``i`` the configuration of ``j`` is ``g_j · g_i⁻¹``; changing frame
right-multiplies every entry by the inverse of the new origin's entry.

Entries of N-systems described relative to a G-system lie in a coset
``N·c`` rather than in N itself. The state keeps a canonical representative
of that coset in ``offset`` (identity for external states and for states
relative to an N-system) so that truncation can strip it exactly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Sequence, Union

from .errors import FrameError, GroupSpecError
from .groups import FiniteGroup, TranslationLine
from .report import VerificationReport

EXTERNAL = "external"
KINDS = ("G", "N")

Group = Union[FiniteGroup, TranslationLine]


def _decomposition(group: Group):
    d = group.decomposition
    if d is None:
        raise GroupSpecError(f"{group.name} has no subgroup decomposition attached")
    return d


def _coerce(group: Group, x):
    if isinstance(group, TranslationLine):
        return Fraction(x)
    return group._check(x)


@dataclass(frozen=True)
class ClassicalState:
    """Configurations of several systems, external or relative to one of them."""

    frame: Union[int, str]
    group: Group
    kinds: tuple[str, ...]
    configs: tuple
    offset: Any = None

    def __post_init__(self):
        G = self.group
        kinds = tuple(self.kinds)
        configs = tuple(_coerce(G, c) for c in self.configs)
        if len(kinds) != len(configs) or not configs:
            raise ValueError("kinds and configs must be non-empty and of equal length")
        if any(k not in KINDS for k in kinds):
            raise ValueError(f"system kinds must be 'G' or 'N', got {kinds}")
        offset = G.identity if self.offset is None else _coerce(G, self.offset)
        object.__setattr__(self, "kinds", kinds)
        object.__setattr__(self, "configs", configs)
        object.__setattr__(self, "offset", offset)
        if self.frame != EXTERNAL:
            if not isinstance(self.frame, int) or not 0 <= self.frame < len(configs):
                raise IndexError(f"frame {self.frame!r} is not a system index")
            if configs[self.frame] != G.identity:
                raise FrameError(f"frame slot {self.frame} must hold the identity")
        elif offset != G.identity:
            raise FrameError("external states carry no coset offset")
        if "N" in kinds:
            d = _decomposition(G)
            if d.canonical_offset(offset) != offset:
                raise FrameError(f"offset {offset} is not a canonical coset representative")
            inv = G.inverse(offset)
            for j, (k, c) in enumerate(zip(kinds, configs)):
                if k == "N" and not d.in_normal(G.compose(c, inv)):
                    raise FrameError(f"N-system {j} holds {c}, outside the normal subgroup")

    @property
    def size(self) -> int:
        return len(self.configs)

    def to_dict(self) -> dict:
        conv = str if isinstance(self.group, TranslationLine) else int
        out = {"frame": self.frame, "kinds": list(self.kinds), "configs": [conv(c) for c in self.configs]}
        if self.offset != self.group.identity:
            out["offset"] = conv(self.offset)
        return out

    @classmethod
    def from_dict(cls, data: dict, group: Group) -> ClassicalState:
        return cls(data["frame"], group, tuple(data["kinds"]), tuple(data["configs"]), data.get("offset"))


def external_state(group: Group, configs: Sequence, kinds: Sequence[str] | None = None) -> ClassicalState:
    kinds = tuple(kinds) if kinds is not None else ("G",) * len(configs)
    return ClassicalState(EXTERNAL, group, kinds, tuple(configs))


def _check_index(s: ClassicalState, j: int) -> int:
    if isinstance(j, bool) or not isinstance(j, int) or not 0 <= j < s.size:
        raise IndexError(f"system index {j!r} out of range for {s.size} systems")
    return j


def _shift(s: ClassicalState, j: int) -> ClassicalState:
    """Right-multiply every entry by the inverse of entry ``j`` and make ``j`` the frame."""
    G = s.group
    h_inv = G.inverse(s.configs[j])
    configs = tuple(G.compose(c, h_inv) for c in s.configs)
    offset = G.identity
    if G.decomposition is not None:
        offset = G.decomposition.canonical_offset(G.compose(s.offset, h_inv))
    return ClassicalState(j, G, s.kinds, configs, offset)


def relative_state(s: ClassicalState, i: int) -> ClassicalState:
    """Describe an external state relative to system ``i``."""
    if s.frame != EXTERNAL:
        raise FrameError("relative_state expects an external state")
    return _shift(s, _check_index(s, i))


def change_frame_classical(s: ClassicalState, j: int) -> ClassicalState:
    """Pass from the current frame to system ``j`` by the right regular action."""
    if s.frame == EXTERNAL:
        raise FrameError("state has no frame; call relative_state first")
    return _shift(s, _check_index(s, j))


def truncate_classical(s: ClassicalState) -> ClassicalState:
    """Replace every entry by its N-part.

    G-system entries keep the n of ``g = n·p``. N-system entries have the
    coset offset removed, so they are unchanged whenever the offset is trivial.
    """
    G = s.group
    d = _decomposition(G)
    inv = G.inverse(s.offset)
    configs = tuple(
        d.normal_part(c) if k == "G" else G.compose(c, inv) for k, c in zip(s.kinds, s.configs)
    )
    return ClassicalState(s.frame, G, s.kinds, configs)


def irreversible_change_classical(s: ClassicalState, j: int) -> ClassicalState:
    """Truncate, then change frame to the N-system ``j``."""
    if s.frame == EXTERNAL:
        raise FrameError("state has no frame; call relative_state first")
    _check_index(s, j)
    if s.kinds[j] != "N":
        raise FrameError(f"system {j} is a G-system; irreversible changes target N-systems")
    return _shift(truncate_classical(s), j)


def _render(group: Group, x) -> Union[int, str]:
    return str(x) if isinstance(group, TranslationLine) else int(x)


def discrepancy_check(s: ClassicalState, i: int, origin: int = 0) -> VerificationReport:
    """Compare "relative then truncate" with "truncate then relative", both moved to N-system ``i``.

    N-system slots must agree (a failing check otherwise). G-system slots are
    allowed to differ; their checks always pass and record ``agree``.
    """
    if s.frame != EXTERNAL:
        raise FrameError("discrepancy_check expects an external state")
    _check_index(s, i)
    _check_index(s, origin)
    if s.kinds[i] != "N":
        raise FrameError(f"system {i} is a G-system; the comparison targets N-systems")
    first = change_frame_classical(truncate_classical(relative_state(s, origin)), i)
    second = change_frame_classical(relative_state(truncate_classical(s), origin), i)
    G = s.group
    rep = VerificationReport("discrepancy")
    for j, (kind, a, b) in enumerate(zip(s.kinds, first.configs, second.configs)):
        agree = a == b
        rep.add(
            f"slot {j}",
            agree or kind == "G",
            kind=kind,
            agree=agree,
            relative_then_truncate=_render(G, a),
            truncate_then_relative=_render(G, b),
        )
    return rep


def disagreeing_slots(report: VerificationReport) -> list[int]:
    return [int(c.name.split()[1]) for c in report.checks if not c.detail.get("agree", True)]


@dataclass(frozen=True)
class ProbabilisticClassicalState:
    """Per-system probability measures relative to a frame.

    ``orbits[k]`` is the sorted support of ``measures[k]``: the complete
    invariant of the averaged description.
    """

    frame: int
    group: Group
    measures: tuple[dict, ...]
    orbits: tuple[tuple, ...] = field(default=())

    def __post_init__(self):
        for k, m in enumerate(self.measures):
            if any(w < 0 for w in m.values()) or sum(m.values()) != 1:
                raise ValueError(f"measure of system {k} is not a probability distribution")
        if not self.orbits:
            object.__setattr__(self, "orbits", tuple(tuple(sorted(m)) for m in self.measures))

    def to_dict(self) -> dict:
        return {
            "frame": self.frame,
            "measures": [{str(k): str(w) for k, w in sorted(m.items())} for m in self.measures],
            "orbits": [list(o) for o in self.orbits],
        }


def infer_average_state(s: ClassicalState, target: int) -> ProbabilisticClassicalState:
    """Average the view from ``target`` over the stabilizer P.

    Each system's configuration ``n_k · n_target⁻¹`` is conjugated by every
    ``p`` in P with equal weight. When the target is the frame itself the
    state is already known exactly and the result is a set of point masses.
    """
    if s.frame == EXTERNAL:
        raise FrameError("state has no frame; call relative_state first")
    _check_index(s, target)
    G = s.group
    d = _decomposition(G)
    if not d.has_complement_subgroup:
        raise GroupSpecError("averaging needs a complement subgroup; transversal-only mode has none")
    if any(k != "N" for k in s.kinds):
        raise FrameError("averaging is defined for N-systems only")
    if target == s.frame:
        return ProbabilisticClassicalState(s.frame, G, tuple({c: Fraction(1)} for c in s.configs))
    shifted = change_frame_classical(s, target).configs
    weight = Fraction(1, len(d.transversal))
    measures = []
    for c in shifted:
        m: dict[int, Fraction] = {}
        for p in d.transversal:
            x = G.product(p, c, G.inverse(p))
            m[x] = m.get(x, Fraction(0)) + weight
        measures.append(m)
    return ProbabilisticClassicalState(target, G, tuple(measures))


def random_external_state(group: FiniteGroup, kinds: Sequence[str], rng: random.Random) -> ClassicalState:
    """Uniformly random external state; N-systems draw from N."""
    normal = group.decomposition.normal if "N" in kinds else ()
    configs = [rng.choice(normal) if k == "N" else rng.randrange(group.order) for k in kinds]
    return external_state(group, configs, kinds)


__all__ = [
    "EXTERNAL",
    "ClassicalState",
    "ProbabilisticClassicalState",
    "change_frame_classical",
    "discrepancy_check",
    "disagreeing_slots",
    "external_state",
    "infer_average_state",
    "irreversible_change_classical",
    "random_external_state",
    "relative_state",
    "truncate_classical",
]
