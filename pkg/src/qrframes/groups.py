"""Finite groups given by Cayley tables, their constructors, and N·P factorizations.

Elements are plain ``int`` indices into the Cayley table. Element order is
fixed by each constructor (cyclic by residue, dihedral as ``r^a s^b`` in
lexicographic ``(a, b)`` order, products and semidirect products
lexicographic in ``(n, p)``) so that files and reports are reproducible.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import GroupAxiomError, GroupSpecError
from .report import VerificationReport

MODES = ("semidirect", "direct", "transversal-only")
MAX_SYMMETRIC = 5
EXHAUSTIVE_ASSOC_ORDER = 64


class FiniteGroup:
    """A finite group stored as a verified Cayley table.

    ``cayley[a, b]`` is the index of ``a·b``. Instances are immutable; use
    :meth:`with_decomposition` to obtain a copy carrying a
    :class:`SubgroupDecomposition`.
    """

    def __init__(self, cayley, labels: Sequence[str] | None = None, name: str | None = None):
        table = np.array(cayley, dtype=np.int64)
        if table.ndim != 2 or table.shape[0] != table.shape[1] or table.shape[0] == 0:
            raise GroupSpecError(f"Cayley table must be a non-empty square array, got shape {table.shape}")
        report = verify_group_axioms(table)
        if not report.passed:
            bad = report.failures()[0]
            raise GroupAxiomError(f"table fails group axioms: {bad.name} {bad.detail}")
        table.flags.writeable = False
        self.cayley = table
        self.order = int(table.shape[0])
        self.identity = int(report["identity"].detail["element"])
        inv = np.argmax(table == self.identity, axis=1)
        inv.flags.writeable = False
        self.inverse_table = inv
        if labels is None:
            labels = [str(i) for i in range(self.order)]
        if len(labels) != self.order or len(set(labels)) != self.order:
            raise GroupSpecError("labels must be distinct and one per element")
        self.labels = tuple(str(x) for x in labels)
        self.name = name or f"cayley:{self.order}"
        self.decomposition: SubgroupDecomposition | None = None
        # python-level copies: scalar lookups on lists are much faster than on arrays
        self._rows = table.tolist()
        self._inv = inv.tolist()

    # -- arithmetic -----------------------------------------------------
    def _check(self, a) -> int:
        if isinstance(a, (bool, np.bool_)) or not isinstance(a, (int, np.integer)):
            raise TypeError(f"group element must be an integer index, got {a!r}")
        a = int(a)
        if not 0 <= a < self.order:
            raise IndexError(f"element {a} out of range for group of order {self.order}")
        return a

    def compose(self, a: int, b: int) -> int:
        return self._rows[self._check(a)][self._check(b)]

    def inverse(self, a: int) -> int:
        return self._inv[self._check(a)]

    def product(self, *elements: int) -> int:
        out = self.identity
        for g in elements:
            out = self.compose(out, g)
        return out

    def elements(self) -> range:
        return range(self.order)

    def index(self, label: str | int) -> int:
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            return self._check(label)
        try:
            return self.labels.index(str(label))
        except ValueError:
            raise GroupSpecError(f"unknown element label {label!r} in {self.name}") from None

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.cayley, self.cayley.T))

    def generated_subgroup(self, generators: Iterable[int]) -> tuple[int, ...]:
        found = {self.identity}
        frontier = [self.identity]
        gens = [self._check(g) for g in generators]
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = self._rows[x][g]
                    if y not in found:
                        found.add(y)
                        nxt.append(y)
            frontier = nxt
        return tuple(sorted(found))

    # -- decomposition --------------------------------------------------
    def with_decomposition(self, normal, transversal, mode: str) -> FiniteGroup:
        """Return a copy of this group carrying a validated N·P decomposition."""
        clone = object.__new__(FiniteGroup)
        clone.__dict__.update(self.__dict__)
        clone.decomposition = SubgroupDecomposition.build(clone, normal, transversal, mode)
        return clone

    def factorize(self, g: int) -> tuple[int, int]:
        if self.decomposition is None:
            raise GroupSpecError(f"{self.name} has no subgroup decomposition attached")
        return self.decomposition.factorize(g)

    # -- dunder ---------------------------------------------------------
    def __len__(self) -> int:
        return self.order

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteGroup):
            return NotImplemented
        if self is other:
            return True
        if self.order != other.order or not np.array_equal(self.cayley, other.cayley):
            return False
        a, b = self.decomposition, other.decomposition
        if a is None or b is None:
            return a is b
        return (a.normal, a.transversal, a.mode) == (b.normal, b.transversal, b.mode)

    def __hash__(self) -> int:
        return hash((self.order, self.cayley.tobytes()))

    def __repr__(self) -> str:
        return f"FiniteGroup({self.name!r}, order={self.order})"


@dataclass(frozen=True, eq=False)
class SubgroupDecomposition:
    """Unique factorization ``g = n·p`` with ``n`` in a normal subgroup N and
    ``p`` in a transversal of N.

    In ``semidirect`` and ``direct`` mode the transversal is itself a
    subgroup P; ``transversal-only`` admits a fundamental domain that is not
    a subgroup (``Z_m`` cut into cells of length L).
    """

    parent: FiniteGroup
    normal: tuple[int, ...]
    transversal: tuple[int, ...]
    mode: str
    factor_table: tuple[tuple[int, int], ...]

    @classmethod
    def build(cls, parent: FiniteGroup, normal, transversal, mode: str) -> SubgroupDecomposition:
        if mode not in MODES:
            raise GroupSpecError(f"unknown decomposition mode {mode!r}")
        G = parent
        normal = tuple(sorted({G._check(n) for n in normal}))
        transversal = tuple(G._check(p) for p in transversal)
        nset = set(normal)
        if G.identity not in nset:
            raise GroupAxiomError("normal subgroup must contain the identity")
        for a in normal:
            for b in normal:
                if G.compose(a, b) not in nset:
                    raise GroupAxiomError(f"N is not closed: {a}·{b} ∉ N")
        for g in G.elements():
            ginv = G.inverse(g)
            for n in normal:
                if G.product(g, n, ginv) not in nset:
                    raise GroupAxiomError(f"N is not normal: {g}·{n}·{g}⁻¹ ∉ N")
        if len(set(transversal)) != len(transversal):
            raise GroupAxiomError("transversal has repeated elements")
        if G.identity not in transversal:
            raise GroupAxiomError("transversal must contain the identity")
        table: list[tuple[int, int] | None] = [None] * G.order
        for n in normal:
            for p in transversal:
                g = G.compose(n, p)
                if table[g] is not None:
                    raise GroupAxiomError(f"element {g} factors twice as n·p")
                table[g] = (n, p)
        if any(t is None for t in table):
            raise GroupAxiomError("N·transversal does not cover the group")
        if mode in ("semidirect", "direct"):
            tset = set(transversal)
            for a in transversal:
                for b in transversal:
                    if G.compose(a, b) not in tset:
                        raise GroupAxiomError(f"complement is not a subgroup: {a}·{b}")
        if mode == "direct":
            for n in normal:
                for p in transversal:
                    if G.compose(n, p) != G.compose(p, n):
                        raise GroupAxiomError(f"direct mode but {n} and {p} do not commute")
        return cls(G, normal, transversal, mode, tuple(table))  # type: ignore[arg-type]

    def factorize(self, g: int) -> tuple[int, int]:
        return self.factor_table[self.parent._check(g)]

    def normal_part(self, g: int) -> int:
        return self.factorize(g)[0]

    def in_normal(self, g: int) -> bool:
        return self.factorize(g)[1] == self.parent.identity

    @property
    def has_complement_subgroup(self) -> bool:
        return self.mode in ("semidirect", "direct")

    def canonical_offset(self, c: int) -> int:
        """Canonical representative ``p⁻¹`` (``p`` in the transversal) of the coset ``N·c``."""
        G = self.parent
        return G.inverse(self.factorize(G.inverse(c))[1])


# -- free functions mirroring the methods -------------------------------

def compose(G: FiniteGroup, a: int, b: int) -> int:
    return G.compose(a, b)


def inverse(G: FiniteGroup, a: int) -> int:
    return G.inverse(a)


def factorize(D: SubgroupDecomposition | FiniteGroup, g: int) -> tuple[int, int]:
    if isinstance(D, FiniteGroup):
        return D.factorize(g)
    return D.factorize(g)


# -- exact translation line -----------------------------------------------

@dataclass(frozen=True)
class TranslationLine:
    """The additive group of rationals, cut into cells of length ``cell_length``.

    Truncation keeps the cell origin ``L·⌊x/L⌋``; all arithmetic is exact.
    Serves as its own decomposition (``N = LZ``, transversal ``[0, L)``).
    """

    cell_length: Fraction = Fraction(1)
    name: str = "line"

    def __post_init__(self):
        L = Fraction(self.cell_length)
        if L <= 0:
            raise GroupSpecError("cell length must be positive")
        object.__setattr__(self, "cell_length", L)

    identity = Fraction(0)
    mode = "transversal-only"
    has_complement_subgroup = False

    @property
    def decomposition(self) -> TranslationLine:
        return self

    def element(self, x) -> Fraction:
        return Fraction(x)

    def compose(self, a, b) -> Fraction:
        return Fraction(a) + Fraction(b)

    def inverse(self, a) -> Fraction:
        return -Fraction(a)

    def cell(self, x) -> int:
        return math.floor(Fraction(x) / self.cell_length)

    def truncate(self, x) -> Fraction:
        return self.cell(x) * self.cell_length

    def factorize(self, x) -> tuple[Fraction, Fraction]:
        n = self.truncate(x)
        return n, Fraction(x) - n

    def normal_part(self, x) -> Fraction:
        return self.truncate(x)

    def in_normal(self, x) -> bool:
        return (Fraction(x) / self.cell_length).denominator == 1

    def canonical_offset(self, c) -> Fraction:
        return -self.factorize(-Fraction(c))[1]


# -- axiom checks --------------------------------------------------------------

def verify_group_axioms(G, *, samples: int = 20000, seed: int = 0) -> VerificationReport:
    """Check closure, Latin-square, identity, inverse and associativity laws.

    ``G`` may be a :class:`FiniteGroup` or a raw square table. Associativity is
    exhaustive up to order 64 and sampled above. Failures carry counterexample
    coordinates in the check's ``detail``.
    """
    if isinstance(G, FiniteGroup):
        t, subject = G.cayley, G.name
    else:
        t, subject = np.asarray(G, dtype=np.int64), "table"
    rep = VerificationReport(subject)
    n = t.shape[0]
    if t.ndim != 2 or t.shape != (n, n):
        rep.add("closure", False, shape=list(t.shape))
        return rep
    out = np.argwhere((t < 0) | (t >= n))
    rep.add("closure", len(out) == 0, cells=out[:5].tolist())
    if len(out):
        return rep

    rows = [(r, c) for r in range(n) for c in _duplicate_positions(t[r])]
    cols = [(r, c) for c in range(n) for r in _duplicate_positions(t[:, c])]
    both = sorted(set(rows) & set(cols))
    cells = both or sorted(set(rows) | set(cols))
    rep.add("latin_square", not cells, cells=[list(x) for x in cells[:10]])

    ar = np.arange(n)
    ids = [e for e in range(n) if np.array_equal(t[e], ar) and np.array_equal(t[:, e], ar)]
    rep.add("identity", bool(ids), element=ids[0] if ids else None)
    if ids:
        e = ids[0]
        missing = [a for a in range(n) if not np.any((t[a] == e) & (t[:, a] == e))]
        rep.add("inverses", not missing, elements=missing[:10])
    else:
        rep.add("inverses", False, elements=[], reason="no identity")

    if n <= EXHAUSTIVE_ASSOC_ORDER:
        a, b, c = np.meshgrid(ar, ar, ar, indexing="ij")
        a, b, c = a.ravel(), b.ravel(), c.ravel()
        how = "exhaustive"
    else:
        rng = np.random.default_rng(seed)
        a, b, c = rng.integers(0, n, size=(3, samples))
        how = f"sampled {samples}"
    bad = np.flatnonzero(t[t[a, b], c] != t[a, t[b, c]])
    witness = [int(a[bad[0]]), int(b[bad[0]]), int(c[bad[0]])] if len(bad) else None
    rep.add("associativity", len(bad) == 0, method=how, witness=witness)
    return rep


def _duplicate_positions(line: np.ndarray) -> list[int]:
    vals, counts = np.unique(line, return_counts=True)
    dup = set(vals[counts > 1].tolist())
    return [i for i, v in enumerate(line.tolist()) if v in dup]


# -- constructors --------------------------------------------------------

def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise GroupSpecError("cyclic group order must be >= 1")
    ar = np.arange(n)
    return FiniteGroup((ar[:, None] + ar[None, :]) % n, name=f"Z:{n}")


def with_cells(G: FiniteGroup, L: int) -> FiniteGroup:
    """Attach the transversal-only decomposition ``N = LZ_m``, transversal ``{0..L-1}``."""
    m = G.order
    if L < 1 or m % L:
        raise GroupSpecError(f"cell length {L} must divide the group order {m}")
    out = G.with_decomposition(range(0, m, L), range(L), "transversal-only")
    out.name = f"{G.name},cells={L}"
    return out


def semidirect_product(N: FiniteGroup, P: FiniteGroup, action, *, name=None, labels=None) -> FiniteGroup:
    """``N ⋊ P`` with ``(n1, p1)(n2, p2) = (n1·φ_p1(n2), p1·p2)``.

    ``action[p][n]`` is ``φ_p(n)``. Elements are ordered ``index = n·|P| + p``;
    the result carries a semidirect (or direct, if the action is trivial)
    decomposition with N embedded as ``(n, e)`` and P as ``(e, p)``.
    """
    act = np.asarray(action, dtype=np.int64)
    if act.shape != (P.order, N.order):
        raise GroupSpecError(f"action table must be |P|×|N| = {P.order}×{N.order}, got {act.shape}")
    if np.any((act < 0) | (act >= N.order)):
        raise GroupSpecError("action table entries out of range")
    for p in P.elements():
        if sorted(act[p].tolist()) != list(range(N.order)):
            raise GroupSpecError(f"action of {p} is not a bijection of N")
        for a in N.elements():
            for b in N.elements():
                if act[p, N.compose(a, b)] != N.compose(int(act[p, a]), int(act[p, b])):
                    raise GroupSpecError(f"action of {p} is not an automorphism of N")
    if not np.array_equal(act[P.identity], np.arange(N.order)):
        raise GroupSpecError("identity of P must act trivially")
    for p in P.elements():
        for q in P.elements():
            if not np.array_equal(act[P.compose(p, q)], act[p][act[q]]):
                raise GroupSpecError("action is not a homomorphism P → Aut(N)")
    nP = P.order
    size = N.order * nP
    table = np.empty((size, size), dtype=np.int64)
    for n1, p1, n2, p2 in itertools.product(N.elements(), P.elements(), N.elements(), P.elements()):
        n = N.compose(n1, int(act[p1, n2]))
        table[n1 * nP + p1, n2 * nP + p2] = n * nP + P.compose(p1, p2)
    if labels is None:
        labels = [f"({N.labels[n]},{P.labels[p]})" for n in N.elements() for p in P.elements()]
    trivial = all(np.array_equal(act[p], np.arange(N.order)) for p in P.elements())
    G = FiniteGroup(table, labels=labels, name=name or f"semidirect({N.name},{P.name})")
    return G.with_decomposition(
        [n * nP + P.identity for n in N.elements()],
        [N.identity * nP + p for p in P.elements()],
        "direct" if trivial else "semidirect",
    )


def direct_product(A: FiniteGroup, B: FiniteGroup) -> FiniteGroup:
    trivial = np.tile(np.arange(A.order), (B.order, 1))
    G = semidirect_product(A, B, trivial, name=f"prod:{A.name}x{B.name}")
    return G


def dihedral(n: int) -> FiniteGroup:
    """``D_n`` of order ``2n`` as ``Z_n ⋊ Z_2``, elements ``r^a s^b`` at index ``2a + b``."""
    if n < 1:
        raise GroupSpecError("dihedral index must be >= 1")
    N, P = cyclic(n), cyclic(2)
    action = [list(range(n)), [(-a) % n for a in range(n)]]

    def rlabel(a):
        return "" if a == 0 else ("r" if a == 1 else f"r^{a}")

    labels = []
    for a in range(n):
        for b in range(2):
            s = rlabel(a) + ("s" if b else "")
            labels.append(s or "e")
    G = semidirect_product(N, P, action, name=f"D:{n}", labels=labels)
    if G.decomposition.mode == "direct":
        # n <= 2: the flip acts trivially but D_n is still presented as N ⋊ P
        G = G.with_decomposition(G.decomposition.normal, G.decomposition.transversal, "semidirect")
    return G


def symmetric(n: int) -> FiniteGroup:
    """``S_n`` on ``{0..n-1}``, permutations in lexicographic one-line order;
    ``(a·b)(x) = a(b(x))``."""
    if not 1 <= n <= MAX_SYMMETRIC:
        raise GroupSpecError(f"S:n supports 1 <= n <= {MAX_SYMMETRIC}")
    perms = list(itertools.permutations(range(n)))
    index = {p: i for i, p in enumerate(perms)}
    table = [[index[tuple(a[b[x]] for x in range(n))] for b in perms] for a in perms]
    labels = ["".join(map(str, p)) for p in perms]
    return FiniteGroup(table, labels=labels, name=f"S:{n}")


# -- files -------------------------------------------------------------------

def _content_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _ints(line: str, lineno: int) -> list[int]:
    try:
        return [int(x) for x in line.split()]
    except ValueError:
        raise GroupSpecError(f"line {lineno}: expected integers, got {line!r}") from None


def parse_cayley_text(text: str, name: str = "cayley") -> FiniteGroup:
    lines = list(_content_lines(text))
    if not lines:
        raise GroupSpecError("empty Cayley file")
    lineno, head = lines[0]
    m = re.fullmatch(r"order\s+(\d+)", head)
    if not m:
        raise GroupSpecError(f"line {lineno}: expected 'order N'")
    n = int(m.group(1))
    rows, labels = [], None
    for lineno, line in lines[1:]:
        if line.startswith("labels"):
            labels = line.split()[1:]
            continue
        row = _ints(line, lineno)
        if len(row) != n:
            raise GroupSpecError(f"line {lineno}: expected {n} entries, got {len(row)}")
        rows.append(row)
    if len(rows) != n:
        raise GroupSpecError(f"expected {n} table rows, got {len(rows)}")
    return FiniteGroup(rows, labels=labels, name=name)


def parse_semidirect_text(text: str, name: str = "semidirect") -> FiniteGroup:
    normal = complement = None
    action: list[list[int]] = []
    in_action = False
    for lineno, line in _content_lines(text):
        key, _, rest = line.partition(" ")
        if key == "normal":
            normal = build_group(rest.strip())
        elif key == "complement":
            complement = build_group(rest.strip())
        elif key == "action":
            in_action = True
        elif in_action:
            action.append(_ints(line, lineno))
        else:
            raise GroupSpecError(f"line {lineno}: unexpected {line!r}")
    if normal is None or complement is None or not action:
        raise GroupSpecError("semidirect file needs 'normal', 'complement' and 'action' sections")
    return semidirect_product(normal, complement, action, name=name)


def read_cayley_file(path) -> FiniteGroup:
    return parse_cayley_text(Path(path).read_text(encoding="utf-8"), name=f"cayley:{path}")


def read_semidirect_file(path) -> FiniteGroup:
    return parse_semidirect_text(Path(path).read_text(encoding="utf-8"), name=f"semidirect:{path}")


def write_cayley_text(G: FiniteGroup) -> str:
    lines = [f"order {G.order}"]
    lines += [" ".join(map(str, row)) for row in G.cayley.tolist()]
    lines.append("labels " + " ".join(G.labels))
    return "\n".join(lines) + "\n"


# -- spec strings ------------------------------------------------------------

def _split_product(body: str) -> list[str]:
    # factors are joined by 'x'; a factor never starts with a digit
    return re.split(r"x(?=[A-Za-z])", body)


def build_group(spec: str, cells: int | None = None) -> FiniteGroup:
    """Build a group from a spec string.

    Accepted forms: ``Z:n``, ``D:n``, ``S:n`` (n ≤ 5), ``prod:<spec>x<spec>``,
    ``semidirect:<file>``, ``cayley:<file>``. ``Z:m,cells=L`` (or the
    ``cells`` argument) attaches the transversal-only decomposition with
    ``N = LZ_m``.
    """
    if not isinstance(spec, str) or not spec.strip():
        raise GroupSpecError(f"malformed group spec {spec!r}")
    spec = spec.strip()
    kind, sep, body = spec.partition(":")
    if not sep:
        raise GroupSpecError(f"malformed group spec {spec!r}")
    if kind in ("cayley", "semidirect"):
        path = Path(body)
        if not path.is_file():
            raise GroupSpecError(f"no such group file: {body}")
        G = read_cayley_file(path) if kind == "cayley" else read_semidirect_file(path)
        G.name = spec
        return G
    if kind == "prod":
        parts = _split_product(body)
        if len(parts) < 2 or not all(parts):
            raise GroupSpecError(f"malformed product spec {spec!r}")
        G = build_group(parts[0])
        for part in parts[1:]:
            G = direct_product(G, build_group(part))
        G.name = spec
        return G
    head, *opts = body.split(",")
    options = {}
    for opt in opts:
        k, eq, v = opt.partition("=")
        if not eq:
            raise GroupSpecError(f"malformed option {opt!r} in {spec!r}")
        options[k.strip()] = v.strip()
    try:
        n = int(head)
    except ValueError:
        raise GroupSpecError(f"malformed group spec {spec!r}") from None
    if kind == "Z":
        G = cyclic(n)
    elif kind == "D":
        G = dihedral(n)
    elif kind == "S":
        G = symmetric(n)
    else:
        raise GroupSpecError(f"unknown group family {kind!r} in {spec!r}")
    if set(options) - {"cells"}:
        raise GroupSpecError(f"unknown options {sorted(set(options) - {'cells'})} in {spec!r}")
    if "cells" in options:
        if cells is not None and int(options["cells"]) != cells:
            raise GroupSpecError("conflicting cells settings")
        cells = int(options["cells"])
    if cells is not None:
        if kind != "Z":
            raise GroupSpecError("cells= is only supported for Z:m")
        G = with_cells(G, cells)
    return G
