"""Finite ortholattices with exhaustively checkable algebraic laws.

Elements are integer handles ``0..n-1``.  The order relation is stored as a
dense boolean matrix and the meet/join/orthocomplement operations are
precomputed into tables at construction, so element queries are O(1) and law
checks are exhaustive scans over all tuples.  Every failed law check reports
the lexicographically first violating tuple, which makes witnesses
deterministic and re-checkable.

Lattices are immutable after construction; all operations are pure reads.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    HandleError,
    LawViolationError,
    NotALatticeError,
    SizeCapError,
)

#: Hard cap on element count for dense-table construction.
ELEMENT_CAP = 4096


@dataclass(frozen=True)
class LawReport:
    """Outcome of one algebraic law check.

    When ``holds`` is false, ``witness`` names the lexicographically first
    tuple of element handles violating the law; substituting it back into
    the law (see :func:`law_holds_at`) reproduces the violation.
    """

    law_name: str
    holds: bool
    witness: tuple[int, ...] | None = None
    detail: str = ""


def _first_true(mask: np.ndarray) -> tuple[int, ...]:
    """Lexicographically first index of a true entry in a boolean array."""
    idx = np.argwhere(mask)
    flat = np.ravel_multi_index(tuple(idx.T), mask.shape)
    return tuple(int(v) for v in idx[int(np.argmin(flat))])


class OrthoLattice:
    """A finite bounded lattice equipped with an orthocomplement map.

    Construction validates that ``leq`` is a partial order in which every
    pair of elements has a unique greatest lower bound and least upper
    bound, and that ``ortho`` is a total map.  The orthocomplement *laws*
    (involution, order reversal, complement identities) are checked
    separately by :func:`validate_ortholattice`, so structures violating
    them can still be constructed, inspected, and reported on.
    """

    __slots__ = (
        "n",
        "bottom",
        "top",
        "labels",
        "name",
        "_leq",
        "_meet",
        "_join",
        "_ortho",
        "_atoms",
        "_blocks",
    )

    def __init__(
        self,
        leq: np.ndarray,
        ortho: Sequence[int],
        labels: Sequence[str | None] | None = None,
        name: str | None = None,
        *,
        _tables: tuple[np.ndarray, np.ndarray] | None = None,
    ):
        leq = np.ascontiguousarray(np.asarray(leq, dtype=bool))
        if leq.ndim != 2 or leq.shape[0] != leq.shape[1]:
            raise NotALatticeError("order relation must be a square matrix")
        n = leq.shape[0]
        if n < 2:
            raise NotALatticeError("degenerate lattice: need at least 2 elements")
        if n > ELEMENT_CAP:
            raise SizeCapError(f"{n} elements exceeds the cap of {ELEMENT_CAP}")

        ortho_arr = np.asarray(ortho, dtype=np.int32)
        if ortho_arr.shape != (n,):
            raise NotALatticeError("orthocomplement map must assign every element")
        if np.any(ortho_arr < 0) or np.any(ortho_arr >= n):
            raise HandleError("orthocomplement map has out-of-range targets")

        self._check_partial_order(leq)

        if _tables is None:
            meet, join = self._build_tables(leq)
        else:
            meet, join = _tables
            meet = np.ascontiguousarray(np.asarray(meet, dtype=np.int32))
            join = np.ascontiguousarray(np.asarray(join, dtype=np.int32))

        bottom_rows = np.flatnonzero(leq.all(axis=1))
        top_cols = np.flatnonzero(leq.all(axis=0))
        if bottom_rows.size != 1 or top_cols.size != 1:
            raise NotALatticeError("order is not bounded by a unique bottom and top")

        if labels is not None:
            labels = tuple(labels)
            if len(labels) != n:
                raise NotALatticeError("labels must cover every element or be omitted")

        self.n = n
        self.bottom = int(bottom_rows[0])
        self.top = int(top_cols[0])
        self.labels = labels
        self.name = name
        self._leq = leq
        self._meet = meet
        self._join = join
        self._ortho = ortho_arr
        self._atoms: tuple[int, ...] | None = None
        self._blocks: tuple[tuple[int, ...], ...] | None = None
        for arr in (self._leq, self._meet, self._join, self._ortho):
            arr.flags.writeable = False

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def _check_partial_order(leq: np.ndarray) -> None:
        n = leq.shape[0]
        diag = np.diagonal(leq)
        if not diag.all():
            a = int(np.flatnonzero(~diag)[0])
            raise NotALatticeError(f"order not reflexive at element {a}")
        sym = leq & leq.T
        np.fill_diagonal(sym, False)
        if sym.any():
            a, b = _first_true(sym)
            raise NotALatticeError(f"order not antisymmetric at pair ({a}, {b})", (a, b))
        reach = (leq.astype(np.float32) @ leq.astype(np.float32)) > 0.5
        broken = reach & ~leq
        if broken.any():
            a, b = _first_true(broken)
            raise NotALatticeError(f"order not transitive at pair ({a}, {b})", (a, b))

    @staticmethod
    def _build_tables(leq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Meet/join tables via down-set and up-set fingerprints.

        meet(a, b) exists and is unique iff down(a) & down(b) is itself the
        down-set of some element; dually for joins.  Missing fingerprints
        name the first offending pair.
        """
        n = leq.shape[0]
        meet = np.empty((n, n), dtype=np.int32)
        join = np.empty((n, n), dtype=np.int32)

        down = np.packbits(leq, axis=0)  # column j = packed down-set of j
        up = np.packbits(leq.T, axis=0)  # column j = packed up-set of j

        down_index = {down[:, j].tobytes(): j for j in range(n)}
        up_index = {up[:, j].tobytes(): j for j in range(n)}

        for a in range(n):
            inter_down = (down[:, a : a + 1] & down).T
            inter_up = (up[:, a : a + 1] & up).T
            for b in range(a, n):
                m = down_index.get(inter_down[b].tobytes())
                if m is None:
                    raise NotALatticeError(
                        f"pair ({a}, {b}) has no unique greatest lower bound",
                        (a, b),
                    )
                j = up_index.get(inter_up[b].tobytes())
                if j is None:
                    raise NotALatticeError(
                        f"pair ({a}, {b}) has no unique least upper bound",
                        (a, b),
                    )
                meet[a, b] = meet[b, a] = m
                join[a, b] = join[b, a] = j
        return meet, join

    # -- element queries -----------------------------------------------------

    def _check_handle(self, *handles: int) -> None:
        for h in handles:
            if not isinstance(h, (int, np.integer)) or not (0 <= h < self.n):
                raise HandleError(f"element handle {h!r} not in 0..{self.n - 1}")

    def leq(self, a: int, b: int) -> bool:
        """Whether ``a <= b`` in the stored order."""
        self._check_handle(a, b)
        return bool(self._leq[a, b])

    def meet(self, a: int, b: int) -> int:
        """Greatest lower bound of ``a`` and ``b``."""
        self._check_handle(a, b)
        return int(self._meet[a, b])

    def join(self, a: int, b: int) -> int:
        """Least upper bound of ``a`` and ``b``."""
        self._check_handle(a, b)
        return int(self._join[a, b])

    def ortho(self, a: int) -> int:
        """Orthocomplement of ``a``."""
        self._check_handle(a)
        return int(self._ortho[a])

    def is_orthogonal(self, a: int, b: int) -> bool:
        """Whether ``a <= ortho(b)`` (symmetric for valid ortholattices)."""
        self._check_handle(a, b)
        return bool(self._leq[a, self._ortho[b]])

    def label(self, a: int) -> str | None:
        self._check_handle(a)
        return self.labels[a] if self.labels is not None else None

    def label_or_index(self, a: int) -> str:
        lab = self.label(a)
        return lab if lab is not None else str(a)

    def elements(self) -> range:
        return range(self.n)

    def atoms(self) -> tuple[int, ...]:
        """Elements covering bottom (minimal nonzero elements)."""
        if self._atoms is None:
            down_sizes = self._leq.sum(axis=0)
            mask = down_sizes == 2  # exactly {bottom, self}
            self._atoms = tuple(int(a) for a in np.flatnonzero(mask))
        return self._atoms

    def covers(self) -> list[tuple[int, int]]:
        """Cover pairs ``(i, j)`` with ``j`` covering ``i``, sorted."""
        strict = self._leq & ~np.eye(self.n, dtype=bool)
        two_step = (strict.astype(np.float32) @ strict.astype(np.float32)) > 0.5
        cov = strict & ~two_step
        return [(int(i), int(j)) for i, j in np.argwhere(cov)]

    def complement_pairs(self) -> list[tuple[int, int]]:
        """Unordered pairs ``(a, ortho(a))`` with ``a < ortho(a)``, each once."""
        pairs = set()
        for a in range(self.n):
            b = int(self._ortho[a])
            pairs.add((a, b) if a <= b else (b, a))
        return sorted(pairs)

    def orthogonal_pairs(self) -> list[tuple[int, int]]:
        """All unordered pairs ``a < b`` with ``a`` orthogonal to ``b``."""
        orth = self._leq[:, self._ortho]  # orth[a, b] = a <= ortho(b)
        out = []
        for a in range(self.n):
            for b in np.flatnonzero(orth[a, a + 1 :]) + a + 1:
                out.append((a, int(b)))
        return out

    def commutes(self, a: int, b: int) -> bool:
        """Whether ``a = (a ^ b) v (a ^ ~b)`` (compatibility of a with b)."""
        self._check_handle(a, b)
        m = self._meet
        return int(self._join[m[a, b], m[a, self._ortho[b]]]) == a

    def blocks(self) -> tuple[tuple[int, ...], ...]:
        """Maximal Boolean sublattices (maximal sets of pairwise compatible
        elements), each sorted ascending; the list is sorted lexicographically.

        Requires the lattice to be orthomodular; otherwise maximal compatible
        sets need not be Boolean subalgebras.
        """
        if self._blocks is not None:
            return self._blocks
        om = is_orthomodular(self)
        if not om.holds:
            raise LawViolationError(
                f"blocks require an orthomodular lattice; witness {om.witness}",
                report=om,
            )
        import networkx as nx

        m, j, o = self._meet, self._join, self._ortho
        comm = j[m, m[:, o]] == np.arange(self.n)[:, None]
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n))
        graph.add_edges_from(
            (int(a), int(b)) for a, b in np.argwhere(comm & comm.T) if a < b
        )
        cliques = [tuple(sorted(c)) for c in nx.find_cliques(graph)]
        self._blocks = tuple(sorted(cliques))
        return self._blocks

    # -- misc ----------------------------------------------------------------

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        nm = f" {self.name!r}" if self.name else ""
        return f"<OrthoLattice{nm} n={self.n}>"

    def equal_structure(self, other: "OrthoLattice") -> bool:
        """Element-for-element equality: same order, ortho map and labels."""
        return (
            self.n == other.n
            and np.array_equal(self._leq, other._leq)
            and np.array_equal(self._ortho, other._ortho)
            and self.labels == other.labels
        )


# -- law checks ---------------------------------------------------------------

ORTHOLATTICE_LAWS = (
    "partial-order",
    "unique-meet-join",
    "ortho-involution",
    "ortho-order-reversal",
    "complement-join",
    "complement-meet",
)


def validate_ortholattice(L: OrthoLattice) -> list[LawReport]:
    """Check every ortholattice law, one report per law.

    The partial-order and unique-meet-join laws always hold for constructed
    lattices (the constructor enforces them); they are reported for
    completeness.  The orthocomplement laws are checked exhaustively.
    """
    n = L.n
    o = L._ortho
    reports = [
        LawReport("partial-order", True, detail="enforced at construction"),
        LawReport("unique-meet-join", True, detail="enforced at construction"),
    ]

    invol = o[o] == np.arange(n)
    if invol.all():
        reports.append(LawReport("ortho-involution", True))
    else:
        a = int(np.flatnonzero(~invol)[0])
        reports.append(
            LawReport(
                "ortho-involution",
                False,
                (a,),
                f"ortho(ortho({a})) = {int(o[o[a]])} != {a}",
            )
        )

    # a <= b must imply ortho(b) <= ortho(a)
    rev = L._leq[np.ix_(o, o)].T  # rev[a, b] = leq[ortho(b), ortho(a)]
    broken = L._leq & ~rev
    if broken.any():
        a, b = _first_true(broken)
        reports.append(
            LawReport("ortho-order-reversal", False, (a, b), f"{a} <= {b} but complements not reversed")
        )
    else:
        reports.append(LawReport("ortho-order-reversal", True))

    idx = np.arange(n)
    cj = L._join[idx, o] == L.top
    if cj.all():
        reports.append(LawReport("complement-join", True))
    else:
        a = int(np.flatnonzero(~cj)[0])
        reports.append(LawReport("complement-join", False, (a,), f"{a} v ortho({a}) != top"))

    cm = L._meet[idx, o] == L.bottom
    if cm.all():
        reports.append(LawReport("complement-meet", True))
    else:
        a = int(np.flatnonzero(~cm)[0])
        reports.append(LawReport("complement-meet", False, (a,), f"{a} ^ ortho({a}) != bottom"))

    return reports


def is_orthomodular(L: OrthoLattice) -> LawReport:
    """Check ``a <= b  implies  b = a v (ortho(a) ^ b)`` over all pairs."""
    n = L.n
    idx = np.arange(n)
    rhs = L._join[idx[:, None], L._meet[L._ortho, :]]  # rhs[a, b] = a v (~a ^ b)
    broken = L._leq & (rhs != idx[None, :])
    if broken.any():
        a, b = _first_true(broken)
        return LawReport(
            "orthomodular",
            False,
            (a, b),
            f"{a} <= {b} but {a} v (ortho({a}) ^ {b}) = {int(rhs[a, b])}",
        )
    return LawReport("orthomodular", True)


def is_modular(L: OrthoLattice) -> LawReport:
    """Check ``a <= c  implies  a v (b ^ c) = (a v b) ^ c`` over all triples."""
    n = L.n
    meet, join = L._meet, L._join
    for a in range(n):
        lhs = join[a][meet]  # lhs[b, c] = a v (b ^ c)
        rhs = meet[join[a], :]  # rhs[b, c] = (a v b) ^ c
        broken = (lhs != rhs) & L._leq[a][None, :]
        if broken.any():
            b, c = _first_true(broken)
            return LawReport(
                "modular",
                False,
                (a, b, c),
                f"{a} <= {c} but {a} v ({b} ^ {c}) = {int(lhs[b, c])} "
                f"!= ({a} v {b}) ^ {c} = {int(rhs[b, c])}",
            )
    return LawReport("modular", True)


def is_distributive(L: OrthoLattice) -> LawReport:
    """Check ``a ^ (b v c) = (a ^ b) v (a ^ c)`` over all triples.

    A distributive ortholattice is Boolean.
    """
    n = L.n
    meet, join = L._meet, L._join
    for a in range(n):
        ma = meet[a]
        lhs = ma[join]  # lhs[b, c] = a ^ (b v c)
        rhs = join[np.ix_(ma, ma)]  # rhs[b, c] = (a ^ b) v (a ^ c)
        broken = lhs != rhs
        if broken.any():
            b, c = _first_true(broken)
            return LawReport(
                "distributive",
                False,
                (a, b, c),
                f"{a} ^ ({b} v {c}) = {int(lhs[b, c])} "
                f"!= ({a} ^ {b}) v ({a} ^ {c}) = {int(rhs[b, c])}",
            )
    return LawReport("distributive", True)


def law_holds_at(L: OrthoLattice, law_name: str, witness: Iterable[int]) -> bool:
    """Re-evaluate a named law at a specific tuple of elements.

    Returns True when the law holds at the tuple; a valid witness from a
    failing :class:`LawReport` therefore evaluates to False.
    """
    w = tuple(witness)
    o, m, j = L.ortho, L.meet, L.join
    if law_name == "ortho-involution":
        (a,) = w
        return o(o(a)) == a
    if law_name == "ortho-order-reversal":
        a, b = w
        return (not L.leq(a, b)) or L.leq(o(b), o(a))
    if law_name == "complement-join":
        (a,) = w
        return j(a, o(a)) == L.top
    if law_name == "complement-meet":
        (a,) = w
        return m(a, o(a)) == L.bottom
    if law_name == "orthomodular":
        a, b = w
        return (not L.leq(a, b)) or j(a, m(o(a), b)) == b
    if law_name == "modular":
        a, b, c = w
        return (not L.leq(a, c)) or j(a, m(b, c)) == m(j(a, b), c)
    if law_name == "distributive":
        a, b, c = w
        return m(a, j(b, c)) == j(m(a, b), m(a, c))
    raise ValueError(f"no pointwise evaluator for law {law_name!r}")
