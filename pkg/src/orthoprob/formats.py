"""Text formats and generators for finite ortholattices.

Two line-oriented formats are supported:

``.oml``
    Explicit Hasse data: ``oml 1`` header, ``elements <n>``, optional
    ``label <i> <name>`` lines, ``cover <i> <j>`` (j covers i),
    ``ortho <i> <j>``, ``bottom <i>``, ``top <i>``; ``#`` starts a comment.
    The serializer is canonical (directives ordered by kind then index, one
    per line, LF endings), so parse/serialize round-trips are byte-exact.

``.gre``
    Block diagrams: ``gre 1`` header then one ``block a b c ...`` line per
    block; atoms are bare names and two blocks may share at most one atom.
    Parsing pastes the blocks into a single lattice and accepts the result
    only if every ortholattice law plus orthomodularity holds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DanglingLabelError,
    DiagramError,
    FormatError,
    LawViolationError,
    NotALatticeError,
    PastingError,
    SizeCapError,
)
from .lattice import ELEMENT_CAP, OrthoLattice, is_orthomodular, validate_ortholattice

#: n cap for gen_boolean; the dense element cap below still applies.
BOOLEAN_N_CAP = 20


@dataclass(frozen=True)
class LatticeDocument:
    """Parsed or to-be-serialized ``.oml`` content."""

    elements: int
    covers: tuple[tuple[int, int], ...]
    ortho_pairs: tuple[tuple[int, int], ...]
    bottom: int
    top: int
    labels: tuple[tuple[int, str], ...] = ()
    name: str | None = None


@dataclass(frozen=True)
class GreechieDiagram:
    """Atoms and blocks of a block diagram.

    Invariants checked at construction: every block has at least two
    distinct atoms, every atom appears in at least one block, and any two
    blocks share at most one atom.
    """

    atom_names: tuple[str, ...]
    blocks: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        seen = set()
        for blk in self.blocks:
            if len(blk) < 2 or len(set(blk)) != len(blk):
                raise DiagramError(f"block {blk} needs >= 2 distinct atoms")
            seen.update(blk)
        for name in self.atom_names:
            if name not in seen:
                raise DiagramError(f"atom {name!r} appears in no block")
        if seen - set(self.atom_names):
            raise DiagramError("block atom missing from atom list")
        for i in range(len(self.blocks)):
            for j in range(i + 1, len(self.blocks)):
                shared = set(self.blocks[i]) & set(self.blocks[j])
                if len(shared) > 1:
                    raise DiagramError(
                        f"blocks {i} and {j} share {sorted(shared)}; at most one atom allowed"
                    )


# -- .oml ----------------------------------------------------------------------


def parse_document(text: str) -> LatticeDocument:
    """Parse ``.oml`` text into a document, checking only document syntax."""
    lines = text.split("\n")
    if not lines or lines[0].strip() != "oml 1":
        raise FormatError("expected header 'oml 1'", line=1)

    n: int | None = None
    covers: list[tuple[int, int]] = []
    ortho: list[tuple[int, int]] = []
    labels: list[tuple[int, str]] = []
    bottom: int | None = None
    top: int | None = None

    def want_int(tok: str, lineno: int) -> int:
        try:
            return int(tok)
        except ValueError:
            raise FormatError(f"expected integer, got {tok!r}", line=lineno) from None

    for lineno, raw in enumerate(lines[1:], start=2):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        parts = stripped.split()
        kind = parts[0]
        if kind == "elements" and len(parts) == 2:
            n = want_int(parts[1], lineno)
        elif kind == "label" and len(parts) == 3:
            labels.append((want_int(parts[1], lineno), parts[2]))
        elif kind == "cover" and len(parts) == 3:
            covers.append((want_int(parts[1], lineno), want_int(parts[2], lineno)))
        elif kind == "ortho" and len(parts) == 3:
            ortho.append((want_int(parts[1], lineno), want_int(parts[2], lineno)))
        elif kind == "bottom" and len(parts) == 2:
            bottom = want_int(parts[1], lineno)
        elif kind == "top" and len(parts) == 2:
            top = want_int(parts[1], lineno)
        else:
            raise FormatError(f"unrecognized directive {stripped!r}", line=lineno)

    if n is None:
        raise FormatError("missing 'elements' directive")
    if n < 1:
        raise FormatError("element count must be positive")
    if bottom is None or top is None:
        raise FormatError("missing 'bottom' or 'top' directive")

    for i, name in labels:
        if not (0 <= i < n):
            raise DanglingLabelError(f"label for nonexistent element {i}")
    for i, j in covers + ortho:
        if not (0 <= i < n and 0 <= j < n):
            raise FormatError(f"directive refers to nonexistent element in ({i}, {j})")
    if not (0 <= bottom < n and 0 <= top < n):
        raise FormatError("bottom/top out of range")
    seen_lab = set()
    for i, _ in labels:
        if i in seen_lab:
            raise FormatError(f"element {i} labeled twice")
        seen_lab.add(i)

    return LatticeDocument(
        elements=n,
        covers=tuple(sorted(set(covers))),
        ortho_pairs=tuple(sorted(set(ortho))),
        bottom=bottom,
        top=top,
        labels=tuple(sorted(labels)),
    )


def build_lattice(doc: LatticeDocument, name: str | None = None) -> OrthoLattice:
    """Construct and fully validate an ortholattice from a document.

    Raises :class:`FormatError` for acyclicity/ortho-totality problems,
    :class:`NotALatticeError` when meets or joins are not unique, and
    :class:`LawViolationError` (with the failing report) when an
    orthocomplement law fails.
    """
    n = doc.elements
    adj = np.zeros((n, n), dtype=bool)
    for i, j in doc.covers:
        adj[i, j] = True

    # reflexive-transitive closure of the cover relation
    leq = np.eye(n, dtype=bool) | adj
    while True:
        nxt = leq | ((leq.astype(np.float32) @ leq.astype(np.float32)) > 0.5)
        if np.array_equal(nxt, leq):
            break
        leq = nxt

    cyc = leq & leq.T & ~np.eye(n, dtype=bool)
    if cyc.any():
        i, j = np.argwhere(cyc)[0]
        raise FormatError(f"cover relation has a cycle through ({int(i)}, {int(j)})")

    ortho = np.full(n, -1, dtype=np.int32)
    for i, j in doc.ortho_pairs:
        for a, b in ((i, j), (j, i)):
            if ortho[a] not in (-1, b):
                raise FormatError(f"element {a} appears in two ortho pairs")
            ortho[a] = b
    missing = np.flatnonzero(ortho < 0)
    if missing.size:
        raise FormatError(f"element {int(missing[0])} has no ortho pair")

    if not leq[doc.bottom].all():
        raise FormatError(f"declared bottom {doc.bottom} is not below every element")
    if not leq[:, doc.top].all():
        raise FormatError(f"declared top {doc.top} is not above every element")

    label_map = dict(doc.labels)
    labels = tuple(label_map.get(i) for i in range(n)) if label_map else None

    L = OrthoLattice(leq, ortho, labels=labels, name=name or doc.name)
    for report in validate_ortholattice(L):
        if not report.holds:
            raise LawViolationError(
                f"law {report.law_name} fails at {report.witness}: {report.detail}",
                report=report,
            )
    return L


def parse_lattice(text: str, name: str | None = None) -> OrthoLattice:
    """Parse ``.oml`` text into a validated ortholattice."""
    return build_lattice(parse_document(text), name=name)


def document_from_lattice(L: OrthoLattice) -> LatticeDocument:
    labels = (
        tuple((i, L.labels[i]) for i in range(L.n) if L.labels[i] is not None)
        if L.labels is not None
        else ()
    )
    ortho = sorted({(min(a, L.ortho(a)), max(a, L.ortho(a))) for a in range(L.n)})
    return LatticeDocument(
        elements=L.n,
        covers=tuple(L.covers()),
        ortho_pairs=tuple(ortho),
        bottom=L.bottom,
        top=L.top,
        labels=labels,
        name=L.name,
    )


def render_document(doc: LatticeDocument) -> str:
    """Canonical ``.oml`` text: directives by kind then index, LF endings."""
    out = ["oml 1", f"elements {doc.elements}", f"bottom {doc.bottom}", f"top {doc.top}"]
    out += [f"label {i} {name}" for i, name in sorted(doc.labels)]
    out += [f"cover {i} {j}" for i, j in sorted(doc.covers)]
    out += [f"ortho {i} {j}" for i, j in sorted(doc.ortho_pairs)]
    return "\n".join(out) + "\n"


def serialize(L: OrthoLattice) -> str:
    """Emit canonical ``.oml`` text; re-parsing reproduces the lattice."""
    return render_document(document_from_lattice(L))


# -- .gre / pasting --------------------------------------------------------------


def parse_greechie_document(text: str) -> GreechieDiagram:
    lines = text.split("\n")
    if not lines or lines[0].strip() != "gre 1":
        raise FormatError("expected header 'gre 1'", line=1)
    blocks: list[tuple[str, ...]] = []
    atom_order: list[str] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        parts = stripped.split()
        if parts[0] != "block" or len(parts) < 2:
            raise FormatError(f"unrecognized directive {stripped!r}", line=lineno)
        blk = tuple(parts[1:])
        blocks.append(blk)
        for a in blk:
            if a not in atom_order:
                atom_order.append(a)
    if not blocks:
        raise FormatError("no blocks in diagram")
    return GreechieDiagram(atom_names=tuple(atom_order), blocks=tuple(blocks))


class _UnionFind:
    """Union-find over arbitrary hashable keys (keys mapped to dense ints)."""

    def __init__(self):
        self.ids: dict = {}
        self.parent: list[int] = []

    def _id(self, x) -> int:
        i = self.ids.get(x)
        if i is None:
            i = self.ids[x] = len(self.parent)
            self.parent.append(i)
        return i

    def find(self, x):
        i = self._id(x)
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def paste_blocks(diagram: GreechieDiagram, name: str | None = None) -> OrthoLattice:
    """Paste the Boolean power sets of the blocks into one lattice.

    Elements are equivalence classes of (block, atom-subset) pairs: the
    empty subset is bottom, a full block is top, shared subsets and the
    in-block complements of shared subsets are identified across blocks.
    The pasted structure is returned only if it is a lattice satisfying
    every ortholattice law plus orthomodularity; otherwise a
    :class:`PastingError` carries the first failing law and witness.
    """
    blocks = [tuple(b) for b in diagram.blocks]
    atom_pos = {a: i for i, a in enumerate(diagram.atom_names)}

    def subsets(blk):
        k = len(blk)
        for mask in range(1 << k):
            yield frozenset(blk[i] for i in range(k) if mask >> i & 1)

    uf = _UnionFind()
    universe: list[tuple[int, frozenset]] = []
    for bi, blk in enumerate(blocks):
        for sub in subsets(blk):
            universe.append((bi, sub))

    for bi in range(len(blocks)):
        for bj in range(bi + 1, len(blocks)):
            seti, setj = set(blocks[bi]), set(blocks[bj])
            shared = seti & setj
            for sub in subsets(tuple(sorted(shared, key=atom_pos.get))):
                uf.union((bi, sub), (bj, sub))
                uf.union((bi, frozenset(seti - sub)), (bj, frozenset(setj - sub)))

    roots = sorted({uf.find(e) for e in universe})

    def class_key(root):
        members = [e for e in universe if uf.find(e) == root]
        reprs = sorted(
            (len(s), tuple(sorted(s, key=atom_pos.get)), bi) for bi, s in members
        )
        return reprs[0]

    keyed = sorted(roots, key=class_key)
    # order: bottom (empty subset) first, top (full block) last, middle by size/name
    bottom_root = uf.find((0, frozenset()))
    top_root = uf.find((0, frozenset(blocks[0])))
    middle = [r for r in keyed if r not in (bottom_root, top_root)]
    ordered = [bottom_root] + middle + [top_root]
    index = {r: i for i, r in enumerate(ordered)}
    n = len(ordered)
    if n > ELEMENT_CAP:
        raise SizeCapError(f"pasting yields {n} elements, over the cap of {ELEMENT_CAP}")

    def label_of(root) -> str:
        if root == bottom_root:
            return "0"
        if root == top_root:
            return "1"
        size, atoms, _ = class_key(root)
        if size == 1:
            return atoms[0]
        return "{" + ",".join(atoms) + "}"

    labels = tuple(label_of(r) for r in ordered)
    if len(set(labels)) != n:
        raise PastingError("identification collapsed distinct classes onto one label")

    leq = np.eye(n, dtype=bool)
    for bi, blk in enumerate(blocks):
        subs = list(subsets(blk))
        for s1 in subs:
            for s2 in subs:
                if s1 <= s2:
                    leq[index[uf.find((bi, s1))], index[uf.find((bi, s2))]] = True
    # transitive closure across blocks
    while True:
        nxt = leq | ((leq.astype(np.float32) @ leq.astype(np.float32)) > 0.5)
        if np.array_equal(nxt, leq):
            break
        leq = nxt

    anti = leq & leq.T & ~np.eye(n, dtype=bool)
    if anti.any():
        i, j = np.argwhere(anti)[0]
        raise PastingError(
            f"pasted order not antisymmetric at ({labels[int(i)]}, {labels[int(j)]})"
        )

    ortho = np.full(n, -1, dtype=np.int32)
    for bi, blk in enumerate(blocks):
        for sub in subsets(blk):
            a = index[uf.find((bi, sub))]
            b = index[uf.find((bi, frozenset(set(blk) - sub)))]
            if ortho[a] not in (-1, b):
                raise PastingError(
                    f"orthocomplement of {labels[a]!r} differs between blocks"
                )
            ortho[a] = b

    try:
        L = OrthoLattice(leq, ortho, labels=labels, name=name)
    except NotALatticeError as exc:
        raise PastingError(f"pasted structure is not a lattice: {exc}") from exc

    for report in validate_ortholattice(L) + [is_orthomodular(L)]:
        if not report.holds:
            raise PastingError(
                f"pasted structure fails {report.law_name} at {report.witness}",
                report=report,
            )
    return L


def parse_greechie(text: str, name: str | None = None) -> OrthoLattice:
    """Parse ``.gre`` text and paste its blocks into a validated lattice."""
    return paste_blocks(parse_greechie_document(text), name=name)


# -- generators ------------------------------------------------------------------


def gen_boolean(n: int, name: str | None = None) -> OrthoLattice:
    """Power-set lattice of an ``n``-element outcome set (2**n elements).

    Elements are subset bitmasks in numeric order; the orthocomplement is
    the set complement.  ``n`` is capped at 20 by contract and further by
    the dense-representation element cap (2**n <= 4096).
    """
    if n < 1:
        raise SizeCapError("gen_boolean requires n >= 1 (n = 0 is degenerate)")
    if n > BOOLEAN_N_CAP:
        raise SizeCapError(f"gen_boolean caps n at {BOOLEAN_N_CAP}, got {n}")
    size = 1 << n
    if size > ELEMENT_CAP:
        raise SizeCapError(
            f"boolean lattice with 2**{n} = {size} elements exceeds the dense cap "
            f"of {ELEMENT_CAP}"
        )
    masks = np.arange(size, dtype=np.int32)
    leq = (masks[:, None] & ~masks[None, :]) == 0
    meet = masks[:, None] & masks[None, :]
    join = masks[:, None] | masks[None, :]
    ortho = (size - 1) ^ masks
    labels = tuple(
        "{" + ",".join(str(i) for i in range(n) if m >> i & 1) + "}" for m in masks
    )
    return OrthoLattice(
        leq,
        ortho,
        labels=labels,
        name=name or f"boolean{n}",
        _tables=(meet, join),
    )


def gen_mo(n: int, name: str | None = None) -> OrthoLattice:
    """MO(n): bottom, top, and ``n`` complementary atom pairs (2n+2 elements).

    Atom ``2i+1`` and atom ``2i+2`` form block ``i``; distinct blocks share
    only bottom and top.  Orthomodular for every n, non-distributive for
    n >= 2, and isomorphic to the 4-element Boolean lattice for n = 1.
    """
    if n < 1:
        raise SizeCapError("gen_mo requires n >= 1")
    size = 2 * n + 2
    if size > ELEMENT_CAP:
        raise SizeCapError(f"MO({n}) has {size} elements, over the cap of {ELEMENT_CAP}")
    bottom, top = 0, size - 1
    leq = np.eye(size, dtype=bool)
    leq[bottom, :] = True
    leq[:, top] = True

    meet = np.full((size, size), bottom, dtype=np.int32)
    join = np.full((size, size), top, dtype=np.int32)
    for x in range(size):
        meet[x, x] = join[x, x] = x
        meet[bottom, x] = meet[x, bottom] = bottom
        join[bottom, x] = join[x, bottom] = x
        meet[top, x] = meet[x, top] = x
        join[top, x] = join[x, top] = top

    ortho = np.empty(size, dtype=np.int32)
    ortho[bottom], ortho[top] = top, bottom
    labels = ["0"] + [""] * (2 * n) + ["1"]
    for i in range(n):
        a, b = 2 * i + 1, 2 * i + 2
        ortho[a], ortho[b] = b, a
        labels[a] = f"a{i + 1}"
        labels[b] = f"a{i + 1}'"
    return OrthoLattice(
        leq,
        ortho,
        labels=tuple(labels),
        name=name or f"mo{n}",
        _tables=(meet, join),
    )
