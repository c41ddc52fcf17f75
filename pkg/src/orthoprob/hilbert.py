"""Concrete quantum realization: projections, density matrices, Born values.

Projections and density matrices are complex double-precision matrices with
validated invariants.  Closed subspaces are handled through orthonormal
bases; meets are computed by the kernel method, joins by orthonormalizing
the union of spanning sets, and orthocomplements from the full SVD.  A
finite family of seed subspaces can be closed under meet/join/ortho into a
finite projection lattice, returned as an abstract
:class:`~orthoprob.lattice.OrthoLattice` together with the embedding, and
any density matrix then induces a state on that lattice via the trace
formula ``s(P) = tr(rho P)``.

This module is the floating-point counterpart of the exact machinery in
:mod:`orthoprob.states`: tolerances are fixed and subspace-equality
decisions that fall into an ambiguous band raise instead of guessing.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    BasisError,
    ClosureOverflowError,
    DimensionMismatchError,
    IllConditionedError,
    LawViolationError,
)
from .lattice import OrthoLattice, is_orthomodular, validate_ortholattice

TOL_ORTHONORMAL = 1e-9
TOL_IDEMPOTENT = 1e-9
TOL_TRACE = 1e-12
TOL_EIGEN = 1e-9
TOL_SUBSPACE_EQUAL = 1e-8
TOL_SUBSPACE_AMBIG = 1e-10
TOL_RANK = 1e-10


def _as_complex_matrix(entries) -> np.ndarray:
    m = np.asarray(entries, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatchError("expected a square matrix")
    return m


@dataclass(frozen=True)
class SubspaceBasis:
    """Orthonormal spanning vectors (rows) of a closed subspace; possibly none."""

    dimension: int
    vectors: np.ndarray  # shape (rank, dimension)

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=np.complex128).reshape(-1, self.dimension)
        gram = v @ v.conj().T
        if v.shape[0] and np.max(np.abs(gram - np.eye(v.shape[0]))) > TOL_ORTHONORMAL:
            raise BasisError("spanning vectors are not orthonormal")
        v.flags.writeable = False
        object.__setattr__(self, "vectors", v)

    @property
    def rank(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class Projection:
    """Hermitian idempotent matrix (orthogonal projector)."""

    dimension: int
    matrix: np.ndarray

    def __post_init__(self):
        m = _as_complex_matrix(self.matrix)
        if m.shape[0] != self.dimension:
            raise DimensionMismatchError("matrix size disagrees with dimension")
        if np.max(np.abs(m - m.conj().T)) > TOL_IDEMPOTENT:
            raise BasisError("projection is not Hermitian")
        if np.max(np.abs(m @ m - m)) > TOL_IDEMPOTENT:
            raise BasisError("projection is not idempotent")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def rank(self) -> int:
        return int(round(float(np.trace(self.matrix).real)))


@dataclass(frozen=True)
class DensityMatrix:
    """Positive semidefinite Hermitian matrix of unit trace."""

    dimension: int
    matrix: np.ndarray

    def __post_init__(self):
        m = _as_complex_matrix(self.matrix)
        if m.shape[0] != self.dimension:
            raise DimensionMismatchError("matrix size disagrees with dimension")
        if np.max(np.abs(m - m.conj().T)) > TOL_IDEMPOTENT:
            raise BasisError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > TOL_TRACE or abs(np.trace(m).imag) > TOL_TRACE:
            raise BasisError(f"density trace is {np.trace(m)}, expected 1")
        if np.linalg.eigvalsh(m).min() < -TOL_EIGEN:
            raise BasisError("density matrix has a negative eigenvalue")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)


# -- elementary operations ---------------------------------------------------------


def projector_from_basis(basis: SubspaceBasis) -> Projection:
    """Projector onto the span: the sum of v v-dagger over basis vectors."""
    v = basis.vectors
    d = basis.dimension
    mat = v.T @ v.conj() if v.shape[0] else np.zeros((d, d), dtype=np.complex128)
    return Projection(d, mat)


def basis_from_projector(p: Projection) -> SubspaceBasis:
    """Orthonormal basis of the range of a projector (eigenvectors at 1)."""
    vals, vecs = np.linalg.eigh(p.matrix)
    cols = vecs[:, vals > 0.5]
    return SubspaceBasis(p.dimension, cols.T)


def born(rho: DensityMatrix, p: Projection) -> float:
    """The trace value ``tr(rho P)``, a probability in [0, 1].

    Values outside [0, 1] by more than 1e-9, or with a nonnegligible
    imaginary part, indicate invalid inputs and raise.
    """
    if rho.dimension != p.dimension:
        raise DimensionMismatchError(
            f"density is {rho.dimension}-dimensional, projection {p.dimension}"
        )
    tr = complex(np.trace(rho.matrix @ p.matrix))
    if abs(tr.imag) > 1e-12:
        raise BasisError(f"trace has imaginary part {tr.imag}")
    val = tr.real
    if val < -1e-9 or val > 1 + 1e-9:
        raise BasisError(f"trace value {val} is outside [0,1] beyond tolerance")
    return min(1.0, max(0.0, val))


def transition_probability(psi: np.ndarray, phi: np.ndarray) -> float:
    """Squared inner product of two unit vectors (symmetric in arguments)."""
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    phi = np.asarray(phi, dtype=np.complex128).reshape(-1)
    if psi.shape != phi.shape:
        raise DimensionMismatchError("vectors live in different dimensions")
    for v in (psi, phi):
        if abs(np.linalg.norm(v) - 1.0) > TOL_ORTHONORMAL:
            raise BasisError("vector is not unit norm")
    return float(min(1.0, abs(np.vdot(psi, phi)) ** 2))


# -- subspace lattice operations ---------------------------------------------------


def _orthonormal_rows(rows: np.ndarray, d: int) -> SubspaceBasis:
    if rows.size == 0:
        return SubspaceBasis(d, np.zeros((0, d), dtype=np.complex128))
    _, svals, vh = np.linalg.svd(rows, full_matrices=False)
    rank = int(np.sum(svals > TOL_RANK * max(1.0, float(svals[0]) if svals.size else 1.0)))
    return SubspaceBasis(d, vh[:rank])


def subspace_join(a: SubspaceBasis, b: SubspaceBasis) -> SubspaceBasis:
    """Closed span of the union (orthonormalized)."""
    if a.dimension != b.dimension:
        raise DimensionMismatchError("ambient dimensions differ")
    rows = np.vstack([a.vectors, b.vectors])
    return _orthonormal_rows(rows, a.dimension)


def subspace_ortho(a: SubspaceBasis) -> SubspaceBasis:
    """Orthogonal complement (kernel of the projector)."""
    d = a.dimension
    if a.rank == 0:
        return SubspaceBasis(d, np.eye(d, dtype=np.complex128))
    _, svals, vh = np.linalg.svd(a.vectors, full_matrices=True)
    rank = int(np.sum(svals > TOL_RANK * max(1.0, float(svals[0]))))
    return SubspaceBasis(d, vh[rank:].conj())


def subspace_meet(a: SubspaceBasis, b: SubspaceBasis) -> SubspaceBasis:
    """Intersection via the kernel method: null space of stacked co-projectors."""
    if a.dimension != b.dimension:
        raise DimensionMismatchError("ambient dimensions differ")
    d = a.dimension
    pa = projector_from_basis(a).matrix
    pb = projector_from_basis(b).matrix
    stacked = np.vstack([np.eye(d) - pa, np.eye(d) - pb])
    _, svals, vh = np.linalg.svd(stacked, full_matrices=True)
    rank = int(np.sum(svals > 1e-9 * max(1.0, float(svals[0]) if svals.size else 1.0)))
    return SubspaceBasis(d, vh[rank:].conj())


# -- lattice closure ---------------------------------------------------------------


def _proj_distance(p: np.ndarray, q: np.ndarray) -> float:
    return float(np.max(np.abs(p - q)))


def generate_projection_lattice(
    seeds: list[SubspaceBasis],
    cap: int = 512,
    *,
    equal_tol: float = TOL_SUBSPACE_EQUAL,
) -> tuple[OrthoLattice, dict[int, SubspaceBasis]]:
    """Close seeds under meet, join, and orthocomplement into a lattice.

    Subspace identity is decided by max-entry projector distance: below
    ``equal_tol / 100`` two subspaces are the same element, above
    ``equal_tol`` they are distinct, and the band in between raises
    :class:`IllConditionedError` rather than guessing.  The closure stops
    at a fixpoint or raises :class:`ClosureOverflowError` past ``cap``
    elements.  The returned abstract lattice (ordered by subspace
    inclusion) is validated: it must satisfy every ortholattice law plus
    orthomodularity.
    """
    if cap < 2:
        raise ClosureOverflowError("cap must allow at least bottom and top")
    if not seeds:
        raise BasisError("need at least one seed subspace")
    d = seeds[0].dimension
    for s in seeds:
        if s.dimension != d:
            raise DimensionMismatchError("seeds live in different ambient dimensions")

    ambig_tol = equal_tol / 100.0

    members: list[SubspaceBasis] = []
    projs: list[np.ndarray] = []

    def find_or_add(basis: SubspaceBasis) -> int | None:
        p = projector_from_basis(basis).matrix
        dists = [_proj_distance(p, q) for q in projs]
        exact = [i for i, dd in enumerate(dists) if dd < ambig_tol]
        band = [i for i, dd in enumerate(dists) if ambig_tol <= dd < equal_tol]
        if band:
            raise IllConditionedError(
                f"subspace comparison ambiguous: distance {min(dists[i] for i in band):.3e} "
                f"in [{ambig_tol:.0e}, {equal_tol:.0e})"
            )
        if exact:
            return exact[0]
        if len(members) >= cap:
            raise ClosureOverflowError(
                f"closure exceeded the cap of {cap} elements before reaching a fixpoint"
            )
        members.append(basis)
        projs.append(p)
        return None

    find_or_add(SubspaceBasis(d, np.zeros((0, d), dtype=np.complex128)))
    find_or_add(SubspaceBasis(d, np.eye(d, dtype=np.complex128)))
    for s in seeds:
        find_or_add(s)

    frontier = list(range(len(members)))
    while frontier:
        new_frontier: list[int] = []

        def register(basis: SubspaceBasis):
            before = len(members)
            if find_or_add(basis) is None:
                new_frontier.append(before)

        for i in list(frontier):
            register(subspace_ortho(members[i]))
        processed = set()
        for i in frontier:
            for j in range(len(members)):
                key = (min(i, j), max(i, j))
                if key in processed or i == j:
                    continue
                processed.add(key)
                register(subspace_meet(members[i], members[j]))
                register(subspace_join(members[i], members[j]))
        frontier = new_frontier

    # deterministic element order: by rank, then by rounded projector entries
    def canon_key(idx: int):
        p = projs[idx]
        flat = tuple(
            (round(float(z.real), 9) + 0.0, round(float(z.imag), 9) + 0.0)
            for z in p.ravel()
        )
        return (members[idx].rank, flat)

    order = sorted(range(len(members)), key=canon_key)
    members = [members[i] for i in order]
    projs = [projs[i] for i in order]
    n = len(members)

    leq = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(n):
            leq[i, j] = _proj_distance(projs[j] @ projs[i], projs[i]) < equal_tol

    ortho = np.empty(n, dtype=np.int32)
    eye = np.eye(d)
    for i in range(n):
        comp = eye - projs[i]
        dists = [_proj_distance(comp, q) for q in projs]
        ortho[i] = int(np.argmin(dists))
        if dists[ortho[i]] >= ambig_tol:
            raise IllConditionedError("orthocomplement missing from closure")

    labels = tuple(
        "0" if m.rank == 0 else ("1" if m.rank == d else f"s{i}")
        for i, m in enumerate(members)
    )
    L = OrthoLattice(leq, ortho, labels=labels, name=f"closure_d{d}_n{n}")

    for report in validate_ortholattice(L) + [is_orthomodular(L)]:
        if not report.holds:
            raise LawViolationError(
                f"closure lattice fails {report.law_name} at {report.witness}",
                report=report,
            )
    embedding = {i: members[i] for i in range(n)}
    return L, embedding


def born_state_on_lattice(rho: DensityMatrix, lattice: OrthoLattice, embedding):
    """Trace-formula state on a closure lattice, rounded to rationals.

    Each value ``tr(rho P_x)`` is snapped to the nearest multiple of 1e-12
    and flagged approximate; the result satisfies the state axioms within
    1e-9.
    """
    from .states import State, validate_state

    values = []
    for i in range(lattice.n):
        p = projector_from_basis(embedding[i])
        val = born(rho, p)
        values.append(Fraction(round(val * 10**12), 10**12))
    st = State(lattice, tuple(values), approximate=True)
    report = validate_state(lattice, st, tol=Fraction(1, 10**9))
    if not report.holds:
        raise LawViolationError(
            f"Born assignment violates {report.law_name} at {report.witness}",
            report=report,
        )
    return st


# -- seeded random inputs -----------------------------------------------------------


def random_density(d: int, seed: int) -> DensityMatrix:
    """Unit-trace positive matrix from a seeded complex Gaussian sample."""
    if d < 1:
        raise DimensionMismatchError("dimension must be >= 1")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return DensityMatrix(d, m)


def random_projection(d: int, rank: int, seed: int) -> Projection:
    """Projector onto the span of ``rank`` seeded random orthonormal vectors."""
    if not (0 <= rank <= d):
        raise DimensionMismatchError(f"rank {rank} not in 0..{d}")
    if rank == 0:
        return Projection(d, np.zeros((d, d), dtype=np.complex128))
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, _ = np.linalg.qr(g)
    basis = SubspaceBasis(d, q[:, :rank].T)
    return Projection(d, projector_from_basis(basis).matrix)


def random_resolution(d: int, seed: int) -> list[Projection]:
    """Random resolution of identity: orthogonal projectors summing to I.

    A seeded random unitary's columns are split at random cut points into
    groups; each group spans one projector.
    """
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    q, _ = np.linalg.qr(g)
    n_parts = int(rng.integers(1, d + 1))
    cuts = sorted(rng.choice(np.arange(1, d), size=n_parts - 1, replace=False).tolist()) if n_parts > 1 else []
    bounds = [0] + cuts + [d]
    projectors = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        basis = SubspaceBasis(d, q[:, lo:hi].T)
        projectors.append(Projection(d, projector_from_basis(basis).matrix))
    return projectors


# -- plain-text matrix format --------------------------------------------------------


def format_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}i"


def parse_complex(tok: str) -> complex:
    """Parse ``a+bi`` with optional exponents; split at the last bare sign."""
    if not tok.endswith("i"):
        raise ValueError(f"bad complex entry {tok!r}")
    body = tok[:-1]
    for k in range(len(body) - 1, 0, -1):
        if body[k] in "+-" and body[k - 1] not in "eE":
            return complex(float(body[:k]), float(body[k:]))
    raise ValueError(f"bad complex entry {tok!r}")


def format_matrix(m: np.ndarray) -> str:
    """Render a complex matrix in the ``mat`` text format (LF endings)."""
    m = np.asarray(m, dtype=np.complex128)
    rows, cols = m.shape
    lines = [f"mat {rows} {cols}"]
    for r in range(rows):
        lines.append(" ".join(format_complex(m[r, c]) for c in range(cols)))
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    """Parse ``mat`` text back into a complex matrix."""
    lines = [ln.strip() for ln in text.strip().split("\n") if ln.strip()]
    head = lines[0].split()
    if len(head) != 3 or head[0] != "mat":
        raise ValueError("expected header 'mat <rows> <cols>'")
    rows, cols = int(head[1]), int(head[2])
    if len(lines) - 1 != rows:
        raise ValueError(f"expected {rows} rows, got {len(lines) - 1}")
    out = np.zeros((rows, cols), dtype=np.complex128)
    for r in range(rows):
        toks = lines[1 + r].split()
        if len(toks) != cols:
            raise ValueError(f"row {r} has {len(toks)} entries, expected {cols}")
        for c, tok in enumerate(toks):
            out[r, c] = parse_complex(tok)
    return out
