"""Probability states on finite ortholattices, with exact rational arithmetic.

A state assigns a rational in [0, 1] to every lattice element such that
bottom maps to 0, complements sum to 1, and the value of a join of two
orthogonal elements is the sum of their values.  Those axioms, read as
linear constraints with one variable per element, cut out a convex polytope
whose members are exactly the states; this module builds that constraint
system, decides feasibility by exact LP, enumerates the polytope's vertices
by the double-description method, and computes the classical-versus-quantum
defect functionals.

Everything here is :class:`fractions.Fraction` arithmetic so that defect
signs and vertex coordinates are exact and can serve as test oracles.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import (
    FormatError,
    MissingElementError,
    NoStateError,
    NormalizationError,
    SizeCapError,
)
from .lattice import LawReport, OrthoLattice
from .linprog import LPResult, rref, solve_box_lp
from .vertexenum import enumerate_polytope_vertices

ZERO = Fraction(0)
ONE = Fraction(1)

#: Free dimensions beyond which vertex enumeration refuses to run.
VERTEX_DIM_CAP = 12


@dataclass(frozen=True)
class State:
    """A total assignment of exact rationals to the elements of a lattice.

    ``approximate`` flags assignments obtained by rounding floating-point
    data (e.g. Born values); validation then compares with a tolerance
    instead of exactly.
    """

    lattice: OrthoLattice
    values: tuple[Fraction, ...]
    approximate: bool = False

    def __post_init__(self):
        if len(self.values) != self.lattice.n:
            raise MissingElementError(
                f"state assigns {len(self.values)} values to a lattice of "
                f"{self.lattice.n} elements"
            )
        object.__setattr__(self, "values", tuple(Fraction(v) for v in self.values))

    def __call__(self, a: int) -> Fraction:
        self.lattice._check_handle(a)
        return self.values[a]


def as_state(L: OrthoLattice, s: "State | Mapping[int, Fraction] | Sequence") -> State:
    """Coerce a mapping or sequence of rationals into a State on L."""
    if isinstance(s, State):
        if s.lattice is not L and not s.lattice.equal_structure(L):
            raise MissingElementError("state belongs to a different lattice")
        return s
    if isinstance(s, Mapping):
        missing = [a for a in range(L.n) if a not in s]
        if missing:
            raise MissingElementError(f"no value for element {missing[0]}")
        return State(L, tuple(Fraction(s[a]) for a in range(L.n)))
    vals = tuple(Fraction(v) for v in s)
    return State(L, vals)


@dataclass(frozen=True)
class DefectReport:
    """Exact evaluation of one classical identity on one state.

    ``defect = left - right``; zero means the classical identity holds at
    the given elements.
    """

    kind: str
    elements: tuple[int, ...]
    left: Fraction
    right: Fraction

    @property
    def defect(self) -> Fraction:
        return self.left - self.right


@dataclass
class StatePolytope:
    """Linear description (and optionally the vertex list) of all states.

    Equality rows are over one variable per lattice element; the implicit
    bounds 0 <= x <= 1 complete the H-representation.  ``dim`` is the
    dimension of the affine solution set (-1 when the equalities are
    already inconsistent).
    """

    lattice: OrthoLattice
    eq_rows: tuple[tuple[Fraction, ...], ...]
    eq_rhs: tuple[Fraction, ...]
    dim: int
    vertices: tuple[State, ...] | None = None

    @property
    def constraint_count(self) -> int:
        return len(self.eq_rows) + 2 * self.lattice.n


@dataclass(frozen=True)
class FeasibilityResult:
    """Outcome of the state-existence LP.

    When feasible, ``state`` is a concrete state.  When infeasible,
    ``certificate`` refutes feasibility over the standard-form system
    (rows/rhs included for independent verification by inner product).
    """

    feasible: bool
    state: State | None = None
    certificate: tuple[Fraction, ...] | None = None
    std_rows: tuple[tuple[Fraction, ...], ...] | None = None
    std_rhs: tuple[Fraction, ...] | None = None


# -- validation -----------------------------------------------------------------


def validate_state(
    L: OrthoLattice,
    s: State | Mapping[int, Fraction] | Sequence,
    tol: Fraction | float = ZERO,
) -> LawReport:
    """Check the state axioms; first failure wins.

    Laws checked in order: value range, bottom nullity, top normalization,
    complement rule for every element, additivity over every orthogonal
    pair, and order preservation.  ``tol`` relaxes every comparison (used
    for states rounded from floating-point data).
    """
    st = as_state(L, s)
    v = st.values
    t = Fraction(tol) if not isinstance(tol, Fraction) else tol

    def close(x: Fraction, y: Fraction) -> bool:
        return abs(x - y) <= t

    for a in range(L.n):
        if v[a] < -t or v[a] > ONE + t:
            return LawReport("state-range", False, (a,), f"s({a}) = {v[a]} outside [0,1]")
    if not close(v[L.bottom], ZERO):
        return LawReport("state-bottom", False, (L.bottom,), f"s(bottom) = {v[L.bottom]}")
    if not close(v[L.top], ONE):
        return LawReport("state-top", False, (L.top,), f"s(top) = {v[L.top]}")
    for a in range(L.n):
        if not close(v[a] + v[L.ortho(a)], ONE):
            return LawReport(
                "state-complement",
                False,
                (a,),
                f"s({a}) + s(ortho({a})) = {v[a] + v[L.ortho(a)]} != 1",
            )
    for a, b in L.orthogonal_pairs():
        j = L.join(a, b)
        if not close(v[j], v[a] + v[b]):
            return LawReport(
                "state-additivity",
                False,
                (a, b),
                f"s({a} v {b}) = {v[j]} != s({a}) + s({b}) = {v[a] + v[b]}",
            )
    for a in range(L.n):
        for b in range(L.n):
            if L.leq(a, b) and v[a] > v[b] + t:
                return LawReport(
                    "state-monotone", False, (a, b), f"{a} <= {b} but s({a}) > s({b})"
                )
    return LawReport("state-axioms", True)


def kolmogorov_from_weights(weights: Sequence[Fraction]) -> State:
    """Classical measure on the power-set lattice from outcome weights.

    Weights must be nonnegative rationals summing to one; the state of a
    subset is the sum of its outcome weights, which satisfies
    inclusion-exclusion exactly.
    """
    from .formats import gen_boolean

    w = [Fraction(x) for x in weights]
    if any(x < 0 for x in w):
        raise NormalizationError("weights must be nonnegative")
    if sum(w) != 1:
        raise NormalizationError(f"weights sum to {sum(w)}, expected 1")
    n = len(w)
    L = gen_boolean(n)
    values = tuple(
        sum((w[i] for i in range(n) if mask >> i & 1), ZERO) for mask in range(1 << n)
    )
    return State(L, values)


# -- the polytope -----------------------------------------------------------------


def state_constraints(L: OrthoLattice) -> StatePolytope:
    """Emit the H-representation of the state polytope.

    Equalities: x_bottom = 0, x_top = 1, one complement row per unordered
    complement pair, and one additivity row per unordered orthogonal pair;
    bounds 0 <= x <= 1 are implicit in the polytope object.
    """
    n = L.n
    rows: list[tuple[Fraction, ...]] = []
    rhs: list[Fraction] = []

    def basis_row(entries: dict[int, Fraction]) -> tuple[Fraction, ...]:
        row = [ZERO] * n
        for idx, val in entries.items():
            row[idx] += val
        return tuple(row)

    rows.append(basis_row({L.bottom: ONE}))
    rhs.append(ZERO)
    rows.append(basis_row({L.top: ONE}))
    rhs.append(ONE)
    for a, b in L.complement_pairs():
        rows.append(basis_row({a: ONE, b: ONE}))
        rhs.append(ONE)
    for a, b in L.orthogonal_pairs():
        j = L.join(a, b)
        entries: dict[int, Fraction] = {a: ONE, b: ONE}
        entries[j] = entries.get(j, ZERO) - ONE
        rows.append(basis_row(entries))
        rhs.append(ZERO)

    red_rows, _, pivots, conflict = rref(rows, rhs)
    dim = -1 if conflict is not None else n - len(red_rows)
    return StatePolytope(L, tuple(rows), tuple(rhs), dim)


def admits_state(L: OrthoLattice) -> FeasibilityResult:
    """Exact LP feasibility of the state axioms.

    Returns a concrete state when one exists, otherwise a Farkas
    certificate over the standard-form constraint system.
    """
    poly = state_constraints(L)
    res: LPResult = solve_box_lp(poly.eq_rows, poly.eq_rhs, L.n)
    if res.feasible:
        return FeasibilityResult(True, state=State(L, res.x))
    return FeasibilityResult(
        False,
        certificate=res.certificate,
        std_rows=res.std_rows,
        std_rhs=res.std_rhs,
    )


def _solve_affine(poly: StatePolytope):
    """Particular solution and nullspace basis of the equality system.

    Returns (particular, basis_columns) with exact entries, or None when
    the equalities are inconsistent.
    """
    n = poly.lattice.n
    red_rows, red_rhs, pivots, conflict = rref(poly.eq_rows, poly.eq_rhs)
    if conflict is not None:
        return None
    pivot_set = set(pivots)
    free = [c for c in range(n) if c not in pivot_set]
    particular = [ZERO] * n
    for r, pc in enumerate(pivots):
        particular[pc] = red_rhs[r]
    basis = []
    for fc in free:
        vec = [ZERO] * n
        vec[fc] = ONE
        for r, pc in enumerate(pivots):
            vec[pc] = -red_rows[r][fc]
        basis.append(vec)
    return particular, basis


def state_polytope_vertices(L: OrthoLattice) -> StatePolytope:
    """Enumerate all vertices of the state polytope, exactly.

    The equality system is solved first; the box bounds are then expressed
    over the free coordinates and handed to the double-description method.
    Refuses to run above ``VERTEX_DIM_CAP`` free dimensions (the
    H-representation remains available via :func:`state_constraints`).
    Every returned vertex passes :func:`validate_state` exactly; the list
    is duplicate-free and sorted lexicographically.
    """
    poly = state_constraints(L)
    solved = _solve_affine(poly)
    if solved is None:
        poly.vertices = ()
        return poly
    particular, basis = solved
    k = len(basis)
    if k != poly.dim:
        raise AssertionError("nullspace dimension disagrees with rank computation")
    if k > VERTEX_DIM_CAP:
        raise SizeCapError(
            f"state polytope has {k} free dimensions, over the cap of {VERTEX_DIM_CAP}"
        )

    n = L.n
    if k == 0:
        ok = all(ZERO <= particular[i] <= ONE for i in range(n))
        points = [tuple(particular)] if ok else []
    else:
        ineq_rows: list[tuple[Fraction, ...]] = []
        ineq_rhs: list[Fraction] = []
        for i in range(n):
            coeffs = tuple(basis[d][i] for d in range(k))
            # x_i <= 1  ->  N_i . y <= 1 - p_i
            ineq_rows.append(coeffs)
            ineq_rhs.append(ONE - particular[i])
            # x_i >= 0  ->  -N_i . y <= p_i
            ineq_rows.append(tuple(-c for c in coeffs))
            ineq_rhs.append(particular[i])
        ys = enumerate_polytope_vertices(ineq_rows, ineq_rhs)
        points = sorted(
            {
                tuple(
                    particular[i] + sum(basis[d][i] * y[d] for d in range(k))
                    for i in range(n)
                )
                for y in ys
            }
        )

    vertices = []
    for point in points:
        st = State(L, point)
        report = validate_state(L, st)
        if not report.holds:
            raise AssertionError(
                f"enumerated vertex violates {report.law_name} at {report.witness}"
            )
        vertices.append(st)
    poly.vertices = tuple(vertices)
    return poly


# -- defect functionals -----------------------------------------------------------


def inclusion_exclusion_defect(s: State, a: int, b: int) -> DefectReport:
    """``s(a v b) - [s(a) + s(b) - s(a ^ b)]``, exactly.

    Zero for every state on a Boolean lattice; can be strictly positive on
    non-distributive lattices.
    """
    L = s.lattice
    L._check_handle(a, b)
    left = s(L.join(a, b))
    right = s(a) + s(b) - s(L.meet(a, b))
    return DefectReport("inclusion-exclusion", (a, b), left, right)


def total_probability_defect(s: State, a: int, b: int) -> DefectReport:
    """``s(a) - [s(a ^ b) + s(a ^ ortho(b))]``, exactly (sign not asserted)."""
    L = s.lattice
    L._check_handle(a, b)
    left = s(a)
    right = s(L.meet(a, b)) + s(L.meet(a, L.ortho(b)))
    return DefectReport("total-probability", (a, b), left, right)


def superadditivity_witness(
    L: OrthoLattice,
) -> tuple[State, int, int] | None:
    """Search for a state with ``s(a) + s(b) < s(a v b)`` and ``a ^ b = 0``.

    One exact LP per candidate pair maximizes the gap; the maximizing
    (state, a, b) is returned, ties broken by lexicographic pair order.
    Returns None when the classical equality binds for every pair and
    every state (as on Boolean lattices).
    """
    poly = state_constraints(L)
    best: tuple[Fraction, int, int, tuple[Fraction, ...]] | None = None
    for a in range(L.n):
        for b in range(a + 1, L.n):
            if L.meet(a, b) != L.bottom:
                continue
            j = L.join(a, b)
            objective = [ZERO] * L.n
            objective[j] += ONE
            objective[a] -= ONE
            objective[b] -= ONE
            res = solve_box_lp(poly.eq_rows, poly.eq_rhs, L.n, objective, maximize=True)
            if not res.feasible:
                return None
            if best is None or res.value > best[0]:
                best = (res.value, a, b, res.x)
    if best is None or best[0] <= 0:
        return None
    value, a, b, x = best
    return State(L, x), a, b


# -- sampling ---------------------------------------------------------------------


def random_state(
    L: OrthoLattice, seed: int, polytope: StatePolytope | None = None
) -> State:
    """Deterministic pseudo-random state: a rational convex combination of
    the polytope's vertices with weights derived from ``seed``."""
    if polytope is None or polytope.vertices is None:
        polytope = state_polytope_vertices(L)
    verts = polytope.vertices
    if not verts:
        raise NoStateError("lattice admits no state")
    rng = random.Random(seed)
    raw = [rng.randrange(1, 1 << 20) for _ in verts]
    total = sum(raw)
    weights = [Fraction(r, total) for r in raw]
    values = tuple(
        sum((w * v.values[i] for w, v in zip(weights, verts)), ZERO)
        for i in range(L.n)
    )
    return State(L, values)


# -- .state text format ------------------------------------------------------------


def lattice_fingerprint(L: OrthoLattice) -> str:
    """Stable 16-hex-digit digest of the canonical serialization."""
    from .formats import serialize

    return hashlib.sha256(serialize(L).encode()).hexdigest()[:16]


def format_state(s: State) -> str:
    """Render one state as ``.state`` text (LF endings)."""
    L = s.lattice
    name = L.name if L.name else "-"
    lines = ["state 1", f"lattice {name} {lattice_fingerprint(L)}"]
    lines += [
        f"value {i} {v.numerator}/{v.denominator}" for i, v in enumerate(s.values)
    ]
    return "\n".join(lines) + "\n"


def parse_state(text: str, L: OrthoLattice) -> State:
    """Parse ``.state`` text against a lattice, verifying the fingerprint."""
    lines = [ln for ln in text.split("\n")]
    if not lines or lines[0].strip() != "state 1":
        raise FormatError("expected header 'state 1'", line=1)
    values: dict[int, Fraction] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        parts = stripped.split()
        if parts[0] == "lattice" and len(parts) == 3:
            if parts[2] != lattice_fingerprint(L):
                raise FormatError(
                    f"state file is for lattice {parts[1]} (fingerprint {parts[2]}), "
                    f"not the given one",
                    line=lineno,
                )
        elif parts[0] == "value" and len(parts) == 3:
            try:
                idx = int(parts[1])
                num, den = parts[2].split("/")
                values[idx] = Fraction(int(num), int(den))
            except (ValueError, ZeroDivisionError):
                raise FormatError(f"bad value line {stripped!r}", line=lineno) from None
        else:
            raise FormatError(f"unrecognized directive {stripped!r}", line=lineno)
    missing = [a for a in range(L.n) if a not in values]
    if missing:
        raise MissingElementError(f"no value for element {missing[0]}")
    return State(L, tuple(values[a] for a in range(L.n)))


def format_vertex_dump(poly: StatePolytope) -> str:
    """One ``.state`` block per vertex, blocks separated by blank lines."""
    if poly.vertices is None:
        raise ValueError("polytope has no vertex list; enumerate first")
    return "\n".join(format_state(v) for v in poly.vertices)
