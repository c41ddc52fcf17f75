"""Associativity analysis of two-argument combination rules on a grid.

A combination rule ``f`` is sampled on a square grid over ``[0, x_max]``.
The key diagnostic is the associativity residual
``max |f(f(x,y),z) - f(x,f(y,z))|`` over all grid triples whose composed
values stay inside the domain (others are skipped and counted).  For rules
that are associative, a strictly monotone map ``h`` with
``h(f(x,y)) = h(x) + h(y)`` is constructed by iterating the rule from a
unit value and bisecting ``f(t,t) = v`` on dyadic levels; this realizes the
fact that monotone associative rules are addition up to a rescaling.
Rescalings themselves can be applied and are checked to preserve
associativity at grid resolution.

Grid functions are validated at construction: strictly increasing in each
argument and identity at zero (``f(x, 0) = x``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numba import njit

from .errors import DomainError, FormatError, PreconditionError
from .lattice import LawReport, OrthoLattice

DEFAULT_GRID_N = 1025  # step 1/1024 on [0, 1]
ASSOCIATIVITY_GATE = 1e-4
BISECTION_XTOL = 1e-12
DYADIC_LEVELS = 10
IDENTITY_TOL = 1e-9


@dataclass(frozen=True)
class GridFunction:
    """Two-argument rule sampled on a square grid over ``[0, x_max]``.

    ``values[i, j] = f(x_i, x_j)`` with ``x_i = i * step``.  Construction
    validates strict monotonicity along both axes and identity at zero.
    """

    x_max: float
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[0] != v.shape[1] or v.shape[0] < 2:
            raise DomainError("grid values must be a square matrix with n >= 2")
        if not (self.x_max > 0):
            raise DomainError("x_max must be positive")
        if not (np.diff(v, axis=0) > 0).all() or not (np.diff(v, axis=1) > 0).all():
            raise DomainError("grid function must be strictly increasing in each argument")
        grid = np.linspace(0.0, self.x_max, v.shape[0])
        if np.max(np.abs(v[:, 0] - grid)) > IDENTITY_TOL:
            raise DomainError("grid function must satisfy f(x, 0) = x")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def step(self) -> float:
        return self.x_max / (self.n - 1)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.x_max, self.n)

    def at(self, u: float, v: float) -> float:
        """Bilinear interpolation inside the domain square."""
        if not (0.0 <= u <= self.x_max and 0.0 <= v <= self.x_max):
            raise DomainError(f"point ({u}, {v}) outside [0, {self.x_max}]^2")
        h = self.step
        n = self.n
        iu = min(int(u / h), n - 2)
        jv = min(int(v / h), n - 2)
        wu = u / h - iu
        wv = v / h - jv
        vv = self.values
        return float(
            (1 - wu) * ((1 - wv) * vv[iu, jv] + wv * vv[iu, jv + 1])
            + wu * ((1 - wv) * vv[iu + 1, jv] + wv * vv[iu + 1, jv + 1])
        )


def grid_from_callable(
    fn: Callable[[float, float], float],
    n: int = DEFAULT_GRID_N,
    x_max: float = 1.0,
    name: str = "",
) -> GridFunction:
    xs = np.linspace(0.0, x_max, n)
    vals = fn(xs[:, None], xs[None, :])
    return GridFunction(x_max, np.asarray(vals, dtype=np.float64), name=name)


BUILTIN_RULES: dict[str, Callable[[float, float], float]] = {
    "sum": lambda x, y: x + y,
    "sumprod": lambda x, y: x + y + x * y,
    "sumsq": lambda x, y: x + y * y,
}


def builtin_grid(name: str, n: int = DEFAULT_GRID_N, x_max: float = 1.0) -> GridFunction:
    if name not in BUILTIN_RULES:
        raise FormatError(f"unknown builtin rule {name!r}; have {sorted(BUILTIN_RULES)}")
    return grid_from_callable(BUILTIN_RULES[name], n=n, x_max=x_max, name=name)


# -- associativity residual ----------------------------------------------------------


@dataclass(frozen=True)
class ResidualReport:
    """Exhaustive associativity scan result.

    ``max_residual`` is over admissible triples; ``worst_triple`` is the
    lexicographically first grid triple attaining it (None when the
    residual is zero).
    """

    max_residual: float
    admissible: int
    skipped: int
    worst_triple: tuple[int, int, int] | None

    def __float__(self) -> float:
        return self.max_residual


@njit(cache=True)
def _residual_kernel(v: np.ndarray, h: float, x_max: float):
    n = v.shape[0]
    best = 0.0
    bi = bj = bk = -1
    admissible = 0
    for i in range(n):
        for j in range(n):
            u = v[i, j]
            if u > x_max:
                break  # increasing in j: all later j inadmissible too
            pu = u / h
            iu = int(pu)
            if iu > n - 2:
                iu = n - 2
            wu = pu - iu
            for k in range(n):
                w = v[j, k]
                if w > x_max:
                    break  # increasing in k
                lhs = (1.0 - wu) * v[iu, k] + wu * v[iu + 1, k]
                pw = w / h
                jw = int(pw)
                if jw > n - 2:
                    jw = n - 2
                ww = pw - jw
                rhs = (1.0 - ww) * v[i, jw] + ww * v[i, jw + 1]
                diff = abs(lhs - rhs)
                admissible += 1
                if diff > best:
                    best = diff
                    bi, bj, bk = i, j, k
    return best, bi, bj, bk, admissible


def associativity_residual(f: GridFunction) -> ResidualReport:
    """Max associativity defect over all admissible grid triples.

    A triple (i, j, k) is admissible when both composed values
    ``f(x_i, x_j)`` and ``f(x_j, x_k)`` stay within the domain; composed
    arguments are linearly interpolated.  Raises
    :class:`~orthoprob.errors.DomainError` when no triple is admissible.
    """
    best, bi, bj, bk, admissible = _residual_kernel(f.values, f.step, f.x_max)
    n = f.n
    if admissible == 0:
        raise DomainError("no admissible triples: domain too small for composition")
    skipped = n * n * n - admissible
    worst = (int(bi), int(bj), int(bk)) if best > 0 else None
    return ResidualReport(float(best), int(admissible), int(skipped), worst)


# -- additive representation ----------------------------------------------------------


@dataclass(frozen=True)
class Representation:
    """Monotone map ``h`` on the grid with ``h(f(x,y)) ~ h(x) + h(y)``.

    ``residual`` is the max additivity defect of ``h`` over admissible
    grid pairs.  ``h(0) = 0`` and strict monotonicity are construction
    invariants.
    """

    grid: np.ndarray
    values: np.ndarray
    unit: float
    residual: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.float64)
        if abs(v[0]) > 1e-12:
            raise DomainError("representation must satisfy h(0) = 0")
        if not (np.diff(v) > 0).all():
            raise DomainError("representation must be strictly increasing")
        v.flags.writeable = False
        g = np.asarray(self.grid, dtype=np.float64)
        g.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "grid", g)

    def at(self, x) -> np.ndarray:
        return np.interp(x, self.grid, self.values)


def _diag_values(f: GridFunction) -> np.ndarray:
    return np.ascontiguousarray(np.diagonal(f.values))


def _diag_at(f: GridFunction, t: float) -> float:
    """f(t, t) interpolated along the sampled diagonal (1-d, more accurate
    than bilinear through cell interiors)."""
    return float(np.interp(t, f.grid, _diag_values(f)))


def _solve_diagonal(f: GridFunction, target: float) -> float:
    """Unique t with f(t, t) = target; the diagonal is strictly monotone,
    so this is the exact inverse of its piecewise-linear interpolant (the
    limit of bisecting it to arbitrary tolerance)."""
    diag = _diag_values(f)
    if target > diag[-1] or target < 0:
        raise DomainError(f"cannot bracket f(t,t) = {target}")
    return float(np.interp(target, diag, f.grid))


def _additive_orbit(f: GridFunction, unit: float, levels: int, strategy: str):
    """Knot list (x, h) at multiples of the level-``levels`` quantum.

    The quantum ``t`` solves ``f(t, t) = ...`` nested ``levels`` times from
    the unit, so ``h(t) = 2**-levels``.  Knots for the multiples are built
    either by an incremental walk (``x(k+1) = f(x(k), quantum)``; exact for
    rules that are linear in each argument) or by balanced binary
    composition (``x(2k) = f(x(k), x(k))`` along the sampled diagonal,
    ``x(2k+1) = f(x(k+1), x(k))``; robust for rules strongly curved near
    zero, where tiny second arguments poison the walk).
    """
    quantum = unit
    for _ in range(levels):
        quantum = _solve_diagonal(f, quantum)
    step_q = 2.0**-levels

    xs = [0.0, quantum]
    qs = [0.0, step_q]
    known = {0: 0.0, 1: quantum}
    m = 2
    while True:
        half = m // 2
        if strategy == "walk":
            nxt = f.at(known[m - 1], quantum)
        elif m % 2 == 0:
            nxt = _diag_at(f, known[half])
        else:
            nxt = f.at(known[half + 1], known[half])
        if nxt > f.x_max:
            prev = known[m - 1]
            if prev < f.x_max:
                frac = (f.x_max - prev) / (nxt - prev)
                xs.append(f.x_max)
                qs.append((m - 1 + frac) * step_q)
            break
        if nxt <= known[m - 1]:
            raise DomainError("additive orbit is not strictly increasing")
        known[m] = nxt
        xs.append(nxt)
        qs.append(m * step_q)
        m += 1
        if m > 4_000_000:
            raise DomainError("additive orbit failed to reach x_max")
    return np.asarray(xs), np.asarray(qs)


def _refine_knots(f: GridFunction, xs: np.ndarray, qs: np.ndarray, rounds: int = 10):
    """Insert midpoint knots where adjacent knots are farther than a quarter
    grid step.

    The midpoint of (q1, q2) in h-space has x = t solving
    ``f(t, t) = x(q1 + q2)``.  The value ``x(q1 + q2)`` is looked up among
    already-known knots when present (knot h-values are dyadic, so the sum
    is often exactly a knot) and only composed as ``f(x(q1), x(q2))``
    otherwise; the lookup avoids evaluating the rule at badly-conditioned
    argument pairs near zero.
    """
    knots = list(zip(xs.tolist(), qs.tolist()))
    by_q = {q: x for x, q in knots}
    target_gap = f.step / 4
    for _ in range(rounds):
        inserts = []
        for (x1, q1), (x2, q2) in zip(knots, knots[1:]):
            if x2 - x1 <= target_gap:
                continue
            v = by_q.get(q1 + q2)
            if v is None:
                v = f.at(x1, x2)  # x(q1 + q2), within domain iff <= x_max
                if v > f.x_max:
                    continue
            t = _solve_diagonal(f, v)
            # below one grid step the interpolated rule carries no curvature
            # information, so sub-step knots would only be noise
            if x1 < t < x2 and t >= f.step:
                inserts.append((t, 0.5 * (q1 + q2)))
        if not inserts:
            break
        for t, q in inserts:
            by_q.setdefault(q, t)
        knots = sorted(set(knots) | set(inserts))
    out_x, out_q = zip(*knots)
    return np.asarray(out_x), np.asarray(out_q)


def _additive_residual(f: GridFunction, xs: np.ndarray, qs: np.ndarray) -> float:
    """Max of |h(f(x,y)) - h(x) - h(y)| over in-domain grid pairs."""
    vals = f.values
    mask = vals <= f.x_max
    h_grid = np.interp(f.grid, xs, qs)
    hv = np.interp(vals[mask], xs, qs)
    hx = np.broadcast_to(h_grid[:, None], vals.shape)[mask]
    hy = np.broadcast_to(h_grid[None, :], vals.shape)[mask]
    return float(np.max(np.abs(hv - hx - hy))) if hv.size else 0.0


def extract_additive_representation(f: GridFunction, unit: float) -> Representation:
    """Construct the additive rescaling of an associative rule.

    Sets ``h(unit) = 1``, fills dyadic levels below the unit by solving
    ``f(t, t) = v`` with bisection, walks the f-orbit of the finest
    quantum for the remaining values, and interpolates monotonically
    between the resulting knots.  The dyadic depth adapts: depths up to
    ``DYADIC_LEVELS`` are tried and the representation with the smallest
    additive residual wins (a too-fine quantum can fall below the grid
    resolution where the rule is strongly curved, poisoning the orbit).
    Requires the associativity residual below 1e-4.
    """
    if not (0 < unit <= f.x_max):
        raise DomainError(f"unit must lie in (0, {f.x_max}]")
    gate = associativity_residual(f)
    if gate.max_residual >= ASSOCIATIVITY_GATE:
        raise PreconditionError(
            f"rule is not associative at grid resolution: residual "
            f"{gate.max_residual:.3e} at triple {gate.worst_triple}"
        )

    best: tuple[float, np.ndarray, np.ndarray] | None = None
    for strategy in ("walk", "tree"):
        for levels in range(DYADIC_LEVELS, 0, -1):
            try:
                xs, qs = _additive_orbit(f, unit, levels, strategy)
                keep = (xs == 0.0) | (xs >= f.step)  # sub-step knots are noise
                xs, qs = _refine_knots(f, xs[keep], qs[keep])
            except DomainError:
                continue
            residual = _additive_residual(f, xs, qs)
            if best is None or residual < best[0]:
                best = (residual, xs, qs)
            if best[0] < 1e-9:
                break
        if best is not None and best[0] < 1e-9:
            break
    if best is None:
        raise DomainError("no dyadic depth produced a valid orbit")
    residual, xs, qs = best
    return Representation(xs, qs, float(unit), residual)


# -- rescalings ------------------------------------------------------------------------


@dataclass(frozen=True)
class MonotoneMap:
    """Strictly increasing map sampled on a grid, with g(0) = 0."""

    grid: np.ndarray
    values: np.ndarray
    name: str = ""

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=np.float64)
        v = np.asarray(self.values, dtype=np.float64)
        if g.shape != v.shape or g.ndim != 1 or g.size < 2:
            raise DomainError("map needs matching 1-d grid and values")
        if abs(v[0]) > 1e-12 or abs(g[0]) > 1e-12:
            raise DomainError("map must satisfy g(0) = 0")
        if not (np.diff(v) > 0).all() or not (np.diff(g) > 0).all():
            raise DomainError("map must be strictly increasing")
        g.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    def at(self, x):
        """Piecewise-linear evaluation, linearly extrapolated past the end."""
        x = np.asarray(x, dtype=np.float64)
        out = np.interp(x, self.grid, self.values)
        slope = (self.values[-1] - self.values[-2]) / (self.grid[-1] - self.grid[-2])
        beyond = x > self.grid[-1]
        out = np.where(beyond, self.values[-1] + slope * (x - self.grid[-1]), out)
        return out

    def inverse_at(self, y):
        """Exact inverse of the piecewise-linear interpolant."""
        y = np.asarray(y, dtype=np.float64)
        if (y < -1e-12).any() or (y > self.values[-1] + 1e-12).any():
            raise DomainError("inverse argument outside the map's range")
        return np.interp(y, self.values, self.grid)


BUILTIN_MAPS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "identity": lambda t: t,
    "double": lambda t: 2.0 * t,
    "square": lambda t: t * t,
}


def builtin_map(name: str, f: GridFunction) -> MonotoneMap:
    if name not in BUILTIN_MAPS:
        raise FormatError(f"unknown builtin map {name!r}; have {sorted(BUILTIN_MAPS)}")
    g = f.grid
    return MonotoneMap(g.copy(), np.asarray(BUILTIN_MAPS[name](g)), name=name)


def rescaling_transport(f: GridFunction, g: MonotoneMap) -> GridFunction:
    """Conjugate the rule by a monotone map: ``g(f(g^-1 x, g^-1 y))``.

    The transported rule lives on ``[0, g(x_max)]`` with the same grid
    resolution; rescaling preserves associativity up to interpolation
    error.
    """
    if abs(g.grid[-1] - f.x_max) > 1e-12:
        raise DomainError("map must be sampled on the rule's domain")
    new_max = float(g.values[-1])
    xs = np.linspace(0.0, new_max, f.n)
    ss = g.inverse_at(xs)
    vals = np.empty((f.n, f.n), dtype=np.float64)
    for i in range(f.n):
        for j in range(f.n):
            vals[i, j] = f.at(float(ss[i]), float(ss[j]))
    return GridFunction(new_max, np.asarray(g.at(vals)), name=f"{f.name}@{g.name}" if f.name else "")


# -- deduced probability rules on lattices ----------------------------------------------


def _set_partitions(items: tuple[int, ...]):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] + [first]] + part[i + 1 :]
        yield [[first]] + part


def maximal_orthogonal_families(L: OrthoLattice) -> list[tuple[int, ...]]:
    """All maximal pairwise-orthogonal families, via block atom partitions.

    Every maximal family of pairwise-orthogonal nonzero elements lives
    inside a block and corresponds to a partition of that block's atoms,
    each part contributing the join of its members.  Returned families are
    sorted tuples, duplicate-free, in lexicographic order.
    """
    families: set[tuple[int, ...]] = set()
    for block in L.blocks():
        block_set = set(block)
        block_atoms = tuple(
            x
            for x in block
            if x != L.bottom
            and all(not (L.leq(y, x) and y != x) for y in block_set - {L.bottom})
        )
        for partition in _set_partitions(block_atoms):
            family = []
            for part in partition:
                j = part[0]
                for other in part[1:]:
                    j = L.join(j, other)
                family.append(j)
            families.add(tuple(sorted(family)))
    return sorted(families)


def cox_rules_check(L: OrthoLattice, s, tol=0) -> LawReport:
    """Verify the deduced probability rules on a concrete assignment.

    Checks, with exact arithmetic (or within ``tol``): nullity at bottom,
    the negation rule ``s(not a) = 1 - s(a)`` for every element, and
    additivity over every maximal pairwise-orthogonal family.
    """
    from fractions import Fraction

    from .states import as_state

    st = as_state(L, s)
    v = st.values
    t = Fraction(tol) if not isinstance(tol, Fraction) else tol

    if abs(v[L.bottom]) > t:
        return LawReport("cox-null", False, (L.bottom,), f"s(bottom) = {v[L.bottom]}")
    for a in range(L.n):
        if abs(v[a] + v[L.ortho(a)] - 1) > t:
            return LawReport(
                "cox-negation",
                False,
                (a,),
                f"s({a}) + s(ortho({a})) = {v[a] + v[L.ortho(a)]}",
            )
    for family in maximal_orthogonal_families(L):
        j = family[0]
        for other in family[1:]:
            j = L.join(j, other)
        total = sum((v[m] for m in family), Fraction(0))
        if abs(v[j] - total) > t:
            return LawReport(
                "cox-additivity",
                False,
                family,
                f"s(join) = {v[j]} != sum = {total}",
            )
    return LawReport("cox-deduced-rules", True)


# -- grid text format --------------------------------------------------------------------


def format_grid(f: GridFunction) -> str:
    """Render a grid function: ``grid <n> <x_max>`` then n rows of n values."""
    lines = [f"grid {f.n} {f.x_max:.17g}"]
    for row in f.values:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    return "\n".join(lines) + "\n"


def parse_grid(text: str) -> GridFunction:
    lines = [ln.strip() for ln in text.strip().split("\n") if ln.strip()]
    head = lines[0].split()
    if len(head) != 3 or head[0] != "grid":
        raise FormatError("expected header 'grid <n> <x_max>'", line=1)
    try:
        n, x_max = int(head[1]), float(head[2])
    except ValueError:
        raise FormatError("bad grid header numbers", line=1) from None
    if len(lines) - 1 != n:
        raise FormatError(f"expected {n} rows, got {len(lines) - 1}")
    vals = np.zeros((n, n), dtype=np.float64)
    for r in range(n):
        toks = lines[1 + r].split()
        if len(toks) != n:
            raise FormatError(f"row {r} has {len(toks)} entries, expected {n}", line=r + 2)
        vals[r] = [float(tk) for tk in toks]
    return GridFunction(x_max, vals)
