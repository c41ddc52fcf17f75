"""Exact rational linear programming over unit-box-bounded equality systems.

Solves problems of the form

    A x = b,   0 <= x <= 1,   optionally maximize c . x

entirely in :class:`fractions.Fraction` arithmetic.  Upper bounds are
converted to slack rows, infeasibility is certified by a Farkas vector over
the standard-form rows, and pivoting uses Bland's rule so the run is
deterministic and cannot cycle.

This module is deliberately dense-tableau and small-scale: the systems it
sees come from finite lattices with at most a few dozen variables.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class LPResult:
    """Outcome of an exact LP solve.

    ``feasible`` reflects phase 1.  When infeasible, ``certificate`` is a
    Farkas vector y over ``std_rows`` satisfying ``y . std_rhs > 0`` and
    ``(y^T std_rows)_j <= 0`` for every column j, which refutes existence of
    a nonnegative solution.  When an objective was supplied, ``value`` and
    ``x`` hold the exact optimum over the first ``n_original`` variables.
    """

    feasible: bool
    x: tuple[Fraction, ...] | None = None
    value: Fraction | None = None
    certificate: tuple[Fraction, ...] | None = None
    std_rows: tuple[tuple[Fraction, ...], ...] | None = None
    std_rhs: tuple[Fraction, ...] | None = None


def rref(
    rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]
) -> tuple[list[list[Fraction]], list[Fraction], list[int], list[list[Fraction]] | None]:
    """Reduced row echelon form of [rows | rhs] with tracked multipliers.

    Returns (reduced_rows, reduced_rhs, pivot_columns, conflict_multiplier)
    where reduced rows exclude all-zero rows.  If the system is
    inconsistent, ``conflict_multiplier`` is a single combination vector y
    over the *original* rows with y.A = 0 and y.b != 0.
    """
    m = len(rows)
    if m == 0:
        return [], [], [], None
    n = len(rows[0])
    aug = [list(map(Fraction, rows[i])) + [Fraction(rhs[i])] for i in range(m)]
    trace = [[ONE if i == j else ZERO for j in range(m)] for i in range(m)]

    pivots: list[int] = []
    r = 0
    for col in range(n):
        pivot_row = next((i for i in range(r, m) if aug[i][col] != 0), None)
        if pivot_row is None:
            continue
        aug[r], aug[pivot_row] = aug[pivot_row], aug[r]
        trace[r], trace[pivot_row] = trace[pivot_row], trace[r]
        pv = aug[r][col]
        aug[r] = [v / pv for v in aug[r]]
        trace[r] = [v / pv for v in trace[r]]
        for i in range(m):
            if i != r and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [vi - f * vr for vi, vr in zip(aug[i], aug[r])]
                trace[i] = [ti - f * tr for ti, tr in zip(trace[i], trace[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break

    for i in range(r, m):
        if aug[i][n] != 0:  # 0 = nonzero -> inconsistent
            return [], [], [], [trace[i][k] for k in range(m)]
    reduced = [aug[i][:n] for i in range(r)]
    red_rhs = [aug[i][n] for i in range(r)]
    return reduced, red_rhs, pivots, None


class _Tableau:
    """Dense simplex tableau with Bland's rule."""

    def __init__(self, rows: list[list[Fraction]], rhs: list[Fraction]):
        self.m = len(rows)
        self.ncols = len(rows[0]) if rows else 0
        self.rows = [list(r) for r in rows]
        self.rhs = list(rhs)
        self.basis = [-1] * self.m

    def pivot(self, r: int, c: int) -> None:
        pv = self.rows[r][c]
        inv = ONE / pv
        self.rows[r] = [v * inv for v in self.rows[r]]
        self.rhs[r] *= inv
        for i in range(self.m):
            if i != r:
                f = self.rows[i][c]
                if f != 0:
                    row_r = self.rows[r]
                    self.rows[i] = [vi - f * vr for vi, vr in zip(self.rows[i], row_r)]
                    self.rhs[i] -= f * self.rhs[r]
        self.basis[r] = c

    def minimize(self, cost: list[Fraction]) -> tuple[Fraction, list[Fraction]]:
        """Minimize cost over the current basic feasible tableau (Bland)."""
        z = [Fraction(v) for v in cost]
        zval = ZERO
        for r, c in enumerate(self.basis):
            if z[c] != 0:
                f = z[c]
                z = [vi - f * vr for vi, vr in zip(z, self.rows[r])]
                zval -= f * self.rhs[r]
        while True:
            enter = next((jc for jc in range(self.ncols) if z[jc] < 0), None)
            if enter is None:
                return -zval, z
            leave, best = None, None
            for r in range(self.m):
                a = self.rows[r][enter]
                if a > 0:
                    ratio = self.rhs[r] / a
                    if best is None or ratio < best or (
                        ratio == best and self.basis[r] < self.basis[leave]
                    ):
                        best, leave = ratio, r
            if leave is None:
                raise ArithmeticError("LP unbounded; box-bounded systems cannot be")
            self.pivot(leave, enter)
            f = z[enter]
            z = [vi - f * vr for vi, vr in zip(z, self.rows[leave])]
            zval -= f * self.rhs[leave]

    def solution(self, nvars: int) -> list[Fraction]:
        x = [ZERO] * nvars
        for r, c in enumerate(self.basis):
            if c < nvars:
                x[c] = self.rhs[r]
        return x


def solve_box_lp(
    eq_rows: Sequence[Sequence[Fraction]],
    eq_rhs: Sequence[Fraction],
    n: int,
    objective: Sequence[Fraction] | None = None,
    maximize: bool = False,
) -> LPResult:
    """Exact solve of ``A x = b, 0 <= x <= 1`` with an optional objective.

    The equality system is first reduced to independent rows; redundant
    rows are dropped and an inconsistency is certified immediately.  The
    standard form appends one slack per variable for the upper bounds.
    """
    red_rows, red_rhs, _, conflict = rref(eq_rows, eq_rhs)
    if conflict is not None:
        # certificate over original equality rows, extended over slack rows
        m_orig = len(eq_rows)
        y = list(conflict)
        val = sum(y[i] * Fraction(eq_rhs[i]) for i in range(m_orig))
        if val < 0:
            y = [-v for v in y]
        std_rows = tuple(
            tuple(Fraction(v) for v in eq_rows[i]) + (ZERO,) * n for i in range(m_orig)
        ) + tuple(
            tuple(ONE if k in (i, n + i) else ZERO for k in range(2 * n))
            for i in range(n)
        )
        std_rhs = tuple(Fraction(v) for v in eq_rhs) + (ONE,) * n
        y_full = tuple(y) + (ZERO,) * n
        return LPResult(
            feasible=False, certificate=y_full, std_rows=std_rows, std_rhs=std_rhs
        )

    # standard form: [A 0; I I][x; s] = [b; 1], all variables >= 0
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for r, b in zip(red_rows, red_rhs):
        row = list(r) + [ZERO] * n
        if b < 0:
            row = [-v for v in row]
            b = -b
        rows.append(row)
        rhs.append(Fraction(b))
    for i in range(n):
        row = [ZERO] * (2 * n)
        row[i] = ONE
        row[n + i] = ONE
        rows.append(row)
        rhs.append(ONE)

    m = len(rows)
    width = 2 * n + m
    tab_rows = [rows[i] + [ONE if k == i else ZERO for k in range(m)] for i in range(m)]
    tab = _Tableau(tab_rows, rhs)
    tab.basis = [2 * n + i for i in range(m)]

    phase1_cost = [ZERO] * (2 * n) + [ONE] * m
    opt1, zrow = tab.minimize(phase1_cost)
    if opt1 > 0:
        # Farkas vector from reduced costs in the artificial columns
        y_red = [ONE - zrow[2 * n + i] for i in range(m)]
        std_rows_signed: list[tuple[Fraction, ...]] = []
        for i in range(m):
            std_rows_signed.append(tuple(rows[i][: 2 * n]))
        return LPResult(
            feasible=False,
            certificate=tuple(y_red),
            std_rows=tuple(std_rows_signed),
            std_rhs=tuple(rhs),
        )

    # drive out artificial variables still basic at zero
    for r in range(tab.m):
        if tab.basis[r] >= 2 * n:
            enter = next((jc for jc in range(2 * n) if tab.rows[r][jc] != 0), None)
            if enter is not None:
                tab.pivot(r, enter)
    keep = [r for r in range(tab.m) if tab.basis[r] < 2 * n]
    tab.rows = [tab.rows[r][: 2 * n] for r in keep]
    tab.rhs = [tab.rhs[r] for r in keep]
    tab.basis = [tab.basis[r] for r in keep]
    tab.m = len(keep)
    tab.ncols = 2 * n

    if objective is None:
        x = tab.solution(n)
        return LPResult(feasible=True, x=tuple(x))

    cost = [Fraction(c) for c in objective] + [ZERO] * n
    if maximize:
        cost = [-c for c in cost]
    opt, _ = tab.minimize(cost)
    x = tab.solution(n)
    value = -opt if maximize else opt
    return LPResult(feasible=True, x=tuple(x), value=value)
