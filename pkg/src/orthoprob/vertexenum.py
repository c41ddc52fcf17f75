"""Exact vertex enumeration for bounded rational polytopes.

Implements the double-description method on the homogenization cone of an
inequality system ``a . y <= beta``: every inequality becomes a halfspace
``beta * t - a . y >= 0`` in (t, y)-space, an initial simplicial cone is cut
from a maximal independent subset of rows, and the remaining halfspaces are
inserted one at a time with the standard combinatorial adjacency test.
Extreme rays with ``t > 0`` are scaled back to vertices.

All arithmetic is :class:`fractions.Fraction`; intended for small dimension
(the callers cap the free dimension at 12).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


def _canonical_ray(ray: list[Fraction]) -> tuple[Fraction, ...]:
    """Scale a ray by a positive factor so its L1 norm is 1."""
    norm = sum(abs(v) for v in ray)
    if norm == 0:
        raise ValueError("zero ray")
    return tuple(v / norm for v in ray)


def _invert(mat: list[list[Fraction]]) -> list[list[Fraction]]:
    """Exact inverse of a small square matrix (Gauss-Jordan)."""
    k = len(mat)
    aug = [list(row) + [ONE if i == j else ZERO for j in range(k)] for i, row in enumerate(mat)]
    for col in range(k):
        piv = next((r for r in range(col, k) if aug[r][col] != 0), None)
        if piv is None:
            raise ValueError("singular matrix")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = ONE / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(k):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [vr - f * vc for vr, vc in zip(aug[r], aug[col])]
    return [row[k:] for row in aug]


def _independent_rows(rows: list[tuple[Fraction, ...]], k: int) -> list[int]:
    """Indices of the first k linearly independent rows (exact elimination)."""
    chosen: list[int] = []
    work: list[list[Fraction]] = []
    for idx, row in enumerate(rows):
        vec = list(row)
        for w in work:
            lead = next((c for c in range(k) if w[c] != 0), None)
            if lead is not None and vec[lead] != 0:
                f = vec[lead] / w[lead]
                vec = [v - f * wv for v, wv in zip(vec, w)]
        if any(v != 0 for v in vec):
            work.append(vec)
            chosen.append(idx)
            if len(chosen) == k:
                return chosen
    raise ValueError("rows do not span the ambient space; cone is not pointed")


def enumerate_polytope_vertices(
    ineq_rows: Sequence[Sequence[Fraction]],
    ineq_rhs: Sequence[Fraction],
) -> list[tuple[Fraction, ...]]:
    """All vertices of ``{y : A y <= b}``, which must be bounded.

    Returns exact vertices, duplicate-free, sorted lexicographically.
    Raises :class:`ValueError` if an extreme ray with ``t = 0`` coexists
    with vertices (an unbounded input).
    """
    k = len(ineq_rows[0]) if ineq_rows else 0
    if k == 0:
        # zero-dimensional: the single candidate point is feasible iff 0 <= b
        return [()] if all(Fraction(b) >= 0 for b in ineq_rhs) else []

    hom: list[tuple[Fraction, ...]] = [(ONE,) + (ZERO,) * k]  # t >= 0
    for a, beta in zip(ineq_rows, ineq_rhs):
        if all(Fraction(v) == 0 for v in a):
            if Fraction(beta) < 0:
                return []  # 0 <= beta < 0: empty polytope
            continue  # trivial constraint
        hom.append((Fraction(beta),) + tuple(-Fraction(v) for v in a))
    # dedupe identical halfspaces (positive scaling collapses them)
    seen: dict[tuple[Fraction, ...], None] = {}
    for row in hom:
        seen.setdefault(_canonical_ray(list(row)), None)
    hom = list(seen.keys())

    base_idx = _independent_rows(hom, k + 1)
    base = [list(hom[i]) for i in base_idx]
    inv = _invert(base)
    rays: list[tuple[Fraction, ...]] = [
        _canonical_ray([inv[r][c] for r in range(k + 1)]) for c in range(k + 1)
    ]

    processed = list(base_idx)
    dots: list[list[Fraction]] = [
        [sum(hom[i][d] * ray[d] for d in range(k + 1)) for i in range(len(hom))]
        for ray in rays
    ]

    remaining = [i for i in range(len(hom)) if i not in set(base_idx)]
    for hi in remaining:
        vals = [dot[hi] for dot in dots]
        keep = [r for r in range(len(rays)) if vals[r] >= 0]
        plus = [r for r in range(len(rays)) if vals[r] > 0]
        minus = [r for r in range(len(rays)) if vals[r] < 0]
        if not minus:
            processed.append(hi)
            continue

        zero_masks = []
        for r in range(len(rays)):
            mask = 0
            for pos, row_idx in enumerate(processed):
                if dots[r][row_idx] == 0:
                    mask |= 1 << pos
            zero_masks.append(mask)

        new_rays: list[tuple[Fraction, ...]] = []
        new_dots: list[list[Fraction]] = []
        for p in plus:
            for q in minus:
                common = zero_masks[p] & zero_masks[q]
                adjacent = True
                for r in range(len(rays)):
                    if r != p and r != q and (zero_masks[r] & common) == common:
                        adjacent = False
                        break
                if not adjacent:
                    continue
                wp, wq = vals[p], -vals[q]
                combo = [wq * rp + wp * rq for rp, rq in zip(rays[p], rays[q])]
                new_rays.append(_canonical_ray(combo))
                new_dots.append(
                    [wq * dp + wp * dq for dp, dq in zip(dots[p], dots[q])]
                )

        rays = [rays[r] for r in keep] + new_rays
        dots = [dots[r] for r in keep] + new_dots
        # dedupe (combinatorially duplicates are possible on degenerate input)
        uniq: dict[tuple[Fraction, ...], int] = {}
        keep_idx = []
        for i, ray in enumerate(rays):
            if ray not in uniq:
                uniq[ray] = i
                keep_idx.append(i)
        rays = [rays[i] for i in keep_idx]
        dots = [dots[i] for i in keep_idx]
        processed.append(hi)

    vertices = []
    saw_vertex = False
    saw_direction = False
    for ray in rays:
        t = ray[0]
        if t > 0:
            saw_vertex = True
            vertices.append(tuple(v / t for v in ray[1:]))
        elif any(v != 0 for v in ray[1:]):
            saw_direction = True
    if saw_direction and saw_vertex:
        raise ValueError("polytope is unbounded; vertex enumeration undefined")
    return sorted(set(vertices))
