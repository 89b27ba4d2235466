"""Exact integer arithmetic: Hirzebruch-Jung continued fractions, lens space
labels and Smith normal form cokernels.

Everything here works on Python ints and :class:`fractions.Fraction`; no
floating point is used.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
from typing import Sequence


class ArithError(ValueError):
    pass


def _check_pq(p: int, q: int) -> None:
    if not (isinstance(p, int) and isinstance(q, int)):
        raise ArithError(f"p and q must be integers, got {p!r}, {q!r}")
    if not p > q > 0:
        raise ArithError(f"need p > q > 0, got p={p}, q={q}")
    if gcd(p, q) != 1:
        raise ArithError(f"p={p} and q={q} are not coprime")


@dataclass(frozen=True)
class CFrac:
    """Continued fraction ``[b_k, ..., b_1]`` of ``p^2/(pq-1)``.

    ``entries`` is stored left to right, i.e. ``entries[0] == b_k``.
    """

    entries: tuple[int, ...]
    p: int
    q: int

    def __post_init__(self):
        if any(b < 2 for b in self.entries):
            raise ArithError(f"continued fraction entries must be >= 2: {self.entries}")
        if cfrac_eval(self.entries) != Fraction(self.p**2, self.p * self.q - 1):
            raise ArithError("entries do not evaluate to p^2/(pq-1)")

    def __len__(self):
        return len(self.entries)


def hj_expand(num: int, den: int) -> tuple[int, ...]:
    """Hirzebruch-Jung expansion of ``num/den > 1`` with all entries >= 2."""
    if den <= 0 or num <= den:
        raise ArithError(f"need num > den > 0, got {num}/{den}")
    out = []
    while den:
        # b = ceil(num/den); remainder num' = b*den - num
        b = -(-num // den)
        out.append(b)
        num, den = den, b * den - num
    return tuple(out)


def cfrac_expand(p: int, q: int) -> CFrac:
    _check_pq(p, q)
    return CFrac(hj_expand(p * p, p * q - 1), p, q)


def cfrac_eval(entries: Sequence[int]) -> Fraction:
    """Evaluate ``b_k - 1/(b_{k-1} - 1/(... - 1/b_1))`` exactly."""
    entries = list(entries)
    if not entries:
        raise ArithError("empty continued fraction")
    if any(b < 2 for b in entries):
        raise ArithError(f"continued fraction entries must be >= 2: {entries}")
    value = Fraction(entries[-1])
    for b in reversed(entries[:-1]):
        value = b - 1 / value
    return value


@dataclass(frozen=True)
class LensLabel:
    """Lens space ``L(order, twist)`` with ``twist`` reduced into ``[0, order)``."""

    order: int
    twist: int

    def __post_init__(self):
        if self.order <= 0:
            raise ArithError("lens space order must be positive")
        object.__setattr__(self, "twist", self.twist % self.order)
        r = isqrt(self.order)
        if r * r != self.order:
            raise ArithError(f"order {self.order} is not a perfect square")
        if gcd(self.order, self.twist) != 1:
            raise ArithError(f"gcd({self.order}, {self.twist}) != 1")

    @property
    def p(self) -> int:
        return isqrt(self.order)

    @property
    def display_twist(self) -> int:
        # the negative representative, e.g. -5184 rather than 87841
        return self.twist - self.order if self.twist else 0

    def __str__(self):
        return f"L({self.order}, {self.display_twist})"


def lens_label(p: int, q: int) -> LensLabel:
    _check_pq(p, q)
    return LensLabel(p * p, 1 - p * q)


@dataclass(frozen=True)
class Cokernel:
    """Cokernel of a square integer matrix.

    ``factors`` are the nontrivial invariant factors; row ``i`` of
    ``projection`` maps an integer vector to its coordinate in ``Z/factors[i]``.
    """

    factors: tuple[int, ...]
    projection: tuple[tuple[int, ...], ...]

    def project(self, v: Sequence[int]) -> tuple[int, ...]:
        return tuple(
            sum(a * x for a, x in zip(row, v)) % d
            for d, row in zip(self.factors, self.projection)
        )

    @property
    def order(self) -> int:
        out = 1
        for d in self.factors:
            out *= d
        return out


def smith_normal_form(M: Sequence[Sequence[int]]):
    """Return ``(U, D, V)`` with ``U @ M @ V == D`` diagonal, ``U``, ``V`` unimodular.

    Pivot choice is deterministic: the nonzero entry of smallest magnitude in
    the remaining block, ties broken row-major.  Diagonal entries are made
    non-negative and satisfy the divisibility chain ``d_1 | d_2 | ...``.
    """
    A = [list(map(int, row)) for row in M]
    n = len(A)
    m = len(A[0]) if n else 0
    if any(len(row) != m for row in A):
        raise ArithError("ragged matrix")
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    V = [[int(i == j) for j in range(m)] for i in range(m)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):  # row dst += c * row src
        A[dst] = [a + c * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, c):
        for row in A:
            row[dst] += c * row[src]
        for row in V:
            row[dst] += c * row[src]

    t = 0
    while t < min(n, m):
        best = None
        for i in range(t, n):
            for j in range(t, m):
                a = A[i][j]
                if a and (best is None or abs(a) < abs(A[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            dirty = False
            piv = A[t][t]
            for i in range(t + 1, n):
                if A[i][t]:
                    add_row(t, i, -(A[i][t] // piv))
                    if A[i][t]:
                        dirty = True
            for j in range(t + 1, m):
                if A[t][j]:
                    add_col(t, j, -(A[t][j] // piv))
                    if A[t][j]:
                        dirty = True
            if not dirty:
                # pivot must divide the whole remaining block
                bad = next(
                    ((i, j) for i in range(t + 1, n) for j in range(t + 1, m)
                     if A[i][j] % piv),
                    None,
                )
                if bad is None:
                    break
                add_row(bad[0], t, 1)
                continue
            # a remainder appeared; move the smallest entry of row/column t to the pivot
            cands = [(abs(A[i][t]), 0, i) for i in range(t, n) if A[i][t]]
            cands += [(abs(A[t][j]), 1, j) for j in range(t, m) if A[t][j]]
            _, kind, idx = min(cands)
            if kind == 0:
                swap_rows(t, idx)
            else:
                swap_cols(t, idx)
        if A[t][t] < 0:
            A[t] = [-a for a in A[t]]
            U[t] = [-a for a in U[t]]
        t += 1
    return U, A, V


def smith_cokernel(M: Sequence[Sequence[int]]) -> Cokernel:
    n = len(M)
    if any(len(row) != n for row in M):
        raise ArithError("smith_cokernel needs a square matrix")
    U, D, _ = smith_normal_form(M)
    diag = [D[i][i] for i in range(n)]
    if any(d == 0 for d in diag):
        raise ArithError("matrix is singular")
    keep = [i for i, d in enumerate(diag) if d != 1]
    return Cokernel(
        tuple(diag[i] for i in keep),
        tuple(tuple(x % diag[i] for x in U[i]) for i in keep),
    )
