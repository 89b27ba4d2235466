"""Linear plumbings of disk bundles over spheres (chains of embedded spheres)."""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import isqrt
from typing import Optional, Sequence

from .arith import (
    ArithError,
    LensLabel,
    cfrac_eval,
    cfrac_expand,
    hj_expand,
    lens_label,
)

Matrix = list[list[int]]


class PlumbingError(ValueError):
    pass


@dataclass(frozen=True)
class LinearPlumbing:
    """A chain of spheres with self-intersections ``weights`` (left to right).

    ``source`` records ``(p, q)`` when the chain is the configuration ``C_{p,q}``.
    """

    weights: tuple[int, ...]
    source: Optional[tuple[int, int]] = None

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(int(w) for w in self.weights))
        if not self.weights:
            raise PlumbingError("empty plumbing")
        if any(w > -2 for w in self.weights):
            raise PlumbingError(f"weights must be <= -2: {self.weights}")
        if self.source is not None:
            expected = tuple(-b for b in cfrac_expand(*self.source).entries)
            if expected != self.weights:
                raise PlumbingError(
                    f"weights {format_weights(self.weights)} are not C{self.source}"
                )

    def __len__(self):
        return len(self.weights)

    @property
    def b(self) -> tuple[int, ...]:
        return tuple(-w for w in self.weights)

    def __str__(self):
        return format_weights(self.weights)


def from_pq(p: int, q: int) -> LinearPlumbing:
    return LinearPlumbing(tuple(-b for b in cfrac_expand(p, q).entries), (p, q))


def format_weights(weights: Sequence[int]) -> str:
    """Display tuple, runs of length > 1 compressed: ``(-18, -19, -2^14, -3)``."""
    parts = []
    i = 0
    while i < len(weights):
        j = i
        while j < len(weights) and weights[j] == weights[i]:
            j += 1
        parts.append(f"{weights[i]}^{j - i}" if j - i > 1 else str(weights[i]))
        i = j
    return "(" + ", ".join(parts) + ")"


_RUN = re.compile(r"^\s*(-?\d+)\s*(?:\^\s*(\d+))?\s*$")


def parse_weights(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise PlumbingError(f"plumbing must be parenthesized: {text!r}")
    out = []
    for item in text[1:-1].split(","):
        m = _RUN.match(item)
        if not m:
            raise PlumbingError(f"bad plumbing entry {item!r}")
        out.extend([int(m.group(1))] * int(m.group(2) or 1))
    return tuple(out)


def intersection_matrix(P: LinearPlumbing) -> Matrix:
    k = len(P.weights)
    Q = [[0] * k for _ in range(k)]
    for i, w in enumerate(P.weights):
        Q[i][i] = w
        if i + 1 < k:
            Q[i][i + 1] = Q[i + 1][i] = 1
    return Q


def _check_symmetric(Q: Sequence[Sequence[int]]) -> None:
    n = len(Q)
    if any(len(row) != n for row in Q):
        raise PlumbingError("matrix is not square")
    for i in range(n):
        for j in range(i):
            if Q[i][j] != Q[j][i]:
                raise PlumbingError(f"matrix is not symmetric at ({i}, {j})")


def _is_tridiagonal(Q: Sequence[Sequence[int]]) -> bool:
    return all(Q[i][j] == 0 for i in range(len(Q)) for j in range(len(Q)) if abs(i - j) > 1)


def leading_minors(Q: Sequence[Sequence[int]]) -> list[int]:
    """Leading principal minors.

    Tridiagonal input uses the three-term continuant recursion; anything else
    goes through fraction-free (Bareiss) elimination, which stops early,
    padding with zeros, once a minor vanishes.
    """
    n = len(Q)
    if n and _is_tridiagonal(Q):
        out = [int(Q[0][0])]
        prev2 = 1
        for i in range(1, n):
            out.append(Q[i][i] * out[-1] - Q[i][i - 1] * Q[i - 1][i] * prev2)
            prev2 = out[-2]
        return out
    A = [list(map(int, row)) for row in Q]
    minors = []
    prev = 1
    for t in range(n):
        piv = A[t][t]
        minors.append(piv)
        if piv == 0:
            return minors + [0] * (n - t - 1)
        for i in range(t + 1, n):
            for j in range(t + 1, n):
                A[i][j] = (A[i][j] * piv - A[i][t] * A[t][j]) // prev
        prev = piv
    return minors


def determinant(Q: Sequence[Sequence[int]]) -> int:
    n = len(Q)
    if n == 0:
        return 1
    minors = leading_minors(Q)
    if minors[-1] or all(minors):
        return minors[-1]
    # a vanishing leading minor: fall back to elimination with row pivoting
    A = [[Fraction(x) for x in row] for row in Q]
    det = Fraction(1)
    for t in range(n):
        r = next((i for i in range(t, n) if A[i][t]), None)
        if r is None:
            return 0
        if r != t:
            A[t], A[r] = A[r], A[t]
            det = -det
        det *= A[t][t]
        for i in range(t + 1, n):
            f = A[i][t] / A[t][t]
            if f:
                A[i] = [a - f * b for a, b in zip(A[i], A[t])]
    return int(det)


def is_negative_definite(Q: Sequence[Sequence[int]]) -> bool:
    _check_symmetric(Q)
    neg = [[-x for x in row] for row in Q]
    return all(m > 0 for m in leading_minors(neg))


def boundary(P: LinearPlumbing) -> LensLabel:
    """Lens space bounding the plumbing.

    Without ``(p, q)`` provenance the value ``[b_k, ..., b_1]`` is matched
    against the ``p^2/(pq - 1)`` family.
    """
    if P.source is not None:
        return lens_label(*P.source)
    pq = recover_pq(P.weights)
    if pq is None:
        raise PlumbingError(f"{P} is not a configuration C_(p,q)")
    return lens_label(*pq)


def recover_pq(weights: Sequence[int]) -> Optional[tuple[int, int]]:
    value = cfrac_eval([-w for w in weights])
    num, den = value.numerator, value.denominator
    p = _isqrt_exact(num)
    if p is None or (den + 1) % p:
        return None
    q = (den + 1) // p
    try:
        if hj_expand(p * p, p * q - 1) != tuple(-w for w in weights):
            return None
        lens_label(p, q)
    except ArithError:
        return None
    return p, q


def _isqrt_exact(n: int) -> Optional[int]:
    r = isqrt(n)
    return r if r * r == n else None
