"""Ambient second-cohomology lattice with an explicit Gram pairing, classes in
it, and embedded linear configurations.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .plumbing import LinearPlumbing, intersection_matrix

_EXCEPTIONAL = re.compile(r"^E\d+$")


class LatticeError(ValueError):
    pass


def is_exceptional_name(name: str) -> bool:
    return bool(_EXCEPTIONAL.match(name))


@dataclass(frozen=True, eq=False)
class AmbientLattice:
    """Named generators with a symmetric integer Gram matrix.

    Only pairings are modeled; relations among generators are not enforced.
    Generators named ``E<i>`` must be exceptional: square -1 and orthogonal
    to every other generator.
    """

    generators: tuple[str, ...]
    gram: tuple[tuple[int, ...], ...]
    index: Mapping[str, int] = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.generators)
        if len(set(self.generators)) != n:
            raise LatticeError("duplicate generator names")
        if len(self.gram) != n or any(len(r) != n for r in self.gram):
            raise LatticeError("gram matrix shape does not match generators")
        for i in range(n):
            for j in range(i):
                if self.gram[i][j] != self.gram[j][i]:
                    raise LatticeError(
                        f"gram not symmetric at {self.generators[i]}.{self.generators[j]}"
                    )
        for i, g in enumerate(self.generators):
            if not is_exceptional_name(g):
                continue
            if self.gram[i][i] != -1:
                raise LatticeError(f"exceptional class {g} must have square -1")
            for j, h in enumerate(self.generators):
                if j != i and self.gram[i][j]:
                    raise LatticeError(f"exceptional class {g} pairs with {h}")
        object.__setattr__(self, "index", {g: i for i, g in enumerate(self.generators)})

    @classmethod
    def from_pairings(cls, squares: Mapping[str, int],
                      pairings: Mapping[tuple[str, str], int] = {}) -> "AmbientLattice":
        """Build from self-intersections (in declaration order) and sparse off-diagonal pairings."""
        names = tuple(squares)
        idx = {g: i for i, g in enumerate(names)}
        gram = [[0] * len(names) for _ in names]
        for g, s in squares.items():
            gram[idx[g]][idx[g]] = int(s)
        for (a, b), v in pairings.items():
            if a not in idx or b not in idx:
                raise LatticeError(f"pairing {a}.{b} uses an unknown generator")
            if a == b:
                raise LatticeError(f"use the square to set {a}.{a}")
            gram[idx[a]][idx[b]] = gram[idx[b]][idx[a]] = int(v)
        return cls(names, tuple(tuple(r) for r in gram))

    def __len__(self):
        return len(self.generators)

    def gen(self, name: str) -> "Cls":
        try:
            i = self.index[name]
        except KeyError:
            raise LatticeError(f"unknown generator {name!r}") from None
        coords = [0] * len(self)
        coords[i] = 1
        return Cls(self, tuple(coords))

    def zero(self) -> "Cls":
        return Cls(self, (0,) * len(self))

    def combination(self, terms: Mapping[str, int] | Iterable[tuple[str, int]]) -> "Cls":
        coords = [0] * len(self)
        items = terms.items() if isinstance(terms, Mapping) else terms
        for name, c in items:
            if name not in self.index:
                raise LatticeError(f"unknown generator {name!r}")
            coords[self.index[name]] += int(c)
        return Cls(self, tuple(coords))

    def pair_coords(self, a: Sequence[int], b: Sequence[int]) -> int:
        total = 0
        for i, x in enumerate(a):
            if x:
                row = self.gram[i]
                total += x * sum(row[j] * y for j, y in enumerate(b) if y)
        return total

    def exceptionals(self) -> list[str]:
        return [g for g in self.generators if is_exceptional_name(g)]


@dataclass(frozen=True)
class Cls:
    """An integer combination of the ambient generators."""

    lattice: AmbientLattice
    coords: tuple[int, ...]

    def _check(self, other: "Cls") -> None:
        if not isinstance(other, Cls):
            raise TypeError(f"expected a Cls, got {type(other).__name__}")
        if other.lattice is not self.lattice:
            raise LatticeError("classes live in different lattices")

    def __add__(self, other):
        self._check(other)
        return Cls(self.lattice, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        self._check(other)
        return Cls(self.lattice, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return Cls(self.lattice, tuple(-a for a in self.coords))

    def __mul__(self, k: int):
        return Cls(self.lattice, tuple(k * a for a in self.coords))

    __rmul__ = __mul__

    def __hash__(self):
        return hash(self.coords)

    def __eq__(self, other):
        return (isinstance(other, Cls) and other.lattice is self.lattice
                and other.coords == self.coords)

    def coefficient(self, name: str) -> int:
        return self.coords[self.lattice.index[name]]

    def support(self) -> list[str]:
        return [g for g, c in zip(self.lattice.generators, self.coords) if c]

    def __str__(self):
        return format_class(self.lattice, self.coords)


def pair(L: Cls, M: Cls) -> int:
    L._check(M)
    return L.lattice.pair_coords(L.coords, M.coords)


def square(L: Cls) -> int:
    return pair(L, L)


_STEM = re.compile(r"^(.*?)(\d+)$")


def format_class(lattice: AmbientLattice, coords: Sequence[int]) -> str:
    """Render e.g. ``6T + E1+...+E6 - E7 + E8+...+E24``.

    Runs of three or more consecutively indexed generators with the same
    unit coefficient are elided.
    """
    items = [(g, c) for g, c in zip(lattice.generators, coords) if c]
    if not items:
        return "0"
    if all(c < 0 for _, c in items) and len(items) > 1:
        return "-(" + format_class(lattice, [-c for c in coords]) + ")"
    chunks = []  # (sign, body)
    i = 0
    while i < len(items):
        g, c = items[i]
        j = i + 1
        m = _STEM.match(g)
        if abs(c) == 1 and m:
            stem, start = m.group(1), int(m.group(2))
            while j < len(items):
                m2 = _STEM.match(items[j][0])
                if not (m2 and m2.group(1) == stem and int(m2.group(2)) == start + (j - i)
                        and items[j][1] == c):
                    break
                j += 1
        if j - i >= 3:
            body = f"{g}+...+{items[j - 1][0]}"
        elif j - i == 2:
            body = f"{g}+{items[i + 1][0]}"
        else:
            body = g if abs(c) == 1 else f"{abs(c)}{g}"
        if j - i >= 2 and c < 0:
            body = f"({body})"
        chunks.append((c < 0, body))
        i = j
    out = ("-" if chunks[0][0] else "") + chunks[0][1]
    for neg, body in chunks[1:]:
        out += (" - " if neg else " + ") + body
    return out


@dataclass(frozen=True)
class EmbeddedConfiguration:
    """Sphere classes realizing a linear plumbing, listed in chain order."""

    name: str
    plumbing: LinearPlumbing
    sphere_classes: tuple[Cls, ...]

    def __post_init__(self):
        if len(self.sphere_classes) != len(self.plumbing):
            raise LatticeError(
                f"{self.name}: {len(self.sphere_classes)} spheres for a "
                f"{len(self.plumbing)}-vertex plumbing"
            )
        lats = {id(u.lattice) for u in self.sphere_classes}
        if len(lats) > 1:
            raise LatticeError(f"{self.name}: spheres from different lattices")

    @property
    def lattice(self) -> AmbientLattice:
        return self.sphere_classes[0].lattice

    def restriction_vector(self, L: Cls) -> tuple[int, ...]:
        """``(L . u_1, ..., L . u_k)``."""
        return tuple(pair(L, u) for u in self.sphere_classes)


@dataclass(frozen=True)
class EmbeddingReport:
    config: str
    mismatches: tuple[tuple[int, int, int, int], ...]  # 1-based (i, j), expected, got

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def __bool__(self):
        return self.ok

    def __str__(self):
        if self.ok:
            return f"{self.config}: ok"
        rows = ", ".join(f"u{i}.u{j} expected {e} got {g}" for i, j, e, g in self.mismatches)
        return f"{self.config}: mismatch ({rows})"


def validate_embedding(cfg: EmbeddedConfiguration) -> EmbeddingReport:
    Q = intersection_matrix(cfg.plumbing)
    us = cfg.sphere_classes
    bad = []
    for i in range(len(us)):
        for j in range(i, len(us)):
            got = pair(us[i], us[j])
            if got != Q[i][j]:
                bad.append((i + 1, j + 1, Q[i][j], got))
    return EmbeddingReport(cfg.name, tuple(bad))


def cross_pairings(a: EmbeddedConfiguration, b: EmbeddedConfiguration):
    """Nonzero ``u_i . v_j`` between two configurations (1-based indices)."""
    return [
        (i + 1, j + 1, pair(u, v))
        for i, u in enumerate(a.sphere_classes)
        for j, v in enumerate(b.sphere_classes)
        if pair(u, v)
    ]
