"""Formal Seiberg-Witten functions as finite Laurent series in exponentials of
lattice classes, with the knot-surgery and blow-up product formulas.
"""
from __future__ import annotations

import itertools
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

from .lattice import AmbientLattice, Cls, LatticeError, format_class, square


class SWError(ValueError):
    pass


Coords = tuple[int, ...]


@dataclass(frozen=True)
class AlexPoly:
    """Symmetric Laurent polynomial in ``t`` with integer coefficients."""

    coeffs: Mapping[int, int]

    def __post_init__(self):
        clean = {int(d): int(c) for d, c in self.coeffs.items() if c}
        for d, c in clean.items():
            if clean.get(-d, 0) != c:
                raise SWError(f"Alexander polynomial is not symmetric: {self}")
        object.__setattr__(self, "coeffs", dict(sorted(clean.items())))
        if abs(sum(clean.values())) != 1:
            warnings.warn(f"Alexander polynomial {self} has Delta(1) != +-1", stacklevel=2)

    @classmethod
    def from_list(cls, values: Sequence[int]) -> "AlexPoly":
        """Coefficients of ``t^-d, ..., t^0, ..., t^d`` (odd length)."""
        if len(values) % 2 == 0:
            raise SWError("symmetric coefficient list must have odd length")
        d = len(values) // 2
        return cls({i - d: c for i, c in enumerate(values)})

    def __hash__(self):
        return hash(tuple(self.coeffs.items()))

    def __eq__(self, other):
        return isinstance(other, AlexPoly) and self.coeffs == other.coeffs

    def at_one(self) -> int:
        return sum(self.coeffs.values())

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        for d, c in sorted(self.coeffs.items(), reverse=True):
            mono = "" if d == 0 else ("t" if d == 1 else f"t^{d}")
            if mono and abs(c) == 1:
                body = mono
            else:
                body = f"{abs(c)}{mono}"
            parts.append(("-" if c < 0 else "+", body))
        out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for s, body in parts[1:]:
            out += f" {s} {body}"
        return out


def alexander_twist(n: int) -> AlexPoly:
    """``n t - (2n - 1) + n t^-1``, the Alexander polynomial of the n-twist knot."""
    if n < 0:
        raise SWError(f"twist knot index must be >= 0, got {n}")
    return AlexPoly({1: n, 0: -(2 * n - 1), -1: n})


@dataclass(frozen=True)
class SWFunction:
    """Finite map from classes (exponents) to nonzero integer coefficients."""

    lattice: AmbientLattice
    terms: Mapping[Coords, int] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.lattice)
        clean = {}
        for k, v in self.terms.items():
            if len(k) != n:
                raise SWError("term coordinates do not match the lattice")
            if v:
                clean[tuple(k)] = int(v)
        object.__setattr__(self, "terms", clean)

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        return (isinstance(other, SWFunction) and other.lattice is self.lattice
                and other.terms == self.terms)

    def coefficient(self, L: Cls) -> int:
        if L.lattice is not self.lattice:
            raise LatticeError("class from a different lattice")
        return self.terms.get(L.coords, 0)

    def is_symmetric(self) -> bool:
        """``SW(-L) == SW(L)`` for every class."""
        return all(self.terms.get(tuple(-x for x in k), 0) == v for k, v in self.terms.items())

    def at_one(self) -> int:
        """Sum of coefficients, i.e. every exponential evaluated at 1."""
        return sum(self.terms.values())

    def support_generators(self) -> set[str]:
        gens = self.lattice.generators
        return {gens[i] for k in self.terms for i, x in enumerate(k) if x}

    def multiply(self, other: "SWFunction") -> "SWFunction":
        if other.lattice is not self.lattice:
            raise LatticeError("functions over different lattices")
        out: dict[Coords, int] = {}
        for a, x in self.terms.items():
            for b, y in other.terms.items():
                k = tuple(i + j for i, j in zip(a, b))
                out[k] = out.get(k, 0) + x * y
        return SWFunction(self.lattice, out)

    def __str__(self):
        return format_terms(self.lattice, self.terms)


def format_terms(lattice: AmbientLattice, terms: Mapping[Coords, int]) -> str:
    if not terms:
        return "0"
    parts = []
    for k, c in sorted(terms.items(), reverse=True):
        cls = format_class(lattice, k)
        parts.append(f"{c}*e^{{{cls}}}" if cls != "0" else str(c))
    return " + ".join(parts).replace("+ -", "- ")


def sw_k3(lattice: AmbientLattice) -> SWFunction:
    return SWFunction(lattice, {(0,) * len(lattice): 1})


def exp_poly(fiber: Cls, delta: AlexPoly, scale: int = 2) -> SWFunction:
    """``delta(e^{scale * fiber})`` as an SW-type series."""
    return SWFunction(
        fiber.lattice,
        {tuple(scale * d * x for x in fiber.coords): c for d, c in delta.coeffs.items()},
    )


def knot_surgery(sw: SWFunction, fiber: Cls, delta: AlexPoly) -> SWFunction:
    if square(fiber) != 0:
        raise SWError(f"knot surgery fiber {fiber} has square {square(fiber)} != 0")
    return sw.multiply(exp_poly(fiber, delta))


def _check_fresh(lattice: AmbientLattice, name: str, used: set[str]) -> int:
    if name not in lattice.index:
        raise SWError(f"unknown exceptional generator {name!r}")
    i = lattice.index[name]
    if lattice.gram[i][i] != -1:
        raise SWError(f"{name} does not have square -1")
    if any(lattice.gram[i][j] for j in range(len(lattice)) if j != i):
        raise SWError(f"{name} is not orthogonal to the other generators")
    if name in used:
        raise SWError(f"{name} already appears in the function")
    return i


def blow_up(sw: SWFunction, E_new: Cls | str) -> SWFunction:
    """Materialized blow-up formula: ``sw * (e^E + e^-E)``."""
    name = E_new if isinstance(E_new, str) else _single_generator(E_new)
    i = _check_fresh(sw.lattice, name, sw.support_generators())
    out = {}
    for k, c in sw.terms.items():
        for s in (1, -1):
            kk = list(k)
            kk[i] += s
            out[tuple(kk)] = c
    return SWFunction(sw.lattice, out)


def _single_generator(E: Cls) -> str:
    supp = E.support()
    if len(supp) != 1 or E.coefficient(supp[0]) != 1:
        raise SWError(f"{E} is not a single generator")
    return supp[0]


def basic_classes(sw: "SWFunction | FactoredSW") -> list[tuple[Cls, int]]:
    """Nonzero terms in lexicographic order of coordinates."""
    if isinstance(sw, FactoredSW):
        sw = sw.expand()
    return [(Cls(sw.lattice, k), v) for k, v in sorted(sw.terms.items())]


@dataclass(frozen=True)
class FactoredSW:
    """``base * prod_{E in blowups} (e^E + e^-E)``, kept unexpanded.

    The blow-up factors are only multiplied out on request; descent filtering
    works on this form directly.
    """

    base: SWFunction
    blowups: tuple[str, ...] = ()

    def __post_init__(self):
        used = self.base.support_generators()
        seen: set[str] = set()
        for e in self.blowups:
            _check_fresh(self.base.lattice, e, used | seen)
            seen.add(e)

    @property
    def lattice(self) -> AmbientLattice:
        return self.base.lattice

    def blow_up(self, E_new: Cls | str) -> "FactoredSW":
        name = E_new if isinstance(E_new, str) else _single_generator(E_new)
        return FactoredSW(self.base, self.blowups + (name,))

    def knot_surgery(self, fiber: Cls, delta: AlexPoly) -> "FactoredSW":
        return FactoredSW(knot_surgery(self.base, fiber, delta), self.blowups)

    def term_count(self) -> int:
        return len(self.base) * 2 ** len(self.blowups)

    def at_one(self) -> int:
        return self.base.at_one() * 2 ** len(self.blowups)

    def iter_terms(self) -> Iterator[tuple[Coords, int]]:
        idx = [self.lattice.index[e] for e in self.blowups]
        for k, c in sorted(self.base.terms.items()):
            for signs in itertools.product((1, -1), repeat=len(idx)):
                kk = list(k)
                for i, s in zip(idx, signs):
                    kk[i] += s
                yield tuple(kk), c

    def expand(self) -> SWFunction:
        sw = self.base
        for e in self.blowups:
            sw = blow_up(sw, e)
        return sw

    def is_symmetric(self) -> bool:
        # the blow-up factors are even, so symmetry is decided by the base
        return self.base.is_symmetric()

    def __str__(self):
        out = str(self.base)
        if self.blowups:
            out = f"({out}) * {format_blowups(self.blowups)}"
        return out


_INDEXED = re.compile(r"([A-Za-z_]+?)(\d+)")


def format_blowups(names: Sequence[str]) -> str:
    parts = [_INDEXED.fullmatch(n) for n in names]
    if len(names) > 2 and all(parts) and len({m.group(1) for m in parts}) == 1:
        stem = parts[0].group(1)
        nums = [int(m.group(2)) for m in parts]
        if nums == list(range(nums[0], nums[0] + len(nums))):
            return f"prod_{{i={nums[0]}..{nums[-1]}}} (e^{{{stem}_i}}+e^{{-{stem}_i}})"
    return " * ".join(f"(e^{{{n}}}+e^{{-{n}}})" for n in names)
