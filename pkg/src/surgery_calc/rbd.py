"""Rational blow-down descent: which basic classes survive replacing a
configuration ``C_{p,q}`` by the rational ball ``B_{p,q}``.

Two routes compute the restriction square ``v^T Q^-1 v``:

* :func:`restriction_square` solves the tridiagonal system exactly with
  fractions, one class at a time;
* :class:`PreparedConfig` uses the integer adjugate of ``Q`` and numpy to
  screen many restriction vectors at once.

:func:`descend` screens with the second and confirms every survivor with the
first.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .arith import Cokernel, smith_cokernel
from .lattice import Cls, EmbeddedConfiguration, LatticeError, format_class, validate_embedding
from .plumbing import intersection_matrix
from .swcalc import FactoredSW, SWFunction

# largest number of exceptional classes enumerated jointly in one cluster
MAX_CLUSTER = 22


class DescentError(ValueError):
    pass


class DescentMode(enum.Enum):
    PLUS = "PlusPattern"
    MINUS = "MinusPattern"
    THEOREM_ONLY = "TheoremOnly"
    FAILS = "Fails"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class DescentVerdict:
    mode: DescentMode
    m_parity_ok: bool
    restriction_square: Fraction
    boundary_class: int  # image of L in H^2 of the lens space, as a residue mod p^2
    m: int | None  # boundary_class / p in [0, p), None when p does not divide it
    rank: int  # b_2 of the configuration
    m_interpretations_agree: bool = True

    def __post_init__(self):
        if self.mode in (DescentMode.PLUS, DescentMode.MINUS) and not self.theorem_ok:
            raise AssertionError(f"pattern class fails the restriction conditions: {self}")

    @property
    def theorem_ok(self) -> bool:
        return (self.m is not None and self.m_parity_ok
                and self.restriction_square == -self.rank)

    @property
    def descends(self) -> bool:
        return self.mode is not DescentMode.FAILS


def _require_valid(cfg: EmbeddedConfiguration) -> None:
    rep = validate_embedding(cfg)
    if not rep.ok:
        raise DescentError(f"invalid embedding: {rep}")


def _require_pq(cfg: EmbeddedConfiguration) -> tuple[int, int]:
    if cfg.plumbing.source is None:
        raise DescentError(f"{cfg.name} has no (p, q) provenance")
    return cfg.plumbing.source


def solve_tridiagonal(weights: Sequence[int], v: Sequence[int]) -> list[Fraction]:
    """Solve ``Q x = v`` for the chain matrix with diagonal ``weights`` and unit off-diagonals."""
    n = len(weights)
    c = [Fraction(0)] * n  # modified super-diagonal
    d = [Fraction(0)] * n
    piv = Fraction(weights[0])
    c[0] = 1 / piv
    d[0] = Fraction(v[0]) / piv
    for i in range(1, n):
        piv = weights[i] - c[i - 1]
        c[i] = 1 / piv
        d[i] = (v[i] - d[i - 1]) / piv
    x = [Fraction(0)] * n
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def restriction_square(L: Cls, cfg: EmbeddedConfiguration) -> Fraction:
    _require_valid(cfg)
    return _square_of_vector(cfg.restriction_vector(L), cfg.plumbing.weights)


def _square_of_vector(v: Sequence[int], weights: Sequence[int]) -> Fraction:
    if not any(v):
        return Fraction(0)
    x = solve_tridiagonal(weights, v)
    return sum((a * b for a, b in zip(v, x)), Fraction(0))


def pattern_mode(v: Sequence[int], b: Sequence[int]) -> DescentMode:
    if all(x == bi - 2 for x, bi in zip(v, b)):
        return DescentMode.PLUS
    if all(x == -(bi - 2) for x, bi in zip(v, b)):
        return DescentMode.MINUS
    return DescentMode.FAILS


def corollary_condition(L: Cls, cfg: EmbeddedConfiguration) -> DescentMode:
    _require_valid(cfg)
    return pattern_mode(cfg.restriction_vector(L), cfg.plumbing.b)


def _m_parity(x: int, p: int) -> tuple[int | None, bool, bool]:
    """``(m, parity_ok, interpretations_agree)`` for a boundary class ``x = m p``.

    The generator of ``Z_{p^2}`` is only defined up to sign, so ``m`` and
    ``-m`` are both tried.  The primary reading takes residues in
    ``[0, p)``; the symmetric reading in ``(-p/2, p/2]`` is recorded for
    comparison.
    """
    if x % p:
        return None, False, True
    m = (x // p) % p
    target = (p - 1) % 2
    least = any(r % 2 == target for r in (m, (-m) % p))
    sym = m - p if m > p // 2 else m
    symmetric = any(r % 2 == target for r in (sym, -sym))
    return m, least, least == symmetric


def theorem_condition(L: Cls, cfg: EmbeddedConfiguration) -> DescentVerdict:
    _require_valid(cfg)
    return prepare(cfg).verdict(cfg.restriction_vector(L))


class PreparedConfig:
    """Per-configuration data for screening restriction vectors in bulk."""

    def __init__(self, cfg: EmbeddedConfiguration):
        self.cfg = cfg
        self.p, self.q = _require_pq(cfg)
        self.weights = cfg.plumbing.weights
        self.b = cfg.plumbing.b
        self.k = len(self.weights)
        self.order = self.p * self.p

    @cached_property
    def cokernel(self) -> Cokernel:
        cok = smith_cokernel(intersection_matrix(self.cfg.plumbing))
        if cok.factors != (self.order,):
            raise DescentError(f"unexpected cokernel {cok.factors} for {self.cfg.name}")
        return cok

    @cached_property
    def adjugate(self) -> tuple[int, list[list[int]]]:
        """``(det Q, adj Q)`` from the continuant formula for chain matrices."""
        w = self.weights
        k = self.k
        theta = [1, w[0]]  # leading minors
        for i in range(1, k):
            theta.append(w[i] * theta[-1] - theta[-2])
        phi = [0] * (k + 2)  # trailing minors, phi[i] = det Q[i-1:, i-1:]
        phi[k + 1] = 1
        phi[k] = w[k - 1]
        for i in range(k - 1, 0, -1):
            phi[i] = w[i - 1] * phi[i + 1] - phi[i + 2]
        det = theta[k]
        adj = [[0] * k for _ in range(k)]
        for i in range(1, k + 1):
            for j in range(i, k + 1):
                val = (-1) ** (i + j) * theta[i - 1] * phi[j + 1]
                adj[i - 1][j - 1] = adj[j - 1][i - 1] = val
        return det, adj

    def verdict(self, v: Sequence[int]) -> DescentVerdict:
        sq = _square_of_vector(v, self.weights)
        (x,) = self.cokernel.project(v)
        m, parity, agree = _m_parity(x, self.p)
        mode = pattern_mode(v, self.b)
        if mode is DescentMode.FAILS and sq == -self.k and m is not None and parity:
            mode = DescentMode.THEOREM_ONLY
        return DescentVerdict(mode, parity, sq, x, m, self.k, agree)

    def screen(self, V: np.ndarray) -> np.ndarray:
        """Boolean mask of rows of ``V`` (restriction vectors) passing the
        restriction-square and boundary-parity conditions."""
        V = np.asarray(V)
        det, adj = self.adjugate
        A = np.array(adj, dtype=object)
        bound = int(np.abs(V).max(initial=0)) * self.k
        big = bound * bound * max(abs(a) for row in adj for a in row) >= 2**62
        dtype = object if big else np.int64
        A = A.astype(dtype)
        V = V.astype(dtype)
        quad = ((V @ A) * V).sum(axis=1)
        ok = quad == -self.k * det
        phi = np.array(self.cokernel.projection[0], dtype=object).astype(dtype)
        x = (V @ phi) % self.order
        return ok & self._parity_mask(x)

    def _parity_mask(self, x: np.ndarray) -> np.ndarray:
        p = self.p
        target = (p - 1) % 2
        div = x % p == 0
        m = (x // p) % p
        return div & ((m % 2 == target) | (((-m) % p) % 2 == target))


_PREPARED: dict[int, PreparedConfig] = {}


def prepare(cfg: EmbeddedConfiguration) -> PreparedConfig:
    key = id(cfg)
    hit = _PREPARED.get(key)
    if hit is None or hit.cfg is not cfg:
        hit = _PREPARED[key] = PreparedConfig(cfg)
    return hit


@dataclass(frozen=True)
class FamilyRow:
    base_class: str
    examined: int
    passing: int


@dataclass(frozen=True)
class SurvivorRow:
    cls: str
    coefficient: int
    vector: tuple[int, ...]
    verdict: DescentVerdict


@dataclass(frozen=True)
class DescentTable:
    config: str
    examined: int
    screened_vectors: int  # restriction vectors evaluated after deduplication
    free: tuple[str, ...]
    families: tuple[FamilyRow, ...]
    survivors: tuple[SurvivorRow, ...]

    @property
    def multiplicity(self) -> int:
        return 2 ** len(self.free)


def descend(sw: SWFunction | FactoredSW, cfg: EmbeddedConfiguration):
    """Filter ``sw`` through the configuration.

    Returns ``(FactoredSW, DescentTable)``.  Surviving classes keep their
    ambient representatives and coefficients.  Exceptional factors that no
    sphere of ``cfg`` meets stay factored.
    """
    _require_valid(cfg)
    if isinstance(sw, SWFunction):
        sw = FactoredSW(sw)
    lat = sw.lattice
    if cfg.lattice is not lat:
        raise LatticeError("configuration and function live in different lattices")
    prep = prepare(cfg)
    k = prep.k

    # pairing of every generator with every sphere: column j = (g_j . u_i)_i
    G = np.array(lat.gram, dtype=np.int64)
    U = np.array([u.coords for u in cfg.sphere_classes], dtype=np.int64)
    A = U @ G

    touched = [e for e in sw.blowups if A[:, lat.index[e]].any()]
    free = tuple(e for e in sw.blowups if e not in touched)
    clusters = _clusters(touched, lambda e: set(np.nonzero(A[:, lat.index[e]])[0]))
    for c in clusters:
        if len(c) > MAX_CLUSTER:
            raise DescentError(f"{len(c)} coupled exceptional classes exceed {MAX_CLUSTER}")

    # per cluster: all sign patterns, their contribution, and distinct contributions
    enum_data = []
    for c in clusters:
        cols = A[:, [lat.index[e] for e in c]].T  # |c| x k
        signs = np.array(list(itertools.product((1, -1), repeat=len(c))), dtype=np.int64)
        W = signs @ cols
        uniq, inverse = _unique_rows(W)
        enum_data.append((c, signs, uniq, inverse.reshape(-1)))
    enum_data.sort(key=lambda t: len(t[2]))

    base_items = sorted(sw.base.terms.items())
    if enum_data:
        big_c, big_signs, big_uniq, big_inv = enum_data[-1]
        small = enum_data[:-1]
    else:
        big_c, big_signs = (), np.ones((1, 0), dtype=np.int64)
        big_uniq, big_inv = np.zeros((1, k), dtype=np.int64), np.zeros(1, dtype=np.int64)
        small = []
    det, adj = prep.adjugate
    big_dtype = object if _needs_object(big_uniq, small, base_items, A, adj) else np.int64
    adjm = np.array(adj, dtype=object).astype(big_dtype)
    Wb = big_uniq.astype(big_dtype)
    Wb_adj = Wb @ adjm
    Wb_quad = (Wb_adj * Wb).sum(axis=1)
    phi = np.array(prep.cokernel.projection[0], dtype=object).astype(big_dtype)
    Wb_phi = Wb @ phi
    target = -k * det

    examined = len(base_items) * 2 ** len(touched)
    screened = 0
    families = []
    survivors: dict[tuple[int, ...], int] = {}
    for coords, coeff in base_items:
        vb = A @ np.array(coords, dtype=np.int64)
        fam_pass = 0
        for choice in itertools.product(*[range(len(d[2])) for d in small]):
            r = vb.copy()
            for d, u in zip(small, choice):
                r = r + d[2][u]
            r_o = r.astype(big_dtype)
            quad = (r_o @ adjm @ r_o) + 2 * (Wb_adj @ r_o) + Wb_quad
            x = (int(r_o @ phi) + Wb_phi) % prep.order
            mask = (quad == target) & prep._parity_mask(np.asarray(x))
            screened += len(big_uniq)
            for ui in np.nonzero(mask)[0]:
                for bi in np.nonzero(big_inv == ui)[0]:
                    for parts in itertools.product(
                        *[np.nonzero(d[3] == u)[0] for d, u in zip(small, choice)]
                    ):
                        cls = list(coords)
                        for e, s in zip(big_c, big_signs[bi]):
                            cls[lat.index[e]] += int(s)
                        for d, si in zip(small, parts):
                            for e, s in zip(d[0], d[1][si]):
                                cls[lat.index[e]] += int(s)
                        survivors[tuple(cls)] = coeff
                        fam_pass += 1
        families.append(FamilyRow(format_class(lat, coords), 2 ** len(touched), fam_pass))

    rows = []
    for cls, coeff in sorted(survivors.items()):
        v = tuple(int(x) for x in A @ np.array(cls, dtype=np.int64))
        verdict = prep.verdict(v)
        if not verdict.theorem_ok:
            raise AssertionError(f"bulk screen and exact check disagree on {format_class(lat, cls)}")
        rows.append(SurvivorRow(format_class(lat, cls), coeff, v, verdict))
    table = DescentTable(cfg.name, examined, screened, free, tuple(families), tuple(rows))
    return FactoredSW(SWFunction(lat, survivors), free), table


def _unique_rows(W: np.ndarray):
    """``np.unique(W, axis=0, return_inverse=True)``, via integer row keys when they fit."""
    cols = np.nonzero(W.any(axis=0))[0]
    lo = W[:, cols].min(axis=0)
    span = W[:, cols].max(axis=0) - lo + 1
    if cols.size == 0 or float(np.prod(span.astype(float))) >= 2.0**62:
        uniq, inverse = np.unique(W, axis=0, return_inverse=True)
        return uniq, inverse.reshape(-1)
    radix = np.concatenate(([1], np.cumprod(span[:-1])))
    keys = (W[:, cols] - lo) @ radix
    _, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
    return W[first], inverse.reshape(-1)


def _needs_object(big_uniq, small, base_items, A, adj) -> bool:
    # bound on |v|_1 over all candidates, to decide whether int64 is exact
    bound = int(np.abs(big_uniq).sum(axis=1).max(initial=0))
    bound += sum(int(np.abs(d[2]).sum(axis=1).max(initial=0)) for d in small)
    bound += max((int(np.abs(A @ np.array(c, dtype=np.int64)).sum()) for c, _ in base_items),
                 default=0)
    amax = max(abs(a) for row in adj for a in row)
    return 2 * bound * bound * amax >= 2**62


def _clusters(items: list[str], support) -> list[tuple[str, ...]]:
    """Group items whose sphere supports overlap (connected components)."""
    sup = {e: support(e) for e in items}
    parent = {e: e for e in items}

    def find(e):
        while parent[e] != e:
            parent[e] = parent[parent[e]]
            e = parent[e]
        return e

    for a, b in itertools.combinations(items, 2):
        if sup[a] & sup[b]:
            parent[find(a)] = find(b)
    groups: dict[str, list[str]] = {}
    for e in items:
        groups.setdefault(find(e), []).append(e)
    return [tuple(g) for g in groups.values()]
