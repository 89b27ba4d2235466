"""Characteristic-number bookkeeping (Euler characteristic, signature, b2+-,
fundamental group status, parity) through blow-ups, knot surgeries and
rational blow-downs, and the resulting homeomorphism type.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace
from math import gcd
from typing import Iterable, Optional


class LedgerError(ValueError):
    pass


class NotDetermined(LedgerError):
    """Homeomorphism type cannot be read off the ledger."""


class Pi1(enum.Enum):
    SIMPLY_CONNECTED = "SimplyConnected"
    H1_ZERO = "H1Zero"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


class Parity(enum.Enum):
    ODD = "Odd"
    EVEN = "Even"
    UNKNOWN = "Unknown"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class InvariantLedger:
    e: int
    sigma: int
    b2p: int
    b2m: int
    pi1: Pi1 = Pi1.UNKNOWN
    parity: Parity = Parity.UNKNOWN
    notes: tuple[str, ...] = ()

    def __post_init__(self):
        # b1 = 0 for every manifold in these constructions
        if self.b2p < 0 or self.b2m < 0:
            raise LedgerError(f"negative Betti number in {self}")
        if self.e != 2 + self.b2p + self.b2m:
            raise LedgerError(f"e = {self.e} != 2 + b2+ + b2- = {2 + self.b2p + self.b2m}")
        if self.sigma != self.b2p - self.b2m:
            raise LedgerError(f"sigma = {self.sigma} != b2+ - b2- = {self.b2p - self.b2m}")

    @classmethod
    def from_euler_signature(cls, e: int, sigma: int, **kw) -> "InvariantLedger":
        b2 = e - 2
        if (b2 + sigma) % 2:
            raise LedgerError(f"e = {e} and sigma = {sigma} have incompatible parity")
        return cls(e, sigma, (b2 + sigma) // 2, (b2 - sigma) // 2, **kw)

    @property
    def numbers(self) -> tuple[int, int, int, int]:
        return self.e, self.sigma, self.b2p, self.b2m

    def __str__(self):
        return (f"e={self.e} sigma={self.sigma} b2+={self.b2p} b2-={self.b2m} "
                f"pi1={self.pi1} parity={self.parity}")


def e2_ledger() -> InvariantLedger:
    """The K3 surface E(2)."""
    return InvariantLedger(24, -16, 3, 19, Pi1.SIMPLY_CONNECTED, Parity.EVEN)


START_MODELS = {"E2": e2_ledger, "K3": e2_ledger}


def ledger_blow_up(l: InvariantLedger) -> InvariantLedger:
    return replace(l, e=l.e + 1, sigma=l.sigma - 1, b2m=l.b2m + 1, parity=Parity.ODD)


def ledger_knot_surgery(l: InvariantLedger) -> InvariantLedger:
    # knot surgery along a fiber keeps e and sigma; the constructions here stay simply connected
    return replace(l, pi1=Pi1.SIMPLY_CONNECTED)


def ledger_rbd(l: InvariantLedger, k: int, pi1: Optional[Pi1] = None,
               parity: Optional[Parity] = None) -> InvariantLedger:
    """Replace a ``k``-sphere configuration by a rational ball.

    ``pi1`` comes from a certificate or a script declaration; without one the
    status drops to Unknown.  Without a declared ``parity`` the form is
    taken to stay odd and a note records the assumption.
    """
    if k < 1:
        raise LedgerError("configuration length must be positive")
    if k > l.b2m:
        raise LedgerError(f"cannot remove {k} negative classes from b2- = {l.b2m}")
    notes = l.notes
    if parity is None:
        parity = Parity.ODD
        note = "parity after rational blow-down assumed Odd"
        if note not in notes:
            notes = notes + (note,)
    return InvariantLedger(l.e - k, l.sigma + k, l.b2p, l.b2m - k,
                           pi1 or Pi1.UNKNOWN, parity, notes)


def coprimality_certificate(p1: int, p2: int) -> bool:
    """True when the boundary groups ``Z_{p1^2}`` and ``Z_{p2^2}`` have coprime orders."""
    return gcd(p1 * p1, p2 * p2) == 1


@dataclass(frozen=True)
class Link:
    """Two configurations met by a common sphere, once each, in end spheres."""

    first: str
    second: str
    via: str
    p_first: int
    p_second: int

    @property
    def coprime(self) -> bool:
        return coprimality_certificate(self.p_first, self.p_second)


def certified_pi1(links: Iterable[Link], blown_down: Iterable[str],
                  ambient_simply_connected: bool) -> bool:
    """Whether the manifold after blowing down ``blown_down`` is simply connected.

    The boundary generator of a blown-down configuration dies when the
    linking sphere, punctured once, lies in the remaining manifold (its
    partner is still present), or when it is identified up to conjugacy and
    inversion with the generator of a blown-down partner of coprime order.
    """
    down = set(blown_down)
    if not ambient_simply_connected:
        return False
    if not down:
        return True
    links = list(links)
    killed = {l.first for l in links if l.first in down and l.second not in down}
    killed |= {l.second for l in links if l.second in down and l.first not in down}
    inner = [l for l in links if l.first in down and l.second in down]
    for l in inner:
        if l.coprime:
            killed |= {l.first, l.second}
    changed = True
    while changed:
        changed = False
        for l in inner:
            if (l.first in killed) != (l.second in killed):
                killed |= {l.first, l.second}
                changed = True
    return down <= killed


def freedman_type(l: InvariantLedger) -> tuple[int, int]:
    """``(a, b)`` such that the manifold is homeomorphic to ``a CP^2 # b (-CP^2)``."""
    if l.pi1 is not Pi1.SIMPLY_CONNECTED:
        raise NotDetermined(f"fundamental group is {l.pi1}, not certified trivial")
    if l.parity is not Parity.ODD:
        raise NotDetermined(f"intersection form parity is {l.parity}")
    if l.b2p < 1 or l.b2m < 1:
        raise NotDetermined("definite intersection form")
    b2 = l.b2p + l.b2m
    return (b2 + l.sigma) // 2, l.b2m
