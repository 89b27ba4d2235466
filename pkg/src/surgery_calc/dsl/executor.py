"""Run a parsed surgery script for one value of the twist parameter ``n``."""
from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Optional

from ..lattice import (
    AmbientLattice,
    Cls,
    EmbeddedConfiguration,
    LatticeError,
    cross_pairings,
    pair,
    square,
    validate_embedding,
)
from ..ledger import (
    START_MODELS,
    InvariantLedger,
    LedgerError,
    Link,
    NotDetermined,
    Pi1,
    certified_pi1,
    freedman_type,
    ledger_blow_up,
    ledger_knot_surgery,
    ledger_rbd,
)
from ..plumbing import LinearPlumbing, PlumbingError, boundary, recover_pq
from ..rbd import DescentError, DescentTable, descend
from ..swcalc import (
    AlexPoly,
    FactoredSW,
    SWError,
    alexander_twist,
    basic_classes,
    format_blowups,
    sw_k3,
)
from . import parser as P


class ExecutionError(RuntimeError):
    def __init__(self, message: str, step: int, line: int):
        self.step = step
        self.line = line
        super().__init__(f"step {step} (line {line}): {message}")


@dataclass(frozen=True)
class StepRecord:
    index: int
    text: str
    ledger: Optional[InvariantLedger]
    sw_terms: Optional[int]


@dataclass(frozen=True)
class AssertionResult:
    step: int
    text: str
    passed: bool
    detail: str
    skipped: bool = False


@dataclass(frozen=True)
class SWState:
    step: int
    label: str
    text: str
    terms: int
    symmetric: bool


@dataclass(frozen=True)
class LinkRecord:
    link: Link
    detail: str


@dataclass
class Report:
    script: str
    n: int
    steps: list[StepRecord] = field(default_factory=list)
    sw_states: list[SWState] = field(default_factory=list)
    descents: list[tuple[int, DescentTable, str]] = field(default_factory=list)
    links: list[LinkRecord] = field(default_factory=list)
    assertions: list[AssertionResult] = field(default_factory=list)
    embeddings: list[str] = field(default_factory=list)
    ledger: Optional[InvariantLedger] = None
    homeomorphism_type: Optional[tuple[int, int]] = None
    type_refusal: str = ""
    basic_classes: list[tuple[str, int]] = field(default_factory=list)
    sw_symmetric: bool = True
    pi1_source: str = ""
    sw_tracked: bool = True

    @property
    def ok(self) -> bool:
        return all(a.passed for a in self.assertions)

    @property
    def sw_values(self) -> tuple[int, ...]:
        """Multiset of ``|SW|`` over the final basic classes, sorted."""
        return tuple(sorted(abs(v) for _, v in self.basic_classes))

    @property
    def label(self) -> str:
        return f"{self.script}[n={self.n}]"


def alex_from_spec(spec: P.AlexSpec, n: int) -> AlexPoly:
    if spec.kind == "twist":
        return alexander_twist(n if spec.twist is None else spec.twist)
    return AlexPoly.from_list(spec.coeffs)


def knot_factor_text(delta: AlexPoly, fiber: str) -> str:
    """``Delta(e^{2F})`` written out, e.g. ``(2e^{2T} - 3 + 2e^{-2T})``."""
    parts = []
    for d, c in sorted(delta.coeffs.items(), reverse=True):
        mono = "" if d == 0 else f"e^{{{2 * d}{fiber}}}"
        body = (mono if abs(c) == 1 and mono else f"{abs(c)}{mono}")
        parts.append((c < 0, body))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] else "") + parts[0][1]
    for neg, body in parts[1:]:
        out += (" - " if neg else " + ") + body
    return f"({out})"


# statements that change the manifold; these get a row in the step table
_PIPELINE = (P.Start, P.KnotSurgery, P.Blowup, P.LinkConfigs, P.Rbd)


class _Runner:
    def __init__(self, script: P.PipelineScript, n: int, track_sw: bool = True):
        self.script = script
        self.n = n
        self.track_sw = track_sw
        self.report = Report(script.name, n, sw_tracked=track_sw)
        self.squares: dict[str, int] = {}
        self.pairings: dict[tuple[str, str], int] = {}
        self.lattice: Optional[AmbientLattice] = None
        self.classes: dict[str, Cls] = {}
        self.configs: dict[str, EmbeddedConfiguration] = {}
        self.ledger: Optional[InvariantLedger] = None
        self.sw: Optional[FactoredSW] = None
        self.blown_up: list[str] = []
        self.links: list[Link] = []
        self.blown_down: list[str] = []
        self.ambient_sc: Optional[bool] = None
        self.knot_factors: list[str] = []
        self.pi1_source = ""
        self.pending_blowups = False
        self.step = 0
        self.line = 0

    # ------------------------------------------------------------ helpers

    def fail(self, message: str):
        raise ExecutionError(message, self.step, self.line)

    def freeze(self):
        if self.lattice is None:
            try:
                self.lattice = AmbientLattice.from_pairings(self.squares, self.pairings)
            except LatticeError as exc:
                self.fail(str(exc))

    def cls(self, combo: P.Combo) -> Cls:
        out = self.lattice.zero()
        for name, c in combo:
            if name in self.classes:
                out = out + c * self.classes[name]
            else:
                out = out + c * self.lattice.gen(name)
        return out

    def record(self, stmt: P.Stmt):
        terms = self.sw.term_count() if self.sw is not None else None
        self.report.steps.append(StepRecord(self.step, stmt.render(), self.ledger, terms))

    def sw_state(self, label: str):
        if self.sw is None:
            self.pending_blowups = False
            return
        if self.blown_down or not self.knot_factors:
            text = str(self.sw.base)
        else:
            text = " * ".join(self._grouped_knot_factors())
        if self.sw.blowups:
            if " " in text and not text.startswith("("):
                text = f"({text})"
            text = f"{text} * {format_blowups(self.sw.blowups)}"
        self.report.sw_states.append(
            SWState(self.step, label, text, self.sw.term_count(), self.sw.is_symmetric()))
        self.pending_blowups = False

    def _grouped_knot_factors(self) -> list[str]:
        out = []
        for f in dict.fromkeys(self.knot_factors):
            k = self.knot_factors.count(f)
            out.append(f if k == 1 else f"{f}^{k}")
        return out

    def check(self, stmt: P.Stmt, passed: bool, detail: str):
        self.report.assertions.append(AssertionResult(self.step, stmt.render(), passed, detail))

    # ------------------------------------------------------------ statements

    def run(self) -> Report:
        for stmt in self.script.flat():
            if self.pending_blowups and not isinstance(stmt, P.Blowup):
                self.sw_state(f"after {len(self.blown_up)} blow-ups")
            self.step += 1
            self.line = stmt.line
            try:
                self.execute(stmt)
            except ExecutionError:
                raise
            except (LatticeError, LedgerError, PlumbingError, SWError, DescentError) as exc:
                self.fail(str(exc))
            if isinstance(stmt, _PIPELINE):
                self.record(stmt)
        return self.finish()

    def execute(self, s: P.Stmt):
        if isinstance(s, P.Generator):
            for nm in s.names:
                self.squares[nm] = s.square
            return
        if isinstance(s, P.Pair):
            self.pairings[(s.a, s.b)] = s.value
            return
        self.freeze()
        match s:
            case P.ClassDecl():
                self.classes[s.name] = self.cls(s.combo)
            case P.ConfigDecl():
                self.declare_config(s)
            case P.Start():
                self.ledger = START_MODELS[s.model]()
                if self.track_sw:
                    self.sw = FactoredSW(sw_k3(self.lattice))
                self.sw_state(f"start {s.model}")
            case P.KnotSurgery():
                fiber = self.cls(s.fiber)
                if square(fiber) != 0:
                    self.fail(f"fiber {fiber} has square {square(fiber)}")
                delta = alex_from_spec(s.alexander, self.n)
                if self.sw is not None:
                    self.sw = self.sw.knot_surgery(fiber, delta)
                self.knot_factors.append(knot_factor_text(delta, str(fiber)))
                self.ledger = ledger_knot_surgery(self.ledger)
                self.sw_state("knot surgery")
            case P.Blowup():
                if self.blown_down:
                    self.fail("blow-ups after a rational blow-down are not supported")
                if self.sw is not None:
                    self.sw = self.sw.blow_up(s.name)
                self.blown_up.append(s.name)
                self.pending_blowups = True
                self.ledger = ledger_blow_up(self.ledger)
            case P.LinkConfigs():
                self.link(s)
            case P.Rbd():
                self.rbd(s)
            case _:
                self.assertion(s)

    def declare_config(self, s: P.ConfigDecl):
        pq = s.pq or recover_pq(s.weights)
        plumbing = LinearPlumbing(s.weights, pq)
        spheres = tuple(self.cls(c) for c in s.spheres)
        self.configs[s.name] = EmbeddedConfiguration(s.name, plumbing, spheres)

    def link(self, s: P.LinkConfigs):
        a, b = self.configs[s.first], self.configs[s.second]
        via = self.cls(s.via)
        for cfg in (a, b):
            if cfg.plumbing.source is None:
                self.fail(f"{cfg.name} has no (p, q) provenance")
            hits = [(i, pair(via, u)) for i, u in enumerate(cfg.sphere_classes) if pair(via, u)]
            if len(hits) != 1 or abs(hits[0][1]) != 1:
                self.fail(f"{via} must meet exactly one sphere of {cfg.name} once")
            if hits[0][0] not in (0, len(cfg.sphere_classes) - 1):
                self.fail(f"{via} meets {cfg.name} in an interior sphere")
        if cross_pairings(a, b):
            self.fail(f"{a.name} and {b.name} are not disjoint")
        lk = Link(a.name, b.name, str(via), a.plumbing.source[0], b.plumbing.source[0])
        self.links.append(lk)
        o1, o2 = lk.p_first**2, lk.p_second**2
        detail = (f"{lk.first} -- {lk.second} via {lk.via}: gcd({o1}, {o2}) = {gcd(o1, o2)}"
                  f" -> {'coprime' if lk.coprime else 'NOT coprime'}")
        self.report.links.append(LinkRecord(lk, detail))

    def rbd(self, s: P.Rbd):
        cfg = self.configs[s.config]
        rep = validate_embedding(cfg)
        if not rep.ok:
            self.fail(str(rep))
        unborn = [g for u in cfg.sphere_classes for g in u.support()
                  if g in self.lattice.exceptionals() and g not in self.blown_up]
        if unborn:
            self.fail(f"{cfg.name} uses exceptional classes not yet blown up: {sorted(set(unborn))}")
        if cfg.plumbing.source is None:
            self.fail(f"{cfg.name} is not a configuration C_(p,q)")
        if self.ambient_sc is None:
            self.ambient_sc = self.ledger.pi1 is Pi1.SIMPLY_CONNECTED
        self.blown_down.append(cfg.name)
        if self.sw is not None:
            self.sw, table = descend(self.sw, cfg)
            lens = boundary(cfg.plumbing)
            p, q = cfg.plumbing.source
            self.report.descents.append(
                (self.step, table, f"C({p},{q}) = {cfg.plumbing}, boundary {lens}"))
        if certified_pi1(self.links, self.blown_down, self.ambient_sc):
            pi1, self.pi1_source = Pi1.SIMPLY_CONNECTED, "coprimality certificate"
        elif s.pi1 is not None:
            pi1, self.pi1_source = s.pi1, "declared in script"
        else:
            pi1, self.pi1_source = Pi1.UNKNOWN, "no certificate"
        self.ledger = ledger_rbd(self.ledger, len(cfg.plumbing), pi1, s.parity)
        self.sw_state(f"rational blow-down along {cfg.name}")

    def assertion(self, s: P.Stmt):
        l = self.ledger
        if self.sw is None and isinstance(s, (P.AssertBasicClasses, P.AssertSW,
                                              P.AssertSymmetric)):
            self.report.assertions.append(
                AssertionResult(self.step, s.render(), True, "SW not tracked", skipped=True))
            return
        match s:
            case P.AssertLedger():
                got = {"e": l.e, "sigma": l.sigma, "b2p": l.b2p, "b2m": l.b2m,
                       "pi1": l.pi1, "parity": l.parity}
                bad = [f"{k}: expected {v}, got {got[k]}" for k, v in s.expected if got[k] != v]
                self.check(s, not bad, "; ".join(bad) or str(l))
            case P.AssertType():
                try:
                    t = freedman_type(l)
                    self.check(s, t == (s.a, s.b), f"type {t}")
                except NotDetermined as exc:
                    self.check(s, False, f"not determined: {exc}")
            case P.AssertPi1():
                self.check(s, l.pi1 is s.status, f"pi1 = {l.pi1}")
            case P.AssertBasicClasses():
                count = self.sw.term_count()
                self.check(s, count == s.count, f"{count} basic classes")
            case P.AssertSW():
                L = self.cls(s.combo)
                want = P.eval_expr(s.value, self.n)
                got = self._coefficient(L)
                ok = abs(got) == abs(want) if s.up_to_sign else got == want
                self.check(s, ok, f"SW({L}) = {got}, expected {'+-' if s.up_to_sign else ''}{want}")
            case P.AssertSymmetric():
                self.check(s, self.sw.is_symmetric(), "coeff(-L) == coeff(L)")
            case P.AssertEmbedding():
                rep = validate_embedding(self.configs[s.config])
                self.report.embeddings.append(str(rep))
                self.check(s, rep.ok, str(rep))
            case P.AssertDisjoint():
                cross = cross_pairings(self.configs[s.first], self.configs[s.second])
                self.check(s, not cross, "disjoint" if not cross else f"pairings {cross}")
            case P.AssertSquare():
                L = self.cls(s.combo)
                self.check(s, square(L) == s.value, f"square({L}) = {square(L)}")
            case P.AssertPair():
                v = pair(self.cls(((s.a, 1),)), self.cls(((s.b, 1),)))
                self.check(s, v == s.value, f"{s.a}.{s.b} = {v}")
            case _:
                self.fail(f"unhandled statement {s.render()}")

    def _coefficient(self, L: Cls) -> int:
        base = self.sw.base
        idx = [self.lattice.index[e] for e in self.sw.blowups]
        coords = list(L.coords)
        # blow-up factors contribute exponent +-1 on their own generator
        for i in idx:
            if abs(coords[i]) != 1:
                return 0
            coords[i] = 0
        return base.terms.get(tuple(coords), 0)

    def finish(self) -> Report:
        if self.pending_blowups:
            self.sw_state(f"after {len(self.blown_up)} blow-ups")
        r = self.report
        r.ledger = self.ledger
        r.pi1_source = self.pi1_source
        if self.ledger is not None:
            try:
                r.homeomorphism_type = freedman_type(self.ledger)
            except NotDetermined as exc:
                r.type_refusal = str(exc)
        if self.sw is not None:
            if self.sw.term_count() <= 4096:
                r.basic_classes = [(str(c), v) for c, v in basic_classes(self.sw)]
            r.sw_symmetric = self.sw.is_symmetric()
        return r


@dataclass(frozen=True)
class Environment:
    """Declarations of a script or dataset: lattice, named classes, configurations."""

    lattice: AmbientLattice
    classes: dict[str, Cls]
    configs: dict[str, EmbeddedConfiguration]


_DECLARATIONS = (P.Generator, P.Pair, P.ClassDecl, P.ConfigDecl)


def build_environment(script: P.PipelineScript) -> Environment:
    """Evaluate only the declarations of ``script``."""
    r = _Runner(script, 0, track_sw=False)
    for stmt in script.flat():
        if isinstance(stmt, _DECLARATIONS):
            r.step += 1
            r.line = stmt.line
            try:
                r.execute(stmt)
            except (LatticeError, PlumbingError) as exc:
                r.fail(str(exc))
    r.freeze()
    return Environment(r.lattice, dict(r.classes), dict(r.configs))


def execute(script: P.PipelineScript, n: int, track_sw: bool = True) -> Report:
    """Run ``script`` with twist parameter ``n``.

    With ``track_sw=False`` only the ledger, configurations and certificates
    are computed; Seiberg-Witten assertions are reported as skipped.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    return _Runner(script, n, track_sw).run()
