"""Text rendering of execution reports and the nondiffeomorphism certificate."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .executor import Report

_RULE = "=" * 72


def _table(header: Sequence[str], rows: Sequence[Sequence[object]]) -> list[str]:
    cells = [list(map(str, header))] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    out = []
    for j, r in enumerate(cells):
        out.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        if j == 0:
            out.append("  ".join("-" * w for w in widths))
    return out


def _pattern(v: Sequence[int]) -> str:
    """Run-length form of a restriction vector, e.g. ``(16, 17, 0^14, 1, 0^16)``."""
    parts = []
    i = 0
    while i < len(v):
        j = i
        while j < len(v) and v[j] == v[i]:
            j += 1
        parts.append(f"{v[i]}^{j - i}" if j - i > 1 else str(v[i]))
        i = j
    return "(" + ", ".join(parts) + ")"


def render_final(r: Report) -> str:
    """The order-independent end state: ledger, type and basic classes."""
    lines = ["## final state"]
    l = r.ledger
    if l is None:
        lines.append("no manifold (script has no start statement)")
        return "\n".join(lines)
    lines.append(f"ledger: e={l.e} sigma={l.sigma} b2+={l.b2p} b2-={l.b2m}")
    lines.append(f"pi1: {l.pi1}" + (f" ({r.pi1_source})" if r.pi1_source else ""))
    lines.append(f"parity: {l.parity}")
    for note in l.notes:
        lines.append(f"note: {note}")
    if r.homeomorphism_type:
        a, b = r.homeomorphism_type
        lines.append(f"homeomorphism type: {a}CP^2 # {b}(-CP^2)")
    else:
        lines.append(f"homeomorphism type: not determined ({r.type_refusal})")
    if r.sw_tracked:
        k = len(r.basic_classes)
        lines.append(f"basic classes: {k} ({k // 2} up to sign)" if k else "basic classes: 0")
    if not r.sw_tracked:
        lines.append("Seiberg-Witten function not tracked")
        return "\n".join(lines)
    for cls, v in r.basic_classes:
        lines.append(f"  SW({cls}) = {v}")
    lines.append(f"SW(-L) = SW(L) for all L: {'yes' if r.sw_symmetric else 'no'}")
    return "\n".join(lines)


def render_report(r: Report) -> str:
    lines = [_RULE, f"# surgery-calc report: {r.script}  (n = {r.n})", _RULE, ""]

    lines.append("## steps")
    rows = []
    for s in r.steps:
        l = s.ledger
        rows.append([s.index, s.text, l.e, l.sigma, l.b2p, l.b2m, l.pi1, l.parity,
                     s.sw_terms if s.sw_terms is not None else "-"])
    lines += _table(["step", "statement", "e", "sigma", "b2+", "b2-", "pi1", "parity",
                     "SW terms"], rows)
    lines.append("")

    lines.append("## Seiberg-Witten functions")
    for st in r.sw_states:
        lines.append(f"[step {st.step}] {st.label}: {st.terms} terms, "
                     f"symmetric={'yes' if st.symmetric else 'no'}")
        lines.append(f"  SW = {st.text}")
    lines.append("")

    if r.links:
        lines.append("## coprimality certificates")
        for lk in r.links:
            lines.append(f"  {lk.detail}")
        lines.append("")

    for step, table, desc in r.descents:
        lines.append(f"## descent through {table.config} (step {step})")
        lines.append(f"{desc}")
        lines.append(f"candidates examined: {table.examined}; restriction vectors screened: "
                     f"{table.screened_vectors}")
        free = ", ".join(table.free) if table.free else "none"
        lines.append(f"exceptional classes not met by the configuration: {free} "
                     f"(multiplicity {table.multiplicity})")
        lines += _table(["family (base class)", "sign patterns", "descending"],
                        [[f.base_class, f.examined, f.passing] for f in table.families])
        lines.append("surviving classes:")
        lines += _table(
            ["class", "SW", "L.u_i", "mode", "(L|C)^2", "c1 on boundary", "m", "parity"],
            [[s.cls, s.coefficient, _pattern(s.vector), s.verdict.mode,
              s.verdict.restriction_square, s.verdict.boundary_class, s.verdict.m,
              "ok" if s.verdict.m_parity_ok else "bad"] for s in table.survivors])
        if any(not s.verdict.m_interpretations_agree for s in table.survivors):
            lines.append("note: the parity of m differs between least residues [0, p) and "
                         "symmetric residues (-p/2, p/2] for some survivors; "
                         "verdicts use least residues with both signs")
        lines.append("")

    if r.embeddings:
        lines.append("## embeddings")
        lines += [f"  {e}" for e in r.embeddings]
        lines.append("")

    lines.append("## assertions")
    if not r.assertions:
        lines.append("  (none)")
    for a in r.assertions:
        tag = "skip" if a.skipped else ("pass" if a.passed else "FAIL")
        lines.append(f"  [{tag}] step {a.step}: {a.text}  -- {a.detail}")
    lines.append("")

    lines.append(render_final(r))
    lines.append("")
    lines.append("## summary")
    lines += [f"{k} = {v}" for k, v in summary(r).items()]
    return "\n".join(lines) + "\n"


def summary(r: Report) -> dict[str, object]:
    out: dict[str, object] = {"script": r.script, "n": r.n}
    if r.ledger is not None:
        l = r.ledger
        out.update({"final.e": l.e, "final.sigma": l.sigma, "final.b2p": l.b2p,
                    "final.b2m": l.b2m, "final.pi1": l.pi1, "final.parity": l.parity})
    out["final.type"] = ("%d,%d" % r.homeomorphism_type) if r.homeomorphism_type else "undetermined"
    if r.sw_tracked:
        out["final.basic_classes"] = len(r.basic_classes)
        out["final.sw_abs_values"] = ",".join(map(str, r.sw_values)) or "-"
    out["assertions.passed"] = sum(a.passed and not a.skipped for a in r.assertions)
    out["assertions.failed"] = sum(not a.passed for a in r.assertions)
    out["assertions.skipped"] = sum(a.skipped for a in r.assertions)
    return out


@dataclass(frozen=True)
class Certificate:
    groups: tuple[tuple[tuple[int, ...], tuple[str, ...]], ...]  # (|SW| multiset, labels)

    @property
    def distinguished(self) -> int:
        return len(self.groups)


def nondiffeo_certificate(reports: Sequence[Report]) -> Certificate:
    """Group manifolds by the multiset of |SW| over their basic classes.

    Different groups have different Seiberg-Witten invariants and so are
    pairwise nondiffeomorphic; members of one group are not distinguished.
    """
    if len(reports) < 2:
        raise ValueError("need at least two reports")
    if not all(r.sw_tracked for r in reports):
        raise ValueError("certificates need reports with Seiberg-Witten functions")
    groups: dict[tuple[int, ...], list[str]] = {}
    for r in reports:
        groups.setdefault(r.sw_values, []).append(r.label)
    return Certificate(tuple((k, tuple(v)) for k, v in sorted(groups.items())))


def render_certificate(cert: Certificate) -> str:
    lines = [_RULE, "# nondiffeomorphism certificate", _RULE]
    for values, labels in cert.groups:
        shown = ",".join(map(str, values)) or "none"
        status = "not distinguished" if len(labels) > 1 else "distinct"
        lines.append(f"|SW| multiset {{{shown}}}: {', '.join(labels)}  [{status}]")
    lines.append(f"{cert.distinguished} pairwise nondiffeomorphic group(s) "
                 f"among {sum(len(l) for _, l in cert.groups)} manifold(s)")
    return "\n".join(lines) + "\n"
