"""``surgery-calc`` command line.

Exit status: 0 on success, 1 when ``--verify`` finds a failed assertion,
2 on parse, validation or execution errors.
"""
from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from .arith import ArithError, cfrac_expand
from .plumbing import (
    PlumbingError,
    boundary,
    determinant,
    format_weights,
    from_pq,
    intersection_matrix,
    is_negative_definite,
)
from .dsl import (
    ExecutionError,
    ParseError,
    format_script,
    load_script,
    nondiffeo_certificate,
    render_certificate,
    render_report,
    run_script,
    shipped_scripts,
)

EXIT_OK, EXIT_ASSERT, EXIT_ERROR = 0, 1, 2


def parse_n_range(text: str) -> list[int]:
    """``3``, ``1..10`` or ``1,2,5`` (pieces may be mixed: ``1..3,7``)."""
    out: list[int] = []
    for piece in text.split(","):
        piece = piece.strip()
        if ".." in piece:
            a, b = piece.split("..", 1)
            lo, hi = int(a), int(b)
            if lo > hi:
                raise argparse.ArgumentTypeError(f"empty range {piece!r}")
            out.extend(range(lo, hi + 1))
        else:
            out.append(int(piece))
    if any(n < 1 for n in out):
        raise argparse.ArgumentTypeError("n must be >= 1")
    return out


def _n_arg(text: str) -> list[int]:
    try:
        return parse_n_range(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --n value {text!r}") from None


def check_config_text(p: int, q: int) -> str:
    P = from_pq(p, q)
    Q = intersection_matrix(P)
    det = determinant(Q)
    cf = cfrac_expand(p, q)
    entries = "[" + format_weights(cf.entries)[1:-1] + "]"
    return "\n".join([
        f"C({p},{q})",
        f"plumbing: {P}",
        f"vertices: {len(P)}",
        f"continued fraction: {p * p}/{p * q - 1} = {entries}",
        f"boundary: {boundary(P)}",
        f"determinant: {det} (|det| = {abs(det)})",
        f"negative definite: {'yes' if is_negative_definite(Q) else 'no'}",
    ]) + "\n"


def cmd_check_config(args) -> int:
    sys.stdout.write(check_config_text(args.p, args.q))
    return EXIT_OK


def _run_one(job):
    ref, n, track_sw = job
    return run_script(ref, n, track_sw)


def cmd_run(args) -> int:
    for ref in args.scripts:
        load_script(ref)  # fail fast on parse errors before any execution
    jobs = [(ref, n, not args.no_sw) for ref in args.scripts for n in args.n]
    if args.jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            reports = list(pool.map(_run_one, jobs))
    else:
        reports = [_run_one(j) for j in jobs]
    text = "".join(render_report(r) + "\n" for r in reports)
    if len(reports) > 1 and not args.no_sw:
        text += render_certificate(nondiffeo_certificate(reports))
    if args.emit:
        Path(args.emit).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    failed = [r.label for r in reports if not r.ok]
    if failed:
        print(f"assertion failures in: {', '.join(failed)}", file=sys.stderr)
        if args.verify:
            return EXIT_ASSERT
    return EXIT_OK


def cmd_parse(args) -> int:
    sys.stdout.write(format_script(load_script(args.script)))
    return EXIT_OK


def cmd_list(args) -> int:
    for name in shipped_scripts():
        print(name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="surgery-calc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="execute one or more scripts for a range of n")
    r.add_argument("scripts", nargs="+", help="script path or shipped script name")
    r.add_argument("--n", type=_n_arg, default=[1], help="twist parameter: 3, 1..10 or 1,4,9")
    r.add_argument("--emit", metavar="PATH", help="write the report(s) to PATH")
    r.add_argument("--verify", action="store_true", help="exit 1 if any assertion fails")
    r.add_argument("--no-sw", action="store_true",
                   help="ledger and certificates only; skip Seiberg-Witten tracking")
    r.add_argument("--jobs", type=int, default=1, help="run executions in parallel")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check-config", help="describe the configuration C(p,q)")
    c.add_argument("p", type=int)
    c.add_argument("q", type=int)
    c.set_defaults(func=cmd_check_config)

    p = sub.add_parser("parse", help="parse a script and print it in normal form")
    p.add_argument("script")
    p.set_defaults(func=cmd_parse)

    ls = sub.add_parser("list-scripts", help="list shipped scripts")
    ls.set_defaults(func=cmd_list)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ParseError, ExecutionError, ArithError, PlumbingError, FileNotFoundError) as exc:
        print(f"surgery-calc: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
