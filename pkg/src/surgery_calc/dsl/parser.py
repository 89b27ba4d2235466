"""Line-oriented surgery-script parser.

Grammar (EBNF; ``#`` starts a comment, one statement per line)::

    script      = { [ statement ] [ "#" text ] NEWLINE } ;
    statement   = "include" path
                | "generator" names "square=" int
                | "pair" name name "=" int
                | ("class" | "declare_class") name "=" combo
                | ("config" | "declare_config") name "plumbing=" weights
                      "spheres=[" combo { "," combo } "]" [ "pq=(" int "," int ")" ]
                | "start" model
                | "knot_surgery" "fiber=" combo "alexander=" alex
                | "blowup" name [ "at=" quoted ]
                | "link_configs" name name "via=" combo
                | "rbd" name [ "pi1=" pi1 ] [ "parity=" parity ]
                | "assert_ledger" { ("e" | "sigma" | "b2p" | "b2m") "=" int
                                    | "pi1=" pi1 | "parity=" parity }
                | "assert_type" int int
                | "assert_pi1" pi1
                | "assert_basic_classes" "count=" int
                | "assert_sw" "class=" combo "value=" expr
                | "assert_symmetric"
                | "assert_embedding" name
                | "assert_disjoint" name name
                | "assert_square" combo "=" int
                | "assert_pair" name name "=" int ;
    names       = name | name ".." name ;              (* E1..E24 *)
    combo       = [ sign ] term { sign term } ;
    term        = [ int [ "*" ] ] ( name | "sum(" name ".." name ")" ) ;
    weights     = "(" int [ "^" int ] { "," int [ "^" int ] } ")" ;
    alex        = "twist(" ( int | "n" ) ")" | "poly(" int { "," int } ")" ;
    expr        = [ "+-" | "±" ] arithmetic in the script parameter n ;
    pi1         = "SimplyConnected" | "H1Zero" | "Unknown" ;
    parity      = "Odd" | "Even" | "Unknown" ;

Identifiers must be declared before use and each configuration may be
blown down at most once.
"""
from __future__ import annotations

import ast
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Union

from ..ledger import START_MODELS, Parity, Pi1
from ..plumbing import PlumbingError, format_weights, parse_weights

Combo = tuple[tuple[str, int], ...]

NAME = r"[A-Za-z_][A-Za-z0-9_']*"
_NAME_RE = re.compile(rf"^{NAME}$")
_RANGE_RE = re.compile(rf"^({NAME}?)(\d+)\.\.({NAME}?)(\d+)$")
_KEY_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)=")
_TERM_RE = re.compile(rf"\s*(\d+)?\s*\*?\s*(sum\(\s*{NAME}\s*\.\.\s*{NAME}\s*\)|{NAME})\s*")


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.message = message
        self.line = line
        self.col = col
        super().__init__(f"line {line}, column {col}: {message}" if line else message)


@dataclass(frozen=True)
class Stmt:
    line: int = field(default=0, compare=False, kw_only=True)

    def render(self) -> str:  # pragma: no cover - overridden
        raise NotImplementedError


_STEM_RE = re.compile(r"^(.*?)(\d+)$")


def render_combo(combo: Combo) -> str:
    """Inverse of :func:`parse_combo`; runs of 3+ unit terms become ``sum(A..B)``."""
    if not combo:
        return "0"
    chunks = []  # (coefficient, body)
    i = 0
    while i < len(combo):
        name, c = combo[i]
        j = i + 1
        m = _STEM_RE.match(name)
        if abs(c) == 1 and m:
            while j < len(combo):
                m2 = _STEM_RE.match(combo[j][0])
                if not (m2 and m2.group(1) == m.group(1) and combo[j][1] == c
                        and int(m2.group(2)) == int(m.group(2)) + (j - i)):
                    break
                j += 1
        if j - i >= 3:
            chunks.append((c, f"sum({name}..{combo[j - 1][0]})"))
        else:
            j = i + 1
            chunks.append((c, name if abs(c) == 1 else f"{abs(c)}{name}"))
        i = j
    out = []
    for k, (c, body) in enumerate(chunks):
        if k == 0:
            out.append(("-" if c < 0 else "") + body)
        else:
            out.append(("- " if c < 0 else "+ ") + body)
    return " ".join(out)


@dataclass(frozen=True)
class Include(Stmt):
    path: str
    body: tuple[Stmt, ...] = ()

    def render(self):
        return f"include {self.path}"


@dataclass(frozen=True)
class Generator(Stmt):
    names: tuple[str, ...]
    square: int

    def render(self):
        if len(self.names) > 1:
            return f"generator {self.names[0]}..{self.names[-1]} square={self.square}"
        return f"generator {self.names[0]} square={self.square}"


@dataclass(frozen=True)
class Pair(Stmt):
    a: str
    b: str
    value: int

    def render(self):
        return f"pair {self.a} {self.b} = {self.value}"


@dataclass(frozen=True)
class ClassDecl(Stmt):
    name: str
    combo: Combo

    def render(self):
        return f"class {self.name} = {render_combo(self.combo)}"


@dataclass(frozen=True)
class ConfigDecl(Stmt):
    name: str
    weights: tuple[int, ...]
    spheres: tuple[Combo, ...]
    pq: Optional[tuple[int, int]] = None

    def render(self):
        out = (f"config {self.name} plumbing={format_weights(self.weights)} "
               f"spheres=[{', '.join(render_combo(s) for s in self.spheres)}]")
        if self.pq:
            out += f" pq=({self.pq[0]},{self.pq[1]})"
        return out


@dataclass(frozen=True)
class Start(Stmt):
    model: str

    def render(self):
        return f"start {self.model}"


@dataclass(frozen=True)
class AlexSpec:
    kind: str  # "twist" or "poly"
    twist: Optional[int] = None  # None means the script parameter n
    coeffs: tuple[int, ...] = ()

    def render(self):
        if self.kind == "twist":
            return f"twist({'n' if self.twist is None else self.twist})"
        return f"poly({','.join(map(str, self.coeffs))})"


@dataclass(frozen=True)
class KnotSurgery(Stmt):
    fiber: Combo
    alexander: AlexSpec

    def render(self):
        return f"knot_surgery fiber={render_combo(self.fiber)} alexander={self.alexander.render()}"


@dataclass(frozen=True)
class Blowup(Stmt):
    name: str
    at: Optional[str] = None

    def render(self):
        return f"blowup {self.name}" + (f' at="{self.at}"' if self.at else "")


@dataclass(frozen=True)
class LinkConfigs(Stmt):
    first: str
    second: str
    via: Combo

    def render(self):
        return f"link_configs {self.first} {self.second} via={render_combo(self.via)}"


@dataclass(frozen=True)
class Rbd(Stmt):
    config: str
    pi1: Optional[Pi1] = None
    parity: Optional[Parity] = None

    def render(self):
        out = f"rbd {self.config}"
        if self.pi1:
            out += f" pi1={self.pi1}"
        if self.parity:
            out += f" parity={self.parity}"
        return out


@dataclass(frozen=True)
class AssertLedger(Stmt):
    expected: tuple[tuple[str, Union[int, Pi1, Parity]], ...]

    def render(self):
        return "assert_ledger " + " ".join(f"{k}={v}" for k, v in self.expected)


@dataclass(frozen=True)
class AssertType(Stmt):
    a: int
    b: int

    def render(self):
        return f"assert_type {self.a} {self.b}"


@dataclass(frozen=True)
class AssertPi1(Stmt):
    status: Pi1

    def render(self):
        return f"assert_pi1 {self.status}"


@dataclass(frozen=True)
class AssertBasicClasses(Stmt):
    count: int

    def render(self):
        return f"assert_basic_classes count={self.count}"


@dataclass(frozen=True)
class AssertSW(Stmt):
    combo: Combo
    value: str  # arithmetic expression in n
    up_to_sign: bool = False

    def render(self):
        return (f"assert_sw class={render_combo(self.combo)} "
                f"value={'+-' if self.up_to_sign else ''}{self.value}")


@dataclass(frozen=True)
class AssertSymmetric(Stmt):
    def render(self):
        return "assert_symmetric"


@dataclass(frozen=True)
class AssertEmbedding(Stmt):
    config: str

    def render(self):
        return f"assert_embedding {self.config}"


@dataclass(frozen=True)
class AssertDisjoint(Stmt):
    first: str
    second: str

    def render(self):
        return f"assert_disjoint {self.first} {self.second}"


@dataclass(frozen=True)
class AssertSquare(Stmt):
    combo: Combo
    value: int

    def render(self):
        return f"assert_square {render_combo(self.combo)} = {self.value}"


@dataclass(frozen=True)
class AssertPair(Stmt):
    a: str
    b: str
    value: int

    def render(self):
        return f"assert_pair {self.a} {self.b} = {self.value}"


@dataclass(frozen=True)
class PipelineScript:
    statements: tuple[Stmt, ...]
    name: str = field(default="<script>", compare=False)

    def flat(self) -> list[Stmt]:
        """Statements with includes expanded in place."""
        out: list[Stmt] = []
        for s in self.statements:
            if isinstance(s, Include):
                out.extend(PipelineScript(s.body).flat())
            else:
                out.append(s)
        return out


def format_script(script: PipelineScript) -> str:
    return "".join(s.render() + "\n" for s in script.statements)


# ---------------------------------------------------------------- parsing

def _split_comment(line: str) -> str:
    quoted = False
    for i, ch in enumerate(line):
        if ch == '"':
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def _split_args(text: str, offset: int):
    """Split ``pos1 pos2 key=value key2=[a, b]`` into positional words and options.

    Returns ``(positional, {key: (value, column)})``.
    """
    depth = 0
    quoted = False
    keys = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == '"':
            quoted = not quoted
        elif not quoted:
            if ch in "([":
                depth += 1
            elif ch in ")]":
                depth -= 1
            elif depth == 0 and (i == 0 or text[i - 1].isspace()):
                m = _KEY_RE.match(text, i)
                if m:
                    keys.append((m.start(), m.end(), m.group(1)))
                    i = m.end()
                    continue
        i += 1
    head = text[: keys[0][0]] if keys else text
    opts = {}
    for n, (start, end, key) in enumerate(keys):
        stop = keys[n + 1][0] if n + 1 < len(keys) else len(text)
        if key in opts:
            raise ParseError(f"duplicate option {key!r}", 0, offset + start + 1)
        opts[key] = (text[end:stop].strip(), offset + end + 1)
    return head.split(), opts


def _expand_range(text: str) -> list[str]:
    m = _RANGE_RE.match(text.replace(" ", ""))
    if not m:
        return []
    stem1, a, stem2, b = m.groups()
    if stem1 != stem2 or int(a) > int(b):
        return []
    return [f"{stem1}{i}" for i in range(int(a), int(b) + 1)]


def parse_combo(text: str) -> Combo:
    """Parse ``6T + 2*E7 - E5 + sum(E8..E24)`` into ``((name, coeff), ...)``."""
    s = text.strip()
    if not s:
        raise ParseError("empty class expression")
    out: dict[str, int] = {}
    pos = 0
    sign = 1
    if s[0] in "+-":
        sign = -1 if s[0] == "-" else 1
        pos = 1
    while True:
        m = _TERM_RE.match(s, pos)
        if not m or m.end() == pos:
            raise ParseError(f"bad class expression {text!r}")
        coeff = sign * int(m.group(1) or 1)
        atom = m.group(2)
        if atom.startswith("sum("):
            names = _expand_range(atom[4:-1])
            if not names:
                raise ParseError(f"bad range in {atom!r}")
        else:
            names = [atom]
        for nm in names:
            out[nm] = out.get(nm, 0) + coeff
        pos = m.end()
        if pos == len(s):
            break
        if s[pos] not in "+-":
            raise ParseError(f"expected + or - in {text!r} at {s[pos:]!r}")
        sign = -1 if s[pos] == "-" else 1
        pos += 1
    return tuple((k, v) for k, v in out.items() if v)


def _int(text: str, what: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ParseError(f"{what} must be an integer, got {text!r}") from None


def _enum(cls, text: str, what: str):
    for member in cls:
        if member.value == text:
            return member
    raise ParseError(f"{what} must be one of {[m.value for m in cls]}, got {text!r}")


def _list_items(text: str) -> list[str]:
    text = text.strip()
    if not (text.startswith("[") and text.endswith("]")):
        raise ParseError(f"expected a bracketed list, got {text!r}")
    inner = text[1:-1].strip()
    return [x for x in (p.strip() for p in inner.split(","))] if inner else []


def _parse_alex(text: str) -> AlexSpec:
    t = text.replace(" ", "")
    m = re.fullmatch(r"twist\((n|\d+)\)", t)
    if m:
        return AlexSpec("twist", None if m.group(1) == "n" else int(m.group(1)))
    m = re.fullmatch(r"poly\((-?\d+(?:,-?\d+)*)\)", t)
    if m:
        coeffs = tuple(int(x) for x in m.group(1).split(","))
        if len(coeffs) % 2 == 0:
            raise ParseError("poly(...) needs an odd number of coefficients t^-d..t^d")
        if coeffs != coeffs[::-1]:
            raise ParseError("poly(...) must be symmetric")
        return AlexSpec("poly", None, coeffs)
    raise ParseError(f"alexander must be twist(n), twist(<int>) or poly(...), got {text!r}")


_EXPR_NODES = (ast.Expression, ast.BinOp, ast.UnaryOp, ast.Constant, ast.Name, ast.Load,
               ast.Add, ast.Sub, ast.Mult, ast.Pow, ast.USub, ast.UAdd)


def check_expr(text: str) -> None:
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError:
        raise ParseError(f"bad value expression {text!r}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _EXPR_NODES):
            raise ParseError(f"unsupported syntax in {text!r}")
        if isinstance(node, ast.Name) and node.id != "n":
            raise ParseError(f"unknown variable {node.id!r} in {text!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, int):
            raise ParseError(f"non-integer constant in {text!r}")


def eval_expr(text: str, n: int) -> int:
    check_expr(text)
    tree = ast.parse(text.replace("^", "**"), mode="eval")

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant):
            return node.value
        if isinstance(node, ast.Name):
            return n
        if isinstance(node, ast.UnaryOp):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        a, b = ev(node.left), ev(node.right)
        if isinstance(node.op, ast.Add):
            return a + b
        if isinstance(node.op, ast.Sub):
            return a - b
        if isinstance(node.op, ast.Mult):
            return a * b
        return a ** b

    return ev(tree)


def _no_options(opts, line):
    if opts:
        key = next(iter(opts))
        raise ParseError(f"unexpected option {key!r}", line, opts[key][1])


def _arity(words, n, keyword, line):
    if len(words) != n:
        raise ParseError(f"{keyword} takes {n} positional argument(s), got {len(words)}", line, 1)


def _parse_line(keyword: str, rest: str, line: int, col0: int) -> Stmt:
    def opt(opts, key, required=True):
        if key in opts:
            return opts.pop(key)[0]
        if required:
            raise ParseError(f"{keyword} needs {key}=", line, col0)
        return None

    if keyword in ("class", "declare_class", "pair", "assert_pair"):
        if "=" not in rest:
            raise ParseError(f"{keyword} needs '='", line, col0)
        lhs, rhs = rest.split("=", 1)
        words = lhs.split()
        if keyword == "pair":
            _arity(words, 2, keyword, line)
            return Pair(words[0], words[1], _int(rhs.strip(), "pairing"), line=line)
        if keyword == "assert_pair":
            _arity(words, 2, keyword, line)
            return AssertPair(words[0], words[1], _int(rhs.strip(), "pairing"), line=line)
        _arity(words, 1, keyword, line)
        return ClassDecl(words[0], parse_combo(rhs), line=line)
    if keyword == "assert_square":
        if "=" not in rest:
            raise ParseError("assert_square needs '= <int>'", line, col0)
        lhs, rhs = rest.rsplit("=", 1)
        return AssertSquare(parse_combo(lhs), _int(rhs.strip(), "square"), line=line)

    words, opts = _split_args(rest, col0)
    if keyword == "include":
        _arity(words, 1, keyword, line)
        _no_options(opts, line)
        return Include(words[0], line=line)
    if keyword == "generator":
        _arity(words, 1, keyword, line)
        names = _expand_range(words[0]) or ([words[0]] if _NAME_RE.match(words[0]) else [])
        if not names:
            raise ParseError(f"bad generator name {words[0]!r}", line, col0)
        sq = _int(opt(opts, "square"), "square")
        _no_options(opts, line)
        return Generator(tuple(names), sq, line=line)
    if keyword in ("config", "declare_config"):
        _arity(words, 1, keyword, line)
        try:
            weights = parse_weights(opt(opts, "plumbing"))
        except PlumbingError as exc:
            raise ParseError(str(exc), line, col0) from None
        spheres = tuple(parse_combo(s) for s in _list_items(opt(opts, "spheres")))
        pq_text = opt(opts, "pq", required=False)
        pq = None
        if pq_text is not None:
            m = re.fullmatch(r"\(\s*(\d+)\s*,\s*(\d+)\s*\)", pq_text)
            if not m:
                raise ParseError(f"pq must look like (p,q), got {pq_text!r}", line, col0)
            pq = (int(m.group(1)), int(m.group(2)))
        _no_options(opts, line)
        if len(spheres) != len(weights):
            raise ParseError(
                f"config {words[0]}: {len(spheres)} spheres for {len(weights)} weights", line, col0)
        return ConfigDecl(words[0], weights, spheres, pq, line=line)
    if keyword == "start":
        _arity(words, 1, keyword, line)
        _no_options(opts, line)
        if words[0] not in START_MODELS:
            raise ParseError(f"unknown start model {words[0]!r}", line, col0)
        return Start(words[0], line=line)
    if keyword == "knot_surgery":
        _arity(words, 0, keyword, line)
        fiber = parse_combo(opt(opts, "fiber"))
        alex = _parse_alex(opt(opts, "alexander"))
        _no_options(opts, line)
        return KnotSurgery(fiber, alex, line=line)
    if keyword == "blowup":
        _arity(words, 1, keyword, line)
        at = opt(opts, "at", required=False)
        if at is not None:
            if not (len(at) >= 2 and at[0] == at[-1] == '"'):
                raise ParseError("at= takes a double-quoted description", line, col0)
            at = at[1:-1]
        _no_options(opts, line)
        return Blowup(words[0], at, line=line)
    if keyword == "link_configs":
        _arity(words, 2, keyword, line)
        via = parse_combo(opt(opts, "via"))
        _no_options(opts, line)
        return LinkConfigs(words[0], words[1], via, line=line)
    if keyword == "rbd":
        _arity(words, 1, keyword, line)
        pi1 = opt(opts, "pi1", required=False)
        par = opt(opts, "parity", required=False)
        _no_options(opts, line)
        return Rbd(words[0], pi1 and _enum(Pi1, pi1, "pi1"),
                   par and _enum(Parity, par, "parity"), line=line)
    if keyword == "assert_ledger":
        _arity(words, 0, keyword, line)
        expected = []
        for key in ("e", "sigma", "b2p", "b2m"):
            if key in opts:
                expected.append((key, _int(opts.pop(key)[0], key)))
        if "pi1" in opts:
            expected.append(("pi1", _enum(Pi1, opts.pop("pi1")[0], "pi1")))
        if "parity" in opts:
            expected.append(("parity", _enum(Parity, opts.pop("parity")[0], "parity")))
        _no_options(opts, line)
        if not expected:
            raise ParseError("assert_ledger needs at least one field", line, col0)
        return AssertLedger(tuple(expected), line=line)
    if keyword == "assert_type":
        _arity(words, 2, keyword, line)
        _no_options(opts, line)
        return AssertType(_int(words[0], "a"), _int(words[1], "b"), line=line)
    if keyword == "assert_pi1":
        _arity(words, 1, keyword, line)
        _no_options(opts, line)
        return AssertPi1(_enum(Pi1, words[0], "pi1"), line=line)
    if keyword == "assert_basic_classes":
        _arity(words, 0, keyword, line)
        count = _int(opt(opts, "count"), "count")
        _no_options(opts, line)
        return AssertBasicClasses(count, line=line)
    if keyword == "assert_sw":
        _arity(words, 0, keyword, line)
        combo = parse_combo(opt(opts, "class"))
        value = opt(opts, "value").replace(" ", "")
        _no_options(opts, line)
        up_to_sign = False
        for prefix in ("+-", "±"):
            if value.startswith(prefix):
                value, up_to_sign = value[len(prefix):], True
        check_expr(value)
        return AssertSW(combo, value, up_to_sign, line=line)
    if keyword == "assert_symmetric":
        _arity(words, 0, keyword, line)
        _no_options(opts, line)
        return AssertSymmetric(line=line)
    if keyword == "assert_embedding":
        _arity(words, 1, keyword, line)
        _no_options(opts, line)
        return AssertEmbedding(words[0], line=line)
    if keyword == "assert_disjoint":
        _arity(words, 2, keyword, line)
        _no_options(opts, line)
        return AssertDisjoint(words[0], words[1], line=line)
    raise ParseError(f"unknown statement {keyword!r}", line, col0 - len(keyword))


Loader = Callable[[str], tuple[str, Optional[Path]]]


def file_loader(base_dir: Optional[Path]) -> Loader:
    def load(path: str):
        p = Path(path)
        if not p.is_absolute() and base_dir is not None:
            p = base_dir / p
        try:
            return p.read_text(encoding="utf-8"), p.parent
        except OSError as exc:
            raise ParseError(f"cannot include {path!r}: {exc.strerror}") from None

    return load


def _parse_lines(text: str, loader_factory, base_dir, depth=0) -> list[Stmt]:
    if depth > 8:
        raise ParseError("include nesting too deep")
    out: list[Stmt] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = _split_comment(raw)
        stripped = body.strip()
        if not stripped:
            continue
        indent = len(body) - len(body.lstrip())
        keyword = stripped.split(None, 1)[0]
        rest = stripped[len(keyword):]
        col0 = indent + len(keyword) + 1
        try:
            stmt = _parse_line(keyword, rest, lineno, col0)
        except ParseError as exc:
            if not exc.line:
                exc = ParseError(exc.message, lineno, exc.col or indent + 1)
            raise exc from None
        if isinstance(stmt, Include):
            sub_text, sub_dir = loader_factory(base_dir)(stmt.path)
            try:
                body_stmts = _parse_lines(sub_text, loader_factory, sub_dir, depth + 1)
            except ParseError as exc:
                raise ParseError(f"in {stmt.path}: {exc.message}", exc.line, exc.col) from None
            stmt = Include(stmt.path, tuple(body_stmts), line=lineno)
        out.append(stmt)
    return out


def parse(text: str, base_dir: Optional[Path | str] = None, name: str = "<script>",
          loader_factory=file_loader) -> PipelineScript:
    """Parse and scope-check a script.  ``include`` paths resolve against ``base_dir``."""
    base = Path(base_dir) if base_dir is not None else None
    script = PipelineScript(tuple(_parse_lines(text, loader_factory, base)), name)
    check_scope(script)
    return script


def _combo_names(combo: Combo):
    return [n for n, _ in combo]


def check_scope(script: PipelineScript) -> None:
    """Declared-before-use, single-rbd and ordering checks."""
    gens: set[str] = set()
    classes: set[str] = set()
    configs: set[str] = set()
    used_rbd: set[str] = set()
    started = False
    frozen = False

    def need_class(names, line, what):
        for nm in names:
            if nm not in gens and nm not in classes:
                raise ParseError(f"undeclared class {nm!r} in {what}", line, 1)

    def need_config(nm, line):
        if nm not in configs:
            raise ParseError(f"undeclared config {nm!r}", line, 1)

    def need_start(stmt):
        if not started:
            raise ParseError(f"{stmt.render().split()[0]} before start", stmt.line, 1)

    for s in script.flat():
        if isinstance(s, (Generator, Pair)):
            if frozen:
                raise ParseError("generators must be declared before other statements", s.line, 1)
            if isinstance(s, Generator):
                for nm in s.names:
                    if nm in gens or nm in classes:
                        raise ParseError(f"{nm!r} declared twice", s.line, 1)
                    gens.add(nm)
            else:
                for nm in (s.a, s.b):
                    if nm not in gens:
                        raise ParseError(f"undeclared generator {nm!r} in pair", s.line, 1)
            continue
        frozen = True
        if isinstance(s, ClassDecl):
            need_class(_combo_names(s.combo), s.line, f"class {s.name}")
            if s.name in gens or s.name in classes:
                raise ParseError(f"{s.name!r} declared twice", s.line, 1)
            classes.add(s.name)
        elif isinstance(s, ConfigDecl):
            for sph in s.spheres:
                need_class(_combo_names(sph), s.line, f"config {s.name}")
            if s.name in configs:
                raise ParseError(f"config {s.name!r} declared twice", s.line, 1)
            configs.add(s.name)
        elif isinstance(s, Start):
            if started:
                raise ParseError("start appears twice", s.line, 1)
            started = True
        elif isinstance(s, KnotSurgery):
            need_start(s)
            need_class(_combo_names(s.fiber), s.line, "knot_surgery")
        elif isinstance(s, Blowup):
            need_start(s)
            if s.name not in gens:
                raise ParseError(f"undeclared generator {s.name!r} in blowup", s.line, 1)
        elif isinstance(s, LinkConfigs):
            need_config(s.first, s.line)
            need_config(s.second, s.line)
            need_class(_combo_names(s.via), s.line, "link_configs")
        elif isinstance(s, Rbd):
            need_start(s)
            need_config(s.config, s.line)
            if s.config in used_rbd:
                raise ParseError(f"config {s.config!r} already blown down", s.line, 1)
            used_rbd.add(s.config)
        elif isinstance(s, (AssertLedger, AssertType, AssertPi1, AssertBasicClasses,
                            AssertSymmetric)):
            need_start(s)
        elif isinstance(s, AssertSW):
            need_start(s)
            need_class(_combo_names(s.combo), s.line, "assert_sw")
        elif isinstance(s, AssertEmbedding):
            need_config(s.config, s.line)
        elif isinstance(s, AssertDisjoint):
            need_config(s.first, s.line)
            need_config(s.second, s.line)
        elif isinstance(s, AssertSquare):
            need_class(_combo_names(s.combo), s.line, "assert_square")
        elif isinstance(s, AssertPair):
            need_class([s.a, s.b], s.line, "assert_pair")
