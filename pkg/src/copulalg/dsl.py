"""Expression language for copulas, families, and their products.

Grammar (LL(1), whitespace insignificant):

    expr   := "M" | "W" | "Pi" | "fgm(" num ")" | "straight(" num ")"
            | "shuffle(" numlist ";" intlist ";" intlist ")"
            | "grid(" path ")" | "t(" expr ")"
            | "star(" expr "," expr ")" | "starc(" expr "," family "," expr ")"
    family := "const(" expr ")" | "pw(" numlist ":" exprlist ")"
            | "fgmcurve(" ["poly" ":"] numlist ")"
    num    := decimal literal; lists are comma-separated
    path   := quoted string (bare paths without delimiters also accepted)

``pw`` cuts may be given interior-only (one fewer than members) or with
the 0 and 1 endpoints included. ``parse``/``parse_family`` produce an
AST; ``to_text`` prints the canonical form (quoted paths, interior-only
cuts, repr-exact numbers); ``build_copula``/``build_family`` construct
the numerical objects.

Syntax problems raise ``ParseError`` carrying a 1-based column; value
and arity problems found while building raise ``SemanticError``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .copulas import (
    CopulaError,
    ConstructionError,
    DomainError,
    FGMCopula,
    M,
    PI,
    ShuffleOfM,
    StraightShuffle,
    W,
    read_grid_csv,
)
from .families import ConstantFamily, FGMCurveFamily, PiecewiseConstantFamily
from .products import QuadratureConfig, star, star_c

__all__ = [
    "ParseError",
    "SemanticError",
    "parse",
    "parse_family",
    "to_text",
    "build_copula",
    "build_family",
    "Atom",
    "Fgm",
    "Straight",
    "Shuffle",
    "Grid",
    "Transpose",
    "Star",
    "StarC",
    "Const",
    "Pw",
    "FgmCurve",
]


class ParseError(CopulaError, ValueError):
    """Syntax error with a 1-based column and the expected tokens."""

    def __init__(self, column: int, expected, found: str):
        self.column = column
        self.expected = tuple(expected)
        self.found = found
        want = " or ".join(self.expected)
        super().__init__(f"column {column}: expected {want}, found {found}")


class SemanticError(CopulaError, ValueError):
    """A syntactically valid expression with invalid values or arity."""


# AST nodes; frozen tuples make equality and hashing structural.

@dataclass(frozen=True)
class Atom:
    name: str  # "M" | "W" | "Pi"


@dataclass(frozen=True)
class Fgm:
    theta: float


@dataclass(frozen=True)
class Straight:
    alpha: float


@dataclass(frozen=True)
class Shuffle:
    cuts: tuple  # interior cut points
    sigma: tuple
    flips: tuple


@dataclass(frozen=True)
class Grid:
    path: str


@dataclass(frozen=True)
class Transpose:
    child: object


@dataclass(frozen=True)
class Star:
    left: object
    right: object


@dataclass(frozen=True)
class StarC:
    left: object
    family: object
    right: object


@dataclass(frozen=True)
class Const:
    member: object


@dataclass(frozen=True)
class Pw:
    cuts: tuple  # as written; may include the 0/1 endpoints
    members: tuple


@dataclass(frozen=True)
class FgmCurve:
    coeffs: tuple


_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_BARE_PATH = re.compile(r"[^(),;:\"\s]+")


class _Scanner:
    """Cursor over the source text; tokens are pulled on demand."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def col(self) -> int:
        return self.pos + 1

    def at_end(self) -> bool:
        self._skip_ws()
        return self.pos >= len(self.text)

    def peek_char(self):
        self._skip_ws()
        if self.pos < len(self.text):
            return self.text[self.pos]
        return ""

    def describe_here(self) -> str:
        ch = self.peek_char()
        return f"{ch!r}" if ch else "end of input"

    def take(self, literal: str) -> bool:
        self._skip_ws()
        if self.text.startswith(literal, self.pos):
            self.pos += len(literal)
            return True
        return False

    def expect(self, literal: str, what: str | None = None):
        if not self.take(literal):
            raise ParseError(self.col(), (what or f"'{literal}'",),
                             self.describe_here())

    def ident(self):
        self._skip_ws()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            return None
        self.pos = m.end()
        return m.group()

    def number(self) -> float:
        self._skip_ws()
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            raise ParseError(self.col(), ("a number",), self.describe_here())
        self.pos = m.end()
        return float(m.group())

    def integer(self) -> int:
        col = self.col()
        x = self.number()
        if x != int(x):
            raise ParseError(col, ("an integer",), repr(x))
        return int(x)

    def path(self) -> str:
        self._skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == '"':
            end = self.text.find('"', self.pos + 1)
            if end < 0:
                raise ParseError(self.col(), ("a closing quote",), "end of input")
            out = self.text[self.pos + 1 : end]
            self.pos = end + 1
            return out
        m = _BARE_PATH.match(self.text, self.pos)
        if not m:
            raise ParseError(self.col(), ("a path",), self.describe_here())
        self.pos = m.end()
        return m.group()


_EXPR_HEADS = ("M", "W", "Pi", "fgm", "straight", "shuffle", "grid",
               "t", "star", "starc")
_FAMILY_HEADS = ("const", "pw", "fgmcurve")


def _num_list(sc: _Scanner):
    out = [sc.number()]
    while sc.take(","):
        out.append(sc.number())
    return tuple(out)


def _int_list(sc: _Scanner):
    out = [sc.integer()]
    while sc.take(","):
        out.append(sc.integer())
    return tuple(out)


def _parse_expr(sc: _Scanner):
    col = sc.col()
    head = sc.ident()
    if head is None:
        raise ParseError(col, _EXPR_HEADS, sc.describe_here())
    if head == "M":
        return Atom("M")
    if head == "W":
        return Atom("W")
    if head == "Pi":
        return Atom("Pi")
    if head == "fgm":
        sc.expect("(")
        theta = sc.number()
        sc.expect(")")
        return Fgm(theta)
    if head == "straight":
        sc.expect("(")
        alpha = sc.number()
        sc.expect(")")
        return Straight(alpha)
    if head == "shuffle":
        sc.expect("(")
        cuts = _num_list(sc)
        sc.expect(";")
        sigma = _int_list(sc)
        sc.expect(";")
        flips = _int_list(sc)
        sc.expect(")")
        return Shuffle(cuts, sigma, flips)
    if head == "grid":
        sc.expect("(")
        p = sc.path()
        sc.expect(")")
        return Grid(p)
    if head == "t":
        sc.expect("(")
        child = _parse_expr(sc)
        sc.expect(")")
        return Transpose(child)
    if head == "star":
        sc.expect("(")
        left = _parse_expr(sc)
        sc.expect(",")
        right = _parse_expr(sc)
        sc.expect(")")
        return Star(left, right)
    if head == "starc":
        sc.expect("(")
        left = _parse_expr(sc)
        sc.expect(",")
        family = _parse_family(sc)
        sc.expect(",")
        right = _parse_expr(sc)
        sc.expect(")")
        return StarC(left, family, right)
    raise ParseError(col, _EXPR_HEADS, repr(head))


def _parse_family(sc: _Scanner):
    col = sc.col()
    head = sc.ident()
    if head is None:
        raise ParseError(col, _FAMILY_HEADS, sc.describe_here())
    if head == "const":
        sc.expect("(")
        member = _parse_expr(sc)
        sc.expect(")")
        return Const(member)
    if head == "pw":
        sc.expect("(")
        cuts = _num_list(sc)
        sc.expect(":")
        members = [_parse_expr(sc)]
        while sc.take(","):
            members.append(_parse_expr(sc))
        sc.expect(")")
        return Pw(cuts, tuple(members))
    if head == "fgmcurve":
        sc.expect("(")
        save = sc.pos
        tag = sc.ident()
        if tag == "poly" and sc.take(":"):
            pass  # optional labeled form
        else:
            sc.pos = save
        coeffs = _num_list(sc)
        sc.expect(")")
        return FgmCurve(coeffs)
    raise ParseError(col, _FAMILY_HEADS, repr(head))


def _parse_top(text: str, entry):
    sc = _Scanner(text)
    node = entry(sc)
    if not sc.at_end():
        raise ParseError(sc.col(), ("end of input",), sc.describe_here())
    return node


def parse(text: str):
    """Parse a copula expression into its AST."""
    return _parse_top(text, _parse_expr)


def parse_family(text: str):
    """Parse a family expression into its AST."""
    return _parse_top(text, _parse_family)


def _fmt(x: float) -> str:
    return repr(float(x))


def to_text(node) -> str:
    """Canonical text of an AST node; parse(to_text(n)) == n."""
    if isinstance(node, Atom):
        return node.name
    if isinstance(node, Fgm):
        return f"fgm({_fmt(node.theta)})"
    if isinstance(node, Straight):
        return f"straight({_fmt(node.alpha)})"
    if isinstance(node, Shuffle):
        return "shuffle({}; {}; {})".format(
            ",".join(_fmt(c) for c in node.cuts),
            ",".join(str(int(s)) for s in node.sigma),
            ",".join(str(int(f)) for f in node.flips),
        )
    if isinstance(node, Grid):
        return f'grid("{node.path}")'
    if isinstance(node, Transpose):
        return f"t({to_text(node.child)})"
    if isinstance(node, Star):
        return f"star({to_text(node.left)}, {to_text(node.right)})"
    if isinstance(node, StarC):
        return "starc({}, {}, {})".format(
            to_text(node.left), to_text(node.family), to_text(node.right)
        )
    if isinstance(node, Const):
        return f"const({to_text(node.member)})"
    if isinstance(node, Pw):
        cuts = node.cuts
        # canonical form lists interior cuts only
        if len(cuts) == len(node.members) + 1:
            cuts = cuts[1:-1]
        return "pw({}: {})".format(
            ",".join(_fmt(c) for c in cuts),
            ", ".join(to_text(m) for m in node.members),
        )
    if isinstance(node, FgmCurve):
        return f"fgmcurve({','.join(_fmt(c) for c in node.coeffs)})"
    raise SemanticError(f"not an AST node: {node!r}")


def build_copula(node, q: QuadratureConfig | None = None,
                 fast_paths: bool = True):
    """Construct the copula an expression denotes.

    Products are built through the library product operations with the
    given quadrature settings. Value errors (parameter out of range,
    bad permutation, malformed grid file) surface as SemanticError.
    """
    qq = q if q is not None else QuadratureConfig()
    try:
        if isinstance(node, Atom):
            return {"M": M, "W": W, "Pi": PI}[node.name]
        if isinstance(node, Fgm):
            return FGMCopula(node.theta)
        if isinstance(node, Straight):
            return StraightShuffle(node.alpha)
        if isinstance(node, Shuffle):
            for f in node.flips:
                if f not in (0, 1):
                    raise ConstructionError(f"flip flags must be 0 or 1, got {f}")
            return ShuffleOfM((0.0,) + node.cuts + (1.0,), node.sigma,
                              tuple(bool(f) for f in node.flips))
        if isinstance(node, Grid):
            return read_grid_csv(node.path)
        if isinstance(node, Transpose):
            return build_copula(node.child, qq, fast_paths).transpose()
        if isinstance(node, Star):
            return star(
                build_copula(node.left, qq, fast_paths),
                build_copula(node.right, qq, fast_paths),
                qq, fast_paths=fast_paths,
            ).copula
        if isinstance(node, StarC):
            return star_c(
                build_copula(node.left, qq, fast_paths),
                build_family(node.family, qq, fast_paths),
                build_copula(node.right, qq, fast_paths),
                qq, fast_paths=fast_paths,
            ).copula
    except (ConstructionError, DomainError) as exc:
        raise SemanticError(str(exc)) from exc
    raise SemanticError(f"not a copula expression: {node!r}")


def build_family(node, q: QuadratureConfig | None = None,
                 fast_paths: bool = True):
    """Construct the copula family an expression denotes."""
    qq = q if q is not None else QuadratureConfig()
    try:
        if isinstance(node, Const):
            return ConstantFamily(build_copula(node.member, qq, fast_paths))
        if isinstance(node, Pw):
            members = tuple(
                build_copula(m, qq, fast_paths) for m in node.members
            )
            return PiecewiseConstantFamily(node.cuts, members)
        if isinstance(node, FgmCurve):
            return FGMCurveFamily(node.coeffs)
    except (ConstructionError, DomainError) as exc:
        raise SemanticError(str(exc)) from exc
    raise SemanticError(f"not a family expression: {node!r}")
