"""Scenario and topology files: exact line-oriented parsing and formatting.

The number grammar is bit-exact and round-trips: a rational is an optional
minus sign ('-' or the U+2212 character), an integer, and an optional
'/denominator'; a complex entry is a rational, optionally followed by a
sign, an unsigned rational and the suffix 'i'; a pure imaginary may be
written 'i', '-i' or like '2/3i'. Vectors are parenthesized
comma-separated complex entries. No floating point exists on either side
of the grammar.

Block keywords: DIM, OPERATOR <name>, EIGENVALUE <rational> ':' vectors,
STATE <name> vector, CLOSE on|off, QUERY <state> <operator> '{'
eigenvalues '}'. Blank lines and '#' comment lines are ignored. Topology
files use POINTS and OPEN lines instead.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import SieveLogicError
from .exact import QC, Vector, vector
from .heyting import FiniteTopology, make_topology
from .quantum import (
    OperatorCategory,
    SpectralOperator,
    State,
    build_operator_category,
    make_operator,
    make_state,
    NotInSpectrum,
)


class ParseError(SieveLogicError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class UnknownName(SieveLogicError):
    pass


_UNSIGNED = r"\d+(?:/\d+)?"
_RATIONAL = rf"-?{_UNSIGNED}"
_RATIONAL_RE = re.compile(rf"^{_RATIONAL}$")
_COMPLEX_FULL_RE = re.compile(rf"^({_RATIONAL})([+-])({_UNSIGNED})i$")
_IMAG_RE = re.compile(rf"^(-?)({_UNSIGNED})?i$")


def _normalize_minus(text: str) -> str:
    return text.replace("−", "-")


def parse_rational(text: str) -> Fraction:
    t = _normalize_minus(text.strip())
    if not _RATIONAL_RE.match(t):
        raise ValueError(f"not a rational: {text!r}")
    if "/" in t:
        num, den = t.split("/")
        if int(den) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den))
    return Fraction(int(t))


def parse_complex(text: str) -> QC:
    t = _normalize_minus(text.strip())
    if _RATIONAL_RE.match(t):
        return QC(parse_rational(t), Fraction(0))
    m = _COMPLEX_FULL_RE.match(t)
    if m:
        re_part = parse_rational(m.group(1))
        im_part = parse_rational(m.group(3))
        return QC(re_part, im_part if m.group(2) == "+" else -im_part)
    m = _IMAG_RE.match(t)
    if m:
        magnitude = parse_rational(m.group(2)) if m.group(2) else Fraction(1)
        return QC(Fraction(0), -magnitude if m.group(1) else magnitude)
    raise ValueError(f"not a complex entry: {text!r}")


def parse_vector(text: str) -> Vector:
    t = text.strip()
    if not (t.startswith("(") and t.endswith(")")):
        raise ValueError(f"vector must be parenthesized: {text!r}")
    inner = t[1:-1].strip()
    if not inner:
        raise ValueError("empty vector")
    return vector(parse_complex(part) for part in inner.split(","))


def format_rational(value: Fraction) -> str:
    return str(value)


def format_complex(value: QC) -> str:
    if not value.im:
        return format_rational(value.re)
    if not value.re:
        if value.im == 1:
            return "i"
        if value.im == -1:
            return "-i"
        return f"{format_rational(value.im)}i"
    sign = "+" if value.im > 0 else "-"
    return f"{format_rational(value.re)}{sign}{format_rational(abs(value.im))}i"


def format_vector(v: Vector) -> str:
    return "(" + ", ".join(format_complex(e) for e in v) + ")"


def format_delta(delta) -> str:
    return "{" + ",".join(format_rational(v) for v in sorted(delta)) + "}"


@dataclass
class OperatorDecl:
    name: str
    eigendata: list[tuple[Fraction, list[Vector]]] = field(default_factory=list)


@dataclass
class Query:
    state: str
    operator: str
    delta: tuple[Fraction, ...]


@dataclass
class Scenario:
    dimension: int
    operators: list[OperatorDecl]
    states: dict[str, Vector]
    close_under_questions: bool
    queries: list[Query]
    source: str = "<string>"


_VECTOR_GROUP_RE = re.compile(r"\([^()]*\)")


def _split_vectors(text: str, line_no: int, line: str) -> list[Vector]:
    groups = _VECTOR_GROUP_RE.findall(text)
    remainder = _VECTOR_GROUP_RE.sub("", text).replace(",", "").strip()
    if not groups or remainder:
        raise ParseError("expected parenthesized vectors", line_no, _column(line, text))
    try:
        return [parse_vector(g) for g in groups]
    except ValueError as exc:
        raise ParseError(str(exc), line_no, _column(line, text)) from None


def _column(line: str, token: str) -> int:
    idx = line.find(token.strip()[:1]) if token.strip() else -1
    return idx + 1 if idx >= 0 else 1


def _meaningful_lines(text: str):
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield line_no, line


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    dimension: int | None = None
    operators: list[OperatorDecl] = []
    states: dict[str, Vector] = {}
    close = False
    close_seen = False
    queries: list[Query] = []
    current: OperatorDecl | None = None

    for line_no, line in _meaningful_lines(text):
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword == "DIM":
            if dimension is not None:
                raise ParseError("duplicate DIM", line_no, 1)
            try:
                dimension = int(rest)
            except ValueError:
                raise ParseError(f"bad dimension {rest!r}", line_no, 5) from None
            if dimension <= 0:
                raise ParseError("dimension must be positive", line_no, 5)
        elif keyword == "OPERATOR":
            if dimension is None:
                raise ParseError("DIM must precede OPERATOR", line_no, 1)
            if not rest or " " in rest:
                raise ParseError("OPERATOR needs a single name", line_no, 10)
            if any(op.name == rest for op in operators):
                raise ParseError(f"duplicate operator name {rest!r}", line_no, 10)
            current = OperatorDecl(rest)
            operators.append(current)
        elif keyword == "EIGENVALUE":
            if current is None:
                raise ParseError("EIGENVALUE outside an OPERATOR block", line_no, 1)
            head, sep, tail = rest.partition(":")
            if not sep:
                raise ParseError("EIGENVALUE needs ': vectors'", line_no, 12)
            try:
                value = parse_rational(head)
            except ValueError as exc:
                raise ParseError(str(exc), line_no, _column(line, head)) from None
            if any(value == v for v, _ in current.eigendata):
                raise ParseError(
                    f"duplicate eigenvalue {format_rational(value)} in "
                    f"{current.name!r}", line_no, _column(line, head)
                )
            current.eigendata.append((value, _split_vectors(tail, line_no, line)))
        elif keyword == "STATE":
            name, _, vec_text = rest.partition(" ")
            if not name or not vec_text.strip():
                raise ParseError("STATE needs a name and a vector", line_no, 7)
            if name in states:
                raise ParseError(f"duplicate state name {name!r}", line_no, 7)
            (vec,) = _split_vectors(vec_text, line_no, line)
            states[name] = vec
        elif keyword == "CLOSE":
            if close_seen:
                raise ParseError("duplicate CLOSE", line_no, 1)
            if rest == "on":
                close = True
            elif rest == "off":
                close = False
            else:
                raise ParseError("CLOSE must be 'on' or 'off'", line_no, 7)
            close_seen = True
        elif keyword == "QUERY":
            m = re.match(r"^(\S+)\s+(\S+)\s+\{([^{}]*)\}$", rest)
            if not m:
                raise ParseError(
                    "QUERY needs '<state> <operator> {eigenvalues}'", line_no, 7
                )
            raw_vals = [p for p in re.split(r"[,\s]+", m.group(3).strip()) if p]
            if not raw_vals:
                raise ParseError("QUERY needs at least one eigenvalue", line_no, 7)
            try:
                vals = tuple(parse_rational(p) for p in raw_vals)
            except ValueError as exc:
                raise ParseError(str(exc), line_no, _column(line, m.group(3))) from None
            queries.append(Query(m.group(1), m.group(2), vals))
        else:
            raise ParseError(f"unknown keyword {keyword!r}", line_no, 1)

    if dimension is None:
        raise ParseError("missing DIM", 1, 1)
    if not operators:
        raise ParseError("scenario declares no operators", 1, 1)
    return Scenario(dimension, operators, states, close, queries, source)


def parse_topology(text: str, source: str = "<string>") -> FiniteTopology:
    points: list[str] | None = None
    opens: list[list[str]] = []
    for line_no, line in _meaningful_lines(text):
        keyword, _, rest = line.partition(" ")
        if keyword == "POINTS":
            if points is not None:
                raise ParseError("duplicate POINTS", line_no, 1)
            points = rest.split()
            if len(set(points)) != len(points):
                raise ParseError("duplicate point names", line_no, 8)
        elif keyword == "OPEN":
            if points is None:
                raise ParseError("POINTS must precede OPEN", line_no, 1)
            opens.append(rest.split())
        else:
            raise ParseError(f"unknown keyword {keyword!r}", line_no, 1)
    if points is None:
        raise ParseError("missing POINTS", 1, 1)
    return make_topology(points, opens)


def looks_like_topology(text: str) -> bool:
    for _, line in _meaningful_lines(text):
        return line.split(" ", 1)[0] == "POINTS"
    return False


def scenario_operators(scn: Scenario) -> list[SpectralOperator]:
    """Build and fully validate every declared operator."""
    return [
        make_operator(decl.name, scn.dimension, decl.eigendata)
        for decl in scn.operators
    ]


def scenario_states(scn: Scenario) -> dict[str, State]:
    out = {}
    for name, vec in scn.states.items():
        if len(vec) != scn.dimension:
            raise SieveLogicError(
                f"state {name!r} has length {len(vec)}, expected {scn.dimension}"
            )
        out[name] = make_state(vec)
    return out


def validate_scenario(scn: Scenario) -> None:
    """Full reference and invariant validation beyond the grammar."""
    ops = {op.name: op for op in scenario_operators(scn)}
    states = scenario_states(scn)
    for q in scn.queries:
        if q.state not in states:
            raise UnknownName(f"query names unknown state {q.state!r}")
        if q.operator not in ops:
            raise UnknownName(f"query names unknown operator {q.operator!r}")
        spectrum = set(ops[q.operator].spectrum)
        missing = [v for v in q.delta if v not in spectrum]
        if missing:
            raise NotInSpectrum(
                f"query eigenvalues {sorted(missing)} not in the spectrum "
                f"of {q.operator!r}"
            )


def build_scenario_category(scn: Scenario) -> OperatorCategory:
    return build_operator_category(
        scenario_operators(scn), close_under_questions=scn.close_under_questions
    )


def bundled_fixture(name: str) -> Path:
    """Path of a fixture file shipped with the package."""
    path = Path(__file__).resolve().parent / "fixtures" / name
    if not path.exists():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return path
