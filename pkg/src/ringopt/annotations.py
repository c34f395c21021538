"""Reading ``ring_prop`` / ``math_exp`` pragmas out of C-like source.

The C side is handled shallowly: comments and string/char literals are
skipped, preprocessor lines are recognised at line start, and an annotated
function is a header followed by a brace-matched body.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import List, Tuple

from .errors import (
    DuplicatePragma,
    EmptyExpression,
    ExpressionSyntaxError,
    InputError,
    MalformedRingProp,
    NonPolynomial,
    OrphanPragma,
    UnbalancedBraces,
    UnsupportedCarrier,
    UnsupportedDegree,
    VariableInExponent,
    VariableSelectionError,
)
from .expr import (
    INTEGER_RING,
    MAX_DEGREE,
    CoefficientAtom,
    Expression,
    IntegerLiteral,
    Negation,
    Power,
    Product,
    RingSpec,
    Sum,
    Variable,
    walk,
)

_RING_PROP = re.compile(r"\s*#\s*pragma\s+ring_prop\b")
_MATH_EXP = re.compile(r"\s*#\s*pragma\s+math_exp\b")
_PRAGMA_KIND = re.compile(r"#\s*pragma\s+(ring_prop|math_exp)\b")

_INT_WORDS = {"signed", "unsigned", "short", "long", "int", "char"}
_SIZED_INT = re.compile(r"u?int(8|16|32|64)_t$|u?int_(fast|least)(8|16|32|64)_t$|u?intmax_t$|size_t$")


# -- ring_prop --------------------------------------------------------------

def _check_carrier(carrier: str, offset: int) -> None:
    words = carrier.split()
    if not words:
        raise MalformedRingProp("missing carrier type after the operator tuple", offset)
    if len(words) == 1 and _SIZED_INT.match(words[0]):
        return
    if all(w in _INT_WORDS for w in words):
        return
    raise UnsupportedCarrier(f"carrier {carrier!r} is not an integer type", offset)


def parse_ring_prop(text: str) -> RingSpec:
    m = _RING_PROP.match(text)
    if not m:
        raise MalformedRingProp("expected '#pragma ring_prop'", 0)
    rest = text[m.end():]
    base = m.end()
    open_ = rest.find("(")
    if open_ < 0 or rest[:open_].strip():
        raise MalformedRingProp("expected '(' after ring_prop", base)
    close = rest.find(")", open_)
    if close < 0 or "(" in rest[open_ + 1:close]:
        raise MalformedRingProp("unbalanced parentheses in ring_prop", base + open_)
    fields = [f.strip() for f in rest[open_ + 1:close].split(",")]
    if len(fields) != 5 or not all(fields):
        raise MalformedRingProp(
            f"ring_prop takes five entries (add, zero, neg, mul, one), got {len(fields)}",
            base + open_,
        )
    carrier = " ".join(rest[close + 1:].split())
    if ")" in carrier or "(" in carrier:
        raise MalformedRingProp("unbalanced parentheses in ring_prop", base + close)
    _check_carrier(carrier, base + close + 1)
    add, zero, neg, mul, one = fields
    ring = RingSpec(add, zero, neg, mul, one, carrier)
    if (add, zero, neg, mul, one) != (
        INTEGER_RING.add_op,
        INTEGER_RING.add_identity,
        INTEGER_RING.add_inverse,
        INTEGER_RING.mul_op,
        INTEGER_RING.mul_identity,
    ):
        # Integer carriers only form the ring (+, 0, -, *, 1); any other
        # assignment would license rewrites that C arithmetic does not obey.
        raise MalformedRingProp(
            f"integer carrier {carrier!r} only supports the ring (+, 0, -, *, 1)", base + open_
        )
    return ring


# -- math_exp ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<name>[A-Za-z_]\w*)|(?P<op>\S))")


def _tokenize(text: str, base: int):
    pos = 0
    toks = []
    while True:
        m = _TOKEN.match(text, pos)
        if not m:
            break
        start = base + m.start(m.lastindex)
        if m.group("num") is not None:
            toks.append(("num", m.group("num"), start))
        elif m.group("name") is not None:
            toks.append(("name", m.group("name"), start))
        else:
            op = m.group("op")
            if op in "/%":
                raise NonPolynomial(f"operator {op!r} has no meaning in a ring", start)
            if op not in "+-*^()":
                raise ExpressionSyntaxError(f"unexpected character {op!r}", start)
            toks.append(("op", op, start))
        pos = m.end()
    toks.append(("end", "", base + len(text)))
    return toks


class _Parser:
    # Precedence, loosest first: binary + -, *, unary -, ^ (right assoc).

    def __init__(self, tokens, variable):
        self.toks = tokens
        self.i = 0
        self.variable = variable

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, value):
        t = self.take()
        if t[1] != value or t[0] == "end":
            raise ExpressionSyntaxError(f"expected {value!r}, found {t[1] or 'end of input'!r}", t[2])
        return t

    def parse(self) -> Expression:
        if self.peek()[0] == "end":
            raise EmptyExpression("empty expression", self.peek()[2])
        e = self.additive()
        t = self.peek()
        if t[0] != "end":
            raise ExpressionSyntaxError(f"unexpected {t[1]!r}", t[2])
        return e

    def additive(self):
        left = self.multiplicative()
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            right = self.multiplicative()
            left = Sum(left, right if op == "+" else Negation(right))
        return left

    def multiplicative(self):
        left = self.unary()
        while self.peek()[0] == "op" and self.peek()[1] == "*":
            self.take()
            left = Product(left, self.unary())
        return left

    def unary(self):
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            return Negation(self.unary())
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            tok = self.take()
            exponent = self.unary()
            return Power(base, self._fold_exponent(exponent, tok[2]))
        return base

    def primary(self):
        kind, value, pos = self.take()
        if kind == "num":
            return IntegerLiteral(int(value))
        if kind == "name":
            return Variable(value) if value == self.variable else CoefficientAtom(value)
        if kind == "op" and value == "(":
            if self.peek()[0] == "op" and self.peek()[1] == ")":
                raise EmptyExpression("empty parentheses", pos)
            e = self.additive()
            self.expect(")")
            return e
        raise ExpressionSyntaxError(f"unexpected {value or 'end of input'!r}", pos)

    def _fold_exponent(self, e: Expression, pos: int) -> int:
        for node in walk(e):
            if isinstance(node, Variable):
                raise VariableInExponent(f"variable {node.name!r} in exponent", pos)
            if isinstance(node, CoefficientAtom):
                raise NonPolynomial(f"symbolic exponent {node.name!r}", pos)
        value = _eval_int(e)
        if value < 0:
            raise NonPolynomial("negative exponent", pos)
        if value > MAX_DEGREE:
            raise UnsupportedDegree(f"exponent {value} exceeds {MAX_DEGREE}", pos)
        return value


def _eval_int(e: Expression) -> int:
    if isinstance(e, IntegerLiteral):
        return e.value
    if isinstance(e, Sum):
        return _eval_int(e.left) + _eval_int(e.right)
    if isinstance(e, Product):
        return _eval_int(e.left) * _eval_int(e.right)
    if isinstance(e, Negation):
        return -_eval_int(e.child)
    if isinstance(e, Power):
        return _eval_int(e.base) ** e.exponent
    raise TypeError(e)


def parse_expression(text: str, variable: str, offset: int = 0) -> Expression:
    """Parse a bare ring expression; identifiers other than ``variable``
    become coefficient atoms."""
    return _Parser(_tokenize(text, offset), variable).parse()


def parse_math_exp(text: str, variable: str, ring: RingSpec = INTEGER_RING) -> Expression:
    m = _MATH_EXP.match(text)
    if not m:
        raise ExpressionSyntaxError("expected '#pragma math_exp'", 0)
    return parse_expression(text[m.end():], variable, m.end())


# -- source scanning --------------------------------------------------------

@dataclass
class AnnotatedFunction:
    ring: RingSpec
    math: Expression
    math_text: str
    ring_text: str
    function_name: str
    return_type: str
    parameters: List[Tuple[str, str]]
    body_span: Tuple[int, int]
    variable: str
    body_byte_span: Tuple[int, int] = field(default=(0, 0), compare=False)

    def signature(self) -> str:
        params = ", ".join(f"{t} {n}" for t, n in self.parameters) or "void"
        return f"{self.return_type} {self.function_name}({params})"


def _line_col(text: str, offset: int) -> Tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _skip_literal(text: str, pos: int) -> int:
    quote = text[pos]
    i = pos + 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\\":
            i += 2
            continue
        if c == quote or c == "\n":
            return i + 1
        i += 1
    return n


def _skip_comment(text: str, pos: int) -> int:
    """Return the end of a comment starting at ``pos`` or ``pos`` itself."""
    if text.startswith("//", pos):
        end = text.find("\n", pos)
        return len(text) if end < 0 else end
    if text.startswith("/*", pos):
        end = text.find("*/", pos + 2)
        if end < 0:
            raise UnbalancedBraces("unterminated comment", pos)
        return end + 2
    return pos


def _skip_trivia(text: str, pos: int) -> int:
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        end = _skip_comment(text, pos)
        if end == pos:
            break
        pos = end
    return pos


def _at_line_start(text: str, pos: int) -> bool:
    start = text.rfind("\n", 0, pos) + 1
    return not text[start:pos].strip()


def _directive_end(text: str, pos: int) -> int:
    i = pos
    n = len(text)
    while i < n:
        if text[i] == "\n":
            prev = text[:i].rstrip("\r")[-1:]
            if prev == "\\":
                i += 1
                continue
            return i
        if text.startswith("/*", i):
            i = _skip_comment(text, i)
            continue
        if text.startswith("//", i):
            return _skip_comment(text, i)
        i += 1
    return n


def _strip_comments(text: str) -> str:
    """Replace comments with spaces and drop line continuations, keeping length."""
    out = []
    i = 0
    n = len(text)
    while i < n:
        end = _skip_comment(text, i)
        if end > i:
            out.append(" " * (end - i))
            i = end
        elif text[i] == "\\" and text[i + 1:i + 2] in ("\n", "\r"):
            out.append(" ")
            i += 1
        else:
            out.append(text[i])
            i += 1
    return "".join(out)


_HEADER = re.compile(
    r"^(?P<ret>(?:[A-Za-z_]\w*[\s\*]+)+?)(?P<name>[A-Za-z_]\w*)\s*\((?P<params>[^()]*)\)$"
)


def _parse_header(header: str, pos: int):
    flat = " ".join(header.split())
    m = _HEADER.match(flat)
    if not m:
        return None
    ret = " ".join(m.group("ret").replace("*", " * ").split()).replace(" *", "*")
    params: List[Tuple[str, str]] = []
    raw = m.group("params").strip()
    if raw and raw != "void":
        for p in raw.split(","):
            p = p.strip()
            pm = re.match(r"^(?P<type>.*?[\s\*])(?P<name>[A-Za-z_]\w*)$", p)
            if not pm or not pm.group("type").strip():
                raise OrphanPragma(f"cannot read parameter {p!r} of annotated function", pos)
            ptype = " ".join(pm.group("type").replace("*", " * ").split()).replace(" *", "*")
            params.append((ptype, pm.group("name")))
    return ret, m.group("name"), params


def _match_brace(text: str, open_pos: int) -> int:
    depth = 0
    i = open_pos
    n = len(text)
    while i < n:
        c = text[i]
        if c in "\"'":
            i = _skip_literal(text, i)
            continue
        end = _skip_comment(text, i)
        if end > i:
            i = end
            continue
        if c == "{":
            depth += 1
        elif c == "}":
            depth -= 1
            if depth == 0:
                return i
        i += 1
    raise UnbalancedBraces("function body is missing its closing brace", open_pos)


def _choose_variable(params, math_text: str, pos: int) -> str:
    if not params:
        raise VariableSelectionError("annotated function has no parameter to act as the variable", pos)
    if len(params) == 1:
        return params[0][1]
    names = set(re.findall(r"[A-Za-z_]\w*", math_text))
    used = [n for _, n in params if n in names]
    if len(used) == 1:
        return used[0]
    if not used:
        raise VariableSelectionError("no function parameter appears in math_exp", pos)
    raise VariableSelectionError(
        f"math_exp mentions several parameters ({', '.join(used)}); only univariate "
        "polynomials are supported",
        pos,
    )


def _read_function(text: str, pos: int, pending: dict) -> Tuple[AnnotatedFunction, int]:
    i = pos
    n = len(text)
    while i < n:
        c = text[i]
        if c in "\"'":
            raise OrphanPragma("pragmas are not followed by a function definition", _pending_pos(pending))
        end = _skip_comment(text, i)
        if end > i:
            i = end
            continue
        if c in "{;#":
            break
        i += 1
    if i >= n or text[i] != "{":
        raise OrphanPragma("pragmas are not followed by a function definition", _pending_pos(pending))
    parsed = _parse_header(_strip_comments(text[pos:i]), pos)
    if parsed is None:
        raise OrphanPragma("pragmas are not followed by a function definition", _pending_pos(pending))
    ret, name, params = parsed
    close = _match_brace(text, i)

    ring_text, ring_pos = pending["ring_prop"]
    math_text, math_pos = pending["math_exp"]
    ring = _offset_errors(parse_ring_prop, ring_pos, _strip_comments(ring_text))
    clean_math = _strip_comments(math_text)
    variable = _choose_variable(params, clean_math, math_pos)
    math = _offset_errors(parse_math_exp, math_pos, clean_math, variable, ring)
    fn = AnnotatedFunction(
        ring=ring,
        math=math,
        math_text=math_text,
        ring_text=ring_text,
        function_name=name,
        return_type=ret,
        parameters=params,
        body_span=(i + 1, close),
        variable=variable,
    )
    return fn, close + 1


def _pending_pos(pending: dict) -> int:
    return min(p for _, p in pending.values())


def _offset_errors(fn, base, *args):
    try:
        return fn(*args)
    except InputError as err:
        err.offset = base + (err.offset or 0)
        raise


def scan_source(file_text: str) -> List[AnnotatedFunction]:
    """Find every function carrying both pragmas.

    Errors carry ``line``/``column`` of the offending text.  Span offsets are
    character offsets into ``file_text``; ``body_byte_span`` gives the same
    range in UTF-8 bytes.
    """
    try:
        found = _scan(file_text)
    except InputError as err:
        if err.offset is not None and err.line is None:
            err.located(*_line_col(file_text, err.offset))
        raise
    for fn in found:
        a, b = fn.body_span
        start = len(file_text[:a].encode("utf-8"))
        fn.body_byte_span = (start, start + len(file_text[a:b].encode("utf-8")))
    return found


def _scan(text: str) -> List[AnnotatedFunction]:
    out: List[AnnotatedFunction] = []
    pending: dict = {}
    pos = 0
    n = len(text)
    while True:
        pos = _skip_trivia(text, pos)
        if pos >= n:
            break
        if text[pos] == "#" and _at_line_start(text, pos):
            end = _directive_end(text, pos)
            line = text[pos:end]
            m = _PRAGMA_KIND.match(line)
            if m:
                kind = m.group(1)
                if kind in pending:
                    raise DuplicatePragma(f"second '{kind}' pragma before a function", pos)
                pending[kind] = (line, pos)
            elif pending:
                raise OrphanPragma("pragmas are not followed by a function definition", _pending_pos(pending))
            pos = end
            continue
        if pending:
            if len(pending) < 2:
                missing = "ring_prop" if "math_exp" in pending else "math_exp"
                raise OrphanPragma(f"pragma without its '{missing}' partner", _pending_pos(pending))
            fn, pos = _read_function(text, pos, pending)
            out.append(fn)
            pending = {}
            continue
        if text[pos] in "\"'":
            pos = _skip_literal(text, pos)
        else:
            pos += 1
    if pending:
        raise OrphanPragma("pragmas at end of file are not followed by a function", _pending_pos(pending))
    return out

