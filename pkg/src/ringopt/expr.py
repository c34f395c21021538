"""Ring expressions, ring specifications and canonical polynomial form."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterator, List, Tuple, Union

from .errors import (
    EmptyExpression,
    MalformedRingProp,
    NonPolynomial,
    UnsupportedDegree,
)

# Guard against pathological inputs such as ``x^100000``.
MAX_DEGREE = 4096


@dataclass(frozen=True)
class RingSpec:
    add_op: str = "+"
    add_identity: str = "0"
    add_inverse: str = "-"
    mul_op: str = "*"
    mul_identity: str = "1"
    carrier: str = "int"

    def __post_init__(self):
        if self.add_op == self.mul_op:
            raise MalformedRingProp("addition and multiplication must be distinct operators")
        if self.add_identity == self.mul_identity:
            raise MalformedRingProp("additive and multiplicative identities must differ")

    def pragma(self) -> str:
        ops = ", ".join(
            (self.add_op, self.add_identity, self.add_inverse, self.mul_op, self.mul_identity)
        )
        return f"#pragma ring_prop ({ops}) {self.carrier}"


INTEGER_RING = RingSpec()


# -- expression AST ---------------------------------------------------------

@dataclass(frozen=True)
class Variable:
    name: str


@dataclass(frozen=True)
class CoefficientAtom:
    name: str


@dataclass(frozen=True)
class IntegerLiteral:
    value: int

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("integer literals are non-negative; use Negation")


@dataclass(frozen=True)
class Sum:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Product:
    left: "Expression"
    right: "Expression"


@dataclass(frozen=True)
class Negation:
    child: "Expression"


@dataclass(frozen=True)
class Power:
    base: "Expression"
    exponent: int

    def __post_init__(self):
        if self.exponent < 0:
            raise NonPolynomial("negative exponent")


Expression = Union[Variable, CoefficientAtom, IntegerLiteral, Sum, Product, Negation, Power]

ZERO = IntegerLiteral(0)
ONE = IntegerLiteral(1)


def walk(expr: Expression) -> Iterator[Expression]:
    stack = [expr]
    while stack:
        e = stack.pop()
        yield e
        if isinstance(e, (Sum, Product)):
            stack.append(e.right)
            stack.append(e.left)
        elif isinstance(e, Negation):
            stack.append(e.child)
        elif isinstance(e, Power):
            stack.append(e.base)


def atoms(expr: Expression) -> List[str]:
    """Coefficient atom names in first-appearance order."""
    seen = {}
    for e in walk(expr):
        if isinstance(e, CoefficientAtom):
            seen.setdefault(e.name, None)
    return list(seen)


def variables(expr: Expression) -> List[str]:
    seen = {}
    for e in walk(expr):
        if isinstance(e, Variable):
            seen.setdefault(e.name, None)
    return list(seen)


def is_constant(expr: Expression) -> bool:
    return not any(isinstance(e, Variable) for e in walk(expr))


# -- printing ---------------------------------------------------------------

_PREC = {Sum: 1, Product: 2, Negation: 3, Power: 4}


def _prec(e):
    return _PREC.get(type(e), 5)


def format_expression(expr: Expression) -> str:
    """Render with the minimum parentheses needed to re-parse to the same tree.

    ``Sum(a, Negation(b))`` renders as ``a - b``, which is how the parser
    reads binary minus.
    """
    if isinstance(expr, (Variable, CoefficientAtom)):
        return expr.name
    if isinstance(expr, IntegerLiteral):
        return str(expr.value)
    if isinstance(expr, Sum):
        left = format_expression(expr.left)
        if isinstance(expr.right, Negation):
            r = expr.right.child
            right = format_expression(r)
            if isinstance(r, Sum):
                right = f"({right})"
            return f"{left} - {right}"
        right = format_expression(expr.right)
        if isinstance(expr.right, Sum):
            right = f"({right})"
        return f"{left} + {right}"
    if isinstance(expr, Product):
        left = format_expression(expr.left)
        if isinstance(expr.left, Sum):
            left = f"({left})"
        right = format_expression(expr.right)
        if isinstance(expr.right, (Sum, Product, Negation)):
            right = f"({right})"
        return f"{left}*{right}"
    if isinstance(expr, Negation):
        child = format_expression(expr.child)
        if _prec(expr.child) < _PREC[Negation]:
            child = f"({child})"
        return f"-{child}"
    if isinstance(expr, Power):
        base = format_expression(expr.base)
        if _prec(expr.base) <= _PREC[Power]:
            base = f"({base})"
        return f"{base}^{expr.exponent}"
    raise TypeError(f"not an expression: {expr!r}")


def math_exp_pragma(expr: Expression) -> str:
    return f"#pragma math_exp ({format_expression(expr)})"


# -- canonical form ---------------------------------------------------------

@dataclass(frozen=True)
class Polynomial:
    variable: str
    terms: Tuple[Expression, ...]

    def __post_init__(self):
        if not self.terms:
            raise EmptyExpression("polynomial without terms")
        if len(self.terms) > 1 and self.terms[-1] == ZERO:
            raise ValueError("leading coefficient must not be the literal 0")

    @property
    def degree(self) -> int:
        return len(self.terms) - 1

    def coefficient_names(self) -> List[str]:
        seen = {}
        for t in self.terms:
            for a in atoms(t):
                seen.setdefault(a, None)
        return list(seen)

    def to_expression(self) -> Expression:
        """Re-expand as ``c0 + c1*x + c2*x^2 + ...`` skipping zero terms."""
        x = Variable(self.variable)
        out = None
        for i, c in enumerate(self.terms):
            if c == ZERO:
                continue
            if i == 0:
                term = c
            else:
                power = x if i == 1 else Power(x, i)
                term = power if c == ONE else Product(c, power)
            out = term if out is None else Sum(out, term)
        return ZERO if out is None else out


def degree(poly: Polynomial) -> int:
    return poly.degree


# A coefficient is a sum of monomials; a monomial is an exact integer times a
# multiset of atoms.  Keyed by the sorted atom tuple so A*B and B*A combine,
# while the first-seen atom order is kept for display.
_Monomials = Dict[Tuple[str, ...], List]          # key -> [int coefficient, display atoms]
_Poly = Dict[int, _Monomials]                      # exponent -> monomials


def _const(c: int, atom_names: Tuple[str, ...] = ()) -> _Poly:
    if c == 0:
        return {}
    return {0: {tuple(sorted(atom_names)): [c, atom_names]}}


def _add(p: _Poly, q: _Poly) -> _Poly:
    out: _Poly = {}
    for src in (p, q):
        for e, monos in src.items():
            dst = out.setdefault(e, {})
            for key, (c, disp) in monos.items():
                if key in dst:
                    dst[key][0] += c
                else:
                    dst[key] = [c, disp]
    return _prune(out)


def _prune(p: _Poly) -> _Poly:
    out = {}
    for e, monos in p.items():
        kept = {k: v for k, v in monos.items() if v[0] != 0}
        if kept:
            out[e] = kept
    return out


def _neg(p: _Poly) -> _Poly:
    return {e: {k: [-c, d] for k, (c, d) in monos.items()} for e, monos in p.items()}


def _mul(p: _Poly, q: _Poly) -> _Poly:
    out: _Poly = {}
    for e1, m1 in p.items():
        for e2, m2 in q.items():
            e = e1 + e2
            if e > MAX_DEGREE:
                raise UnsupportedDegree(f"degree exceeds {MAX_DEGREE}")
            dst = out.setdefault(e, {})
            for k1, (c1, d1) in m1.items():
                for k2, (c2, d2) in m2.items():
                    key = tuple(sorted(k1 + k2))
                    if key in dst:
                        dst[key][0] += c1 * c2
                    else:
                        dst[key] = [c1 * c2, d1 + d2]
    return _prune(out)


def _pow(p: _Poly, k: int) -> _Poly:
    if k > MAX_DEGREE:
        raise UnsupportedDegree(f"exponent {k} exceeds {MAX_DEGREE}")
    out = _const(1)
    for _ in range(k):
        out = _mul(out, p)
    return out


def _expand(expr: Expression, variable: str) -> _Poly:
    if isinstance(expr, Variable):
        if expr.name != variable:
            raise NonPolynomial(f"unexpected second variable {expr.name!r}")
        return {1: {(): [1, ()]}}
    if isinstance(expr, CoefficientAtom):
        return _const(1, (expr.name,))
    if isinstance(expr, IntegerLiteral):
        return _const(expr.value)
    if isinstance(expr, Sum):
        return _add(_expand(expr.left, variable), _expand(expr.right, variable))
    if isinstance(expr, Product):
        return _mul(_expand(expr.left, variable), _expand(expr.right, variable))
    if isinstance(expr, Negation):
        return _neg(_expand(expr.child, variable))
    if isinstance(expr, Power):
        return _pow(_expand(expr.base, variable), expr.exponent)
    raise NonPolynomial(f"unsupported expression node {type(expr).__name__}")


def _monomial_expr(c: int, disp: Tuple[str, ...]) -> Expression:
    counts: Dict[str, int] = {}
    for a in disp:
        counts[a] = counts.get(a, 0) + 1
    factors: List[Expression] = []
    if abs(c) != 1 or not counts:
        factors.append(IntegerLiteral(abs(c)))
    for name, k in counts.items():
        atom = CoefficientAtom(name)
        factors.append(atom if k == 1 else Power(atom, k))
    e = factors[0]
    for f in factors[1:]:
        e = Product(e, f)
    return Negation(e) if c < 0 else e


def _coefficient_expr(monos: _Monomials) -> Expression:
    out = None
    for c, disp in monos.values():
        if out is None:
            out = _monomial_expr(c, disp)
        elif c < 0:
            out = Sum(out, Negation(_monomial_expr(-c, disp)))
        else:
            out = Sum(out, _monomial_expr(c, disp))
    return ZERO if out is None else out


def normalize(expr: Expression, ring: RingSpec = INTEGER_RING, variable: str = "x") -> Polynomial:
    """Expand ``expr`` by distributivity and collect like powers of ``variable``.

    Coefficients come back as variable-free expressions: a sum of monomials in
    order of first appearance, integer literals folded exactly.
    """
    if expr is None:
        raise EmptyExpression("empty expression")
    expanded = _expand(expr, variable)
    if not expanded:
        return Polynomial(variable, (ZERO,))
    n = max(expanded)
    terms = tuple(_coefficient_expr(expanded.get(i, {})) for i in range(n + 1))
    return Polynomial(variable, terms)
