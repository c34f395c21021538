"""Exact evaluation over w-bit wrapping integers, and plan equivalence checks.

Evaluators accept plain ints or numpy ``uint64`` arrays; arrays evaluate a
whole batch of bindings at once.  Reducing mod 2^64 and then masking to w
bits is exact because 2^w divides 2^64.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Union

import numpy as np

from .errors import DomainTooLarge, UnboundName
from .expr import (
    CoefficientAtom,
    Expression,
    IntegerLiteral,
    Negation,
    Polynomial,
    Power,
    Product,
    Sum,
    Variable,
)
from .schemes import Add, Const, EvalDag, Input

WIDTHS = (8, 16, 32, 64)
EXHAUSTIVE_CAP = 1 << 24

Value = Union[int, np.ndarray]


def _mask(width: int) -> int:
    if width not in WIDTHS:
        raise ValueError(f"width must be one of {WIDTHS}, got {width}")
    return (1 << width) - 1


@dataclass
class Binding:
    variable_value: int
    coefficient_values: Dict[str, int] = field(default_factory=dict)
    width: int = 32
    variable: str = "x"

    def __post_init__(self):
        m = _mask(self.width)
        self.variable_value &= m
        self.coefficient_values = {k: v & m for k, v in self.coefficient_values.items()}

    def env(self) -> Dict[str, int]:
        env = dict(self.coefficient_values)
        env[self.variable] = self.variable_value
        return env

    def to_dict(self) -> dict:
        d = {self.variable: self.variable_value}
        d.update(sorted(self.coefficient_values.items()))
        return d


def _lookup(env: Mapping[str, Value], name: str) -> Value:
    try:
        return env[name]
    except KeyError:
        raise UnboundName(f"no value bound for {name!r}") from None


def _wrap_pow(base: Value, k: int, mask: int) -> Value:
    result: Value = 1
    while k:
        if k & 1:
            result = (result * base) & mask
        base = (base * base) & mask
        k >>= 1
    return result


def eval_expr(expr: Expression, env: Mapping[str, Value], width: int) -> Value:
    """Evaluate an expression tree (variable included) with wrapping ops."""
    mask = _mask(width)

    def ev(e):
        if isinstance(e, (Variable, CoefficientAtom)):
            return _lookup(env, e.name) & mask
        if isinstance(e, IntegerLiteral):
            return e.value & mask
        if isinstance(e, Sum):
            return (ev(e.left) + ev(e.right)) & mask
        if isinstance(e, Product):
            return (ev(e.left) * ev(e.right)) & mask
        if isinstance(e, Negation):
            return (~ev(e.child) + 1) & mask
        if isinstance(e, Power):
            return _wrap_pow(ev(e.base), e.exponent, mask)
        raise TypeError(f"not an expression: {e!r}")

    return ev(expr)


def _eval_dag_env(dag: EvalDag, env: Mapping[str, Value], width: int) -> Value:
    mask = _mask(width)
    vals: List[Value] = []
    for n in dag.nodes:
        if isinstance(n, Input):
            vals.append(_lookup(env, n.name) & mask)
        elif isinstance(n, Const):
            vals.append(eval_expr(n.value, env, width))
        elif isinstance(n, Add):
            vals.append((vals[n.left] + vals[n.right]) & mask)
        else:
            vals.append((vals[n.left] * vals[n.right]) & mask)
    return vals[dag.root]


def _eval_poly_env(poly: Polynomial, env: Mapping[str, Value], width: int) -> Value:
    # Independent of every plan: sum of c_i * x^i with powers taken directly.
    mask = _mask(width)
    x = _lookup(env, poly.variable) & mask
    total: Value = 0
    for i, c in enumerate(poly.terms):
        if isinstance(x, np.ndarray):
            p = np.power(x, np.uint64(i))
        else:
            p = pow(x, i, mask + 1)
        total = (total + eval_expr(c, env, width) * p) & mask
    return total


def eval_dag(dag: EvalDag, b: Binding) -> int:
    return int(_eval_dag_env(dag, b.env(), b.width))


def eval_poly_reference(poly: Polynomial, b: Binding) -> int:
    env = b.env()
    env.setdefault(poly.variable, b.variable_value)
    return int(_eval_poly_env(poly, env, b.width))


# -- equivalence ------------------------------------------------------------

@dataclass(frozen=True)
class Exhaustive:
    """Every value of the variable, crossed with ``draws`` random coefficient
    assignments.  ``full=True`` enumerates the coefficients too."""

    draws: int = 32
    seed: int = 0
    full: bool = False

    @property
    def name(self) -> str:
        return "exhaustive" if self.full else "exhaustive-variable"


@dataclass(frozen=True)
class Sampled:
    count: int = 10000
    seed: int = 0

    name = "sampled"


@dataclass
class VerificationReport:
    scheme: str
    width: int
    mode: str
    seed: Optional[int]
    points_checked: int
    passed: bool
    counterexample: Optional[Binding] = None
    expected: Optional[int] = None
    actual: Optional[int] = None

    def to_dict(self) -> dict:
        d = {
            "scheme": self.scheme,
            "width": self.width,
            "mode": self.mode,
            "seed": self.seed,
            "points_checked": self.points_checked,
            "passed": self.passed,
            "counterexample": None,
        }
        if self.counterexample is not None:
            d["counterexample"] = {
                "binding": self.counterexample.to_dict(),
                "expected": self.expected,
                "actual": self.actual,
            }
        return d


def _draw(rng: np.random.Generator, width: int, size: int) -> np.ndarray:
    return rng.integers(0, 1 << width, size=size, dtype=np.uint64)


def _domain(variable: str, names: List[str], width: int, mode) -> Dict[str, np.ndarray]:
    """Bindings as parallel arrays, in a fixed enumeration order."""
    if isinstance(mode, Sampled):
        rng = np.random.default_rng(mode.seed)
        return {n: _draw(rng, width, mode.count) for n in [variable] + names}
    if mode.full:
        free = [variable] + names
        if width * len(free) > 24:
            raise DomainTooLarge(
                f"exhaustive search over {len(free)} names at {width} bits exceeds 2^24 points"
            )
        size = 1 << (width * len(free))
        idx = np.arange(size, dtype=np.uint64)
        out = {}
        for k, n in enumerate(free):
            out[n] = (idx >> np.uint64(width * k)) & np.uint64((1 << width) - 1)
        return out
    if (1 << width) > EXHAUSTIVE_CAP:
        raise DomainTooLarge(f"exhaustive search over {width}-bit values exceeds 2^24 points")
    span = 1 << width
    draws = mode.draws if names else 1
    rng = np.random.default_rng(mode.seed)
    out = {variable: np.tile(np.arange(span, dtype=np.uint64), draws)}
    for n in names:
        out[n] = np.repeat(_draw(rng, width, draws), span)
    return out


def _first_mismatch(dag, poly, env, width, lo, hi) -> Optional[int]:
    chunk = {k: v[lo:hi] for k, v in env.items()}
    got = np.broadcast_to(np.asarray(_eval_dag_env(dag, chunk, width), dtype=np.uint64), (hi - lo,))
    want = np.broadcast_to(np.asarray(_eval_poly_env(poly, chunk, width), dtype=np.uint64), (hi - lo,))
    bad = np.nonzero(got != want)[0]
    return int(lo + bad[0]) if bad.size else None


def verify_equivalence(
    dag: EvalDag,
    poly: Polynomial,
    width: int = 8,
    mode: Union[Exhaustive, Sampled, None] = None,
    workers: int = 1,
) -> VerificationReport:
    """Compare ``dag`` against the reference polynomial on a set of bindings.

    The report (including the counterexample, which is always the first
    failing binding in enumeration order) does not depend on ``workers``.
    """
    mode = mode or Exhaustive()
    _mask(width)
    names = sorted(set(poly.coefficient_names()) | set(dag.coefficient_names()))
    names = [n for n in names if n != poly.variable]
    env = _domain(poly.variable, names, width, mode)
    total = len(env[poly.variable])

    chunks = max(1, workers)
    bounds = [(total * k // chunks, total * (k + 1) // chunks) for k in range(chunks)]
    bounds = [(lo, hi) for lo, hi in bounds if hi > lo]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = list(pool.map(lambda b: _first_mismatch(dag, poly, env, width, *b), bounds))
    else:
        hits = [_first_mismatch(dag, poly, env, width, lo, hi) for lo, hi in bounds]
    hits = [h for h in hits if h is not None]

    report = VerificationReport(
        scheme=dag.scheme,
        width=width,
        mode=mode.name,
        seed=mode.seed,
        points_checked=total,
        passed=not hits,
    )
    if hits:
        k = min(hits)
        b = Binding(
            int(env[poly.variable][k]),
            {n: int(env[n][k]) for n in names},
            width,
            poly.variable,
        )
        report.counterexample = b
        report.expected = eval_poly_reference(poly, b)
        report.actual = eval_dag(dag, b)
    return report


def check_ring_axioms(width: int, trials: int = 10_000, seed: int = 0) -> Dict[str, bool]:
    """Spot-check the ring laws for w-bit wrapping arithmetic on random triples."""
    mask = _mask(width)
    rng = np.random.default_rng(seed)
    a, b, c = (_draw(rng, width, trials) for _ in range(3))

    def add(p, q):
        return (p + q) & mask

    def mul(p, q):
        return (p * q) & mask

    def neg(p):
        return (~p + np.uint64(1)) & mask

    checks = {
        "add_associative": add(add(a, b), c) == add(a, add(b, c)),
        "add_commutative": add(a, b) == add(b, a),
        "add_identity": add(a, np.uint64(0)) == a,
        "add_inverse": add(a, neg(a)) == 0,
        "mul_associative": mul(mul(a, b), c) == mul(a, mul(b, c)),
        "mul_identity": (mul(a, np.uint64(1)) == a) & (mul(np.uint64(1), a) == a),
        "left_distributive": mul(a, add(b, c)) == add(mul(a, b), mul(a, c)),
        "right_distributive": mul(add(b, c), a) == add(mul(b, a), mul(c, a)),
    }
    return {k: bool(np.all(v)) for k, v in checks.items()}
