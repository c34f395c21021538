"""Evaluation plans for a canonical polynomial.

A plan is an :class:`EvalDag`: nodes in topological order, one root.  The
generators below build the naive, incremental-powers, Horner and balanced
(Estrin) plans.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

from .errors import InvalidDag
from .expr import ZERO, Expression, Polynomial, atoms, format_expression, is_constant


@dataclass(frozen=True)
class Input:
    name: str


@dataclass(frozen=True)
class Const:
    value: Expression


@dataclass(frozen=True)
class Add:
    left: int
    right: int


@dataclass(frozen=True)
class Mul:
    left: int
    right: int


Node = Union[Input, Const, Add, Mul]


@dataclass(frozen=True)
class EvalDag:
    nodes: Tuple[Node, ...]
    root: int
    scheme: str = ""

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        validate(self)

    def operands(self, i: int) -> Tuple[int, ...]:
        n = self.nodes[i]
        if isinstance(n, (Add, Mul)):
            return (n.left, n.right)
        return ()

    def inputs(self) -> List[str]:
        return [n.name for n in self.nodes if isinstance(n, Input)]

    def coefficient_names(self) -> List[str]:
        seen = {}
        for n in self.nodes:
            if isinstance(n, Const):
                for a in atoms(n.value):
                    seen.setdefault(a, None)
        return list(seen)

    def use_counts(self) -> List[int]:
        uses = [0] * len(self.nodes)
        for i in range(len(self.nodes)):
            for j in self.operands(i):
                uses[j] += 1
        return uses

    def replace(self, index: int, node: Node) -> "EvalDag":
        nodes = list(self.nodes)
        nodes[index] = node
        return EvalDag(tuple(nodes), self.root, self.scheme)


def validate(dag: EvalDag) -> None:
    nodes = dag.nodes
    if not nodes:
        raise InvalidDag("plan has no nodes")
    if not 0 <= dag.root < len(nodes):
        raise InvalidDag(f"root {dag.root} out of range")
    for i, n in enumerate(nodes):
        if isinstance(n, (Add, Mul)):
            for j in (n.left, n.right):
                if not isinstance(j, int) or not 0 <= j < i:
                    raise InvalidDag(f"node {i} uses operand {j} that does not precede it")
        elif isinstance(n, Const):
            if not is_constant(n.value):
                raise InvalidDag(f"constant node {i} mentions the variable")
        elif not isinstance(n, Input):
            raise InvalidDag(f"node {i} has unknown kind {type(n).__name__}")
    live = _reachable(nodes, dag.root)
    dead = [i for i in range(len(nodes)) if i not in live]
    if dead:
        raise InvalidDag(f"nodes {dead} are not reachable from the root")


def _reachable(nodes, root) -> set:
    live = set()
    stack = [root]
    while stack:
        i = stack.pop()
        if i in live:
            continue
        live.add(i)
        n = nodes[i]
        if isinstance(n, (Add, Mul)):
            stack.extend((n.left, n.right))
    return live


class _Builder:
    """Appends nodes in program order; leaves are shared, arithmetic is not."""

    def __init__(self, poly: Polynomial):
        self.nodes: List[Node] = []
        self._leaves: Dict[Node, int] = {}
        self.poly = poly

    def leaf(self, node: Node) -> int:
        if node not in self._leaves:
            self._leaves[node] = len(self.nodes)
            self.nodes.append(node)
        return self._leaves[node]

    def x(self) -> int:
        return self.leaf(Input(self.poly.variable))

    def coeff(self, i: int) -> int:
        return self.leaf(Const(self.poly.terms[i]))

    def add(self, a: int, b: int) -> int:
        self.nodes.append(Add(a, b))
        return len(self.nodes) - 1

    def mul(self, a: int, b: int) -> int:
        self.nodes.append(Mul(a, b))
        return len(self.nodes) - 1

    def finish(self, root: int, scheme: str) -> EvalDag:
        live = _reachable(self.nodes, root)
        remap = {}
        kept: List[Node] = []
        for i, n in enumerate(self.nodes):
            if i not in live:
                continue
            remap[i] = len(kept)
            if isinstance(n, Add):
                n = Add(remap[n.left], remap[n.right])
            elif isinstance(n, Mul):
                n = Mul(remap[n.left], remap[n.right])
            kept.append(n)
        return EvalDag(tuple(kept), remap[root], scheme)


def _kept(poly: Polynomial, sparse: bool) -> List[int]:
    idx = list(range(poly.degree + 1))
    if sparse:
        idx = [i for i in idx if poly.terms[i] != ZERO]
    return idx


def scheme_naive(poly: Polynomial, sparse: bool = False) -> EvalDag:
    """Every term on its own: ``A4*x*x*x*x + A3*x*x*x + ... + A0``."""
    b = _Builder(poly)
    terms = []
    for i in reversed(_kept(poly, sparse)):
        t = b.coeff(i)
        for _ in range(i):
            t = b.mul(t, b.x())
        terms.append(t)
    if not terms:
        return b.finish(b.leaf(Const(ZERO)), "naive")
    acc = terms[0]
    for t in terms[1:]:
        acc = b.add(acc, t)
    return b.finish(acc, "naive")


def scheme_incremental(poly: Polynomial, sparse: bool = False) -> EvalDag:
    """Shared power chain x^2 = x*x, x^i = x^(i-1)*x, accumulated from A0 up."""
    b = _Builder(poly)
    kept = set(_kept(poly, sparse))
    acc = None
    power = None
    for i in range(poly.degree + 1):
        if i == 1:
            power = b.x()
        elif i == 2:
            power = b.mul(b.x(), b.x())
        elif i > 2:
            power = b.mul(power, b.x())
        if i not in kept:
            continue
        term = b.coeff(i) if i == 0 else b.mul(b.coeff(i), power)
        acc = term if acc is None else b.add(acc, term)
    if acc is None:
        return b.finish(b.leaf(Const(ZERO)), "incremental")
    return b.finish(acc, "incremental")


def scheme_horner(poly: Polynomial, sparse: bool = False) -> EvalDag:
    """Nested ``(((A4*x + A3)*x + A2)*x + A1)*x + A0``.

    ``sparse`` is accepted for a uniform signature; dropping an inner zero
    coefficient would change the polynomial, so the chain stays whole.
    """
    b = _Builder(poly)
    n = poly.degree
    acc = b.coeff(n)
    for i in range(n - 1, -1, -1):
        acc = b.add(b.mul(acc, b.x()), b.coeff(i))
    return b.finish(acc, "horner")


def scheme_balanced(poly: Polynomial, sparse: bool = False) -> EvalDag:
    """Estrin's scheme: pair coefficients as ``A[2i+1]*x + A[2i]``, then merge
    neighbours with x^2, x^4, ... obtained by repeated squaring."""
    b = _Builder(poly)
    level = []
    for i in range(0, poly.degree + 1, 2):
        if i + 1 <= poly.degree:
            level.append(b.add(b.mul(b.coeff(i + 1), b.x()), b.coeff(i)))
        else:
            level.append(b.coeff(i))
    power = None
    while len(level) > 1:
        power = b.mul(b.x(), b.x()) if power is None else b.mul(power, power)
        nxt = []
        for j in range(0, len(level), 2):
            if j + 1 < len(level):
                nxt.append(b.add(b.mul(level[j + 1], power), level[j]))
            else:
                nxt.append(level[j])
        level = nxt
    return b.finish(level[0], "balanced")


SCHEMES = {
    "naive": scheme_naive,
    "incremental": scheme_incremental,
    "horner": scheme_horner,
    "balanced": scheme_balanced,
}


def build(poly: Polynomial, scheme: str, sparse: bool = False) -> EvalDag:
    try:
        gen = SCHEMES[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}") from None
    return gen(poly, sparse)


# -- plan files -------------------------------------------------------------

def dag_to_json(dag: EvalDag) -> dict:
    nodes = []
    for n in dag.nodes:
        if isinstance(n, Input):
            nodes.append({"op": "input", "name": n.name})
        elif isinstance(n, Const):
            nodes.append({"op": "const", "value": format_expression(n.value)})
        else:
            nodes.append({"op": "add" if isinstance(n, Add) else "mul", "args": [n.left, n.right]})
    return {"scheme": dag.scheme, "nodes": nodes, "root": dag.root}


def dag_from_json(doc: dict, variable: str) -> EvalDag:
    from .annotations import parse_expression

    nodes: List[Node] = []
    try:
        for i, n in enumerate(doc["nodes"]):
            op = n["op"]
            if op == "input":
                nodes.append(Input(n["name"]))
            elif op == "const":
                value = parse_expression(str(n["value"]), variable)
                nodes.append(Const(value))
            elif op in ("add", "mul"):
                left, right = n["args"]
                nodes.append((Add if op == "add" else Mul)(int(left), int(right)))
            else:
                raise InvalidDag(f"node {i}: unknown op {op!r}")
        return EvalDag(tuple(nodes), int(doc["root"]), doc.get("scheme", ""))
    except (KeyError, TypeError, ValueError) as err:
        raise InvalidDag(f"malformed plan: {err}") from None


def mutate(dag: EvalDag, index: int) -> EvalDag:
    """Swap the Add/Mul at ``index`` for the other operation."""
    n = dag.nodes[index]
    if isinstance(n, Add):
        return dag.replace(index, Mul(n.left, n.right))
    if isinstance(n, Mul):
        return dag.replace(index, Add(n.left, n.right))
    raise ValueError(f"node {index} is not arithmetic")


def arithmetic_nodes(dag: EvalDag) -> Sequence[int]:
    return [i for i, n in enumerate(dag.nodes) if isinstance(n, (Add, Mul))]
