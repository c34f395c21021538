"""Operation counts and critical paths of evaluation plans."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

from .errors import InvalidDag
from .expr import CoefficientAtom, Polynomial
from .schemes import SCHEMES, Add, Const, EvalDag, Input, Mul, _Builder

LLVM_FIXTURE = "llvm-f0"


@dataclass(frozen=True)
class CostReport:
    scheme_name: str
    degree: int
    adds: int
    muls: int
    critical_path: int

    @property
    def total_ops(self) -> int:
        return self.adds + self.muls

    def to_dict(self) -> dict:
        d = asdict(self)
        return {
            "scheme": d["scheme_name"],
            "degree": d["degree"],
            "adds": d["adds"],
            "muls": d["muls"],
            "total_ops": self.total_ops,
            "critical_path": d["critical_path"],
        }


def _variable_dependent(dag: EvalDag) -> List[bool]:
    dep = []
    for n in dag.nodes:
        if isinstance(n, Input):
            dep.append(True)
        elif isinstance(n, Const):
            dep.append(False)
        elif isinstance(n, (Add, Mul)):
            dep.append(dep[n.left] or dep[n.right])
        else:
            raise InvalidDag(f"unknown node {n!r}")
    return dep


def _live(dag: EvalDag) -> set:
    live = set()
    stack = [dag.root]
    while stack:
        i = stack.pop()
        if i not in live:
            live.add(i)
            stack.extend(dag.operands(i))
    return live


def count_ops(dag: EvalDag) -> Tuple[int, int]:
    """(adds, muls) over live nodes that depend on the input variable."""
    if not isinstance(dag, EvalDag):
        raise InvalidDag("not an EvalDag")
    dep = _variable_dependent(dag)
    adds = muls = 0
    for i in _live(dag):
        if not dep[i]:
            continue
        n = dag.nodes[i]
        if isinstance(n, Add):
            adds += 1
        elif isinstance(n, Mul):
            muls += 1
    return adds, muls


def critical_path(dag: EvalDag) -> int:
    if not isinstance(dag, EvalDag):
        raise InvalidDag("not an EvalDag")
    dep = _variable_dependent(dag)
    depth = [0] * len(dag.nodes)
    for i, n in enumerate(dag.nodes):
        if isinstance(n, (Add, Mul)) and dep[i]:
            depth[i] = 1 + max(depth[j] for j in (n.left, n.right) if dep[j])
    return depth[dag.root]


def cost_report(dag: EvalDag, degree: int, name: Optional[str] = None) -> CostReport:
    adds, muls = count_ops(dag)
    return CostReport(name or dag.scheme, degree, adds, muls, critical_path(dag))


def llvm_fixture_deg4(poly: Optional[Polynomial] = None) -> EvalDag:
    """Hand encoding of the two-branch plan LLVM 3.6 -O3 produced for the
    naive degree-4 source.

    Right branch: x2 = x*x, x4 = x2*x2, A4*x4 + A0.  Left branch:
    ((A3*x + A2)*x + A1)*x.  The branches meet in one final add.
    """
    if poly is None:
        poly = Polynomial("x", tuple(CoefficientAtom(f"A{i}") for i in range(5)))
    if poly.degree != 4:
        raise ValueError("the LLVM fixture only exists for degree 4")
    b = _Builder(poly)
    x = b.x()
    x2 = b.mul(x, x)
    x4 = b.mul(x2, x2)
    right = b.add(b.mul(b.coeff(4), x4), b.coeff(0))
    left = b.mul(b.coeff(3), x)
    left = b.add(left, b.coeff(2))
    left = b.mul(left, x)
    left = b.add(left, b.coeff(1))
    left = b.mul(left, x)
    return b.finish(b.add(left, right), LLVM_FIXTURE)


# Aggregate figures for LLVM's degree-9 output.  The assembly it comes from
# drops register operands, so no plan can be rebuilt; kept for reference.
LLVM_DEG9_STATS = {"adds": 9, "muls": 14, "longest_branch": 12}


def compare_schemes(poly: Polynomial, sparse: bool = False, fixtures: bool = True) -> List[CostReport]:
    reports = [cost_report(gen(poly, sparse), poly.degree, name) for name, gen in SCHEMES.items()]
    if fixtures and poly.degree == 4:
        reports.append(cost_report(llvm_fixture_deg4(poly), 4))
    return sorted(reports, key=lambda r: (r.total_ops, r.scheme_name))


__all__ = [
    "CostReport",
    "LLVM_DEG9_STATS",
    "LLVM_FIXTURE",
    "compare_schemes",
    "cost_report",
    "count_ops",
    "critical_path",
    "llvm_fixture_deg4",
]
