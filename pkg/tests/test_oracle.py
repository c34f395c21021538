import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import dense, poly_of
from ringopt.analysis import llvm_fixture_deg4
from ringopt.errors import DomainTooLarge, UnboundName
from ringopt.expr import CoefficientAtom
from ringopt.oracle import (
    WIDTHS,
    Binding,
    Exhaustive,
    Sampled,
    check_ring_axioms,
    eval_dag,
    eval_poly_reference,
    verify_equivalence,
)
from ringopt.schemes import SCHEMES, Add, Const, EvalDag, Input, Mul, arithmetic_nodes, build, mutate, scheme_horner


def _coeffs(values):
    return {f"A{i}": v for i, v in enumerate(values)}


def test_eval_examples():
    assert eval_dag(scheme_horner(dense(2)), Binding(2, _coeffs([1, 1, 1]), 8)) == 7
    # x^4 = 256 wraps to 0 at 8 bits
    assert eval_dag(scheme_horner(dense(4)), Binding(4, _coeffs([0, 0, 0, 0, 1]), 8)) == 0
    assert eval_dag(scheme_horner(dense(4)), Binding(0, _coeffs([9, 1, 2, 3, 4]), 8)) == 9


def test_binding_masks_values():
    b = Binding(300, {"A0": -1}, 8)
    assert b.variable_value == 44 and b.coefficient_values == {"A0": 255}
    assert b.to_dict() == {"x": 44, "A0": 255}


def test_unbound_name():
    with pytest.raises(UnboundName):
        eval_dag(scheme_horner(dense(2)), Binding(1, {"A0": 1}, 8))


def test_bad_width():
    with pytest.raises(ValueError):
        Binding(1, {}, 12)


@pytest.mark.parametrize("width", WIDTHS)
@pytest.mark.parametrize("name", list(SCHEMES))
def test_scalar_matches_python_ints(name, width):
    rng = np.random.default_rng(width)
    p = poly_of("A0 + A1*x - 3*A2*x^2 + A3*A1*x^5")
    dag = build(p, name)
    for _ in range(50):
        xv = int(rng.integers(0, 1 << 62))
        a = [int(v) for v in rng.integers(0, 1 << 62, size=4)]
        want = (a[0] + a[1] * xv - 3 * a[2] * xv**2 + a[3] * a[1] * xv**5) % (1 << width)
        b = Binding(xv, _coeffs(a), width)
        assert eval_poly_reference(p, b) == want
        assert eval_dag(dag, b) == want


def test_verify_fixed_coefficients_256_points():
    p = poly_of("3 + 5*x + 7*x^2 + 11*x^3 + 13*x^4")
    rep = verify_equivalence(build(p, "horner"), p, 8, Exhaustive())
    assert rep.passed and rep.points_checked == 256
    assert rep.mode == "exhaustive-variable"


def test_verify_catches_corruption():
    p = dense(4)
    dag = build(p, "horner")
    bad = mutate(dag, arithmetic_nodes(dag)[-1])
    rep = verify_equivalence(bad, p, 8)
    assert not rep.passed
    cx = rep.counterexample
    assert rep.expected == eval_poly_reference(p, cx) != rep.actual == eval_dag(bad, cx)
    d = rep.to_dict()
    assert d["counterexample"]["binding"]["x"] == cx.variable_value


def test_verify_degree_zero():
    p = dense(0)
    for name in SCHEMES:
        assert verify_equivalence(build(p, name), p, 8).passed


def test_domain_too_large():
    p = dense(1)
    with pytest.raises(DomainTooLarge):
        verify_equivalence(build(p, "horner"), p, 32, Exhaustive())
    with pytest.raises(DomainTooLarge):
        # x, A0, A1, A2 at 8 bits: 2^32 points
        verify_equivalence(build(dense(2), "horner"), dense(2), 8, Exhaustive(full=True))


def test_full_enumeration_small():
    p = poly_of("A*x")
    rep = verify_equivalence(build(p, "horner"), p, 8, Exhaustive(full=True))
    assert rep.passed and rep.points_checked == 1 << 16 and rep.mode == "exhaustive"


def test_sampled_is_deterministic():
    p = dense(5)
    bad = mutate(build(p, "naive"), arithmetic_nodes(build(p, "naive"))[3])
    r1 = verify_equivalence(bad, p, 64, Sampled(5000, seed=9))
    r2 = verify_equivalence(bad, p, 64, Sampled(5000, seed=9))
    assert r1 == r2 and not r1.passed


@pytest.mark.parametrize("workers", [2, 3, 8])
def test_workers_do_not_change_report(workers):
    p = dense(6)
    dag = build(p, "balanced")
    for i in arithmetic_nodes(dag)[:5]:
        bad = mutate(dag, i)
        assert verify_equivalence(bad, p, 8, workers=workers) == verify_equivalence(bad, p, 8)


@pytest.mark.parametrize("width", WIDTHS)
def test_ring_axioms(width):
    assert all(check_ring_axioms(width, trials=10_000, seed=width).values())


@pytest.mark.parametrize("n", [2, 4, 9])
def test_all_plans_exhaustive_8bit(n):
    p = dense(n)
    plans = [build(p, s) for s in SCHEMES]
    if n == 4:
        plans.append(llvm_fixture_deg4(p))
    for dag in plans:
        rep = verify_equivalence(dag, p, 8, Exhaustive(draws=32, seed=n))
        assert rep.passed and rep.points_checked == 256 * 32


@settings(max_examples=100, deadline=None)
@given(
    st.lists(st.integers(0, 2**64 - 1), min_size=1, max_size=8),
    st.integers(0, 2**64 - 1),
    st.sampled_from(WIDTHS),
)
def test_batch_and_scalar_agree(coeffs, xv, width):
    # the numpy batch path against the scalar path, one binding at a time
    p = dense(len(coeffs) - 1)
    dag = scheme_horner(p)
    b = Binding(xv, _coeffs(coeffs), width)
    rep = verify_equivalence(dag, p, width, Sampled(1, seed=0))
    assert rep.passed
    ref = sum(c * xv**i for i, c in enumerate(coeffs)) % (1 << width)
    assert eval_poly_reference(p, b) == eval_dag(dag, b) == ref


def test_const_nodes_with_compound_coefficients():
    A, B = CoefficientAtom("A"), CoefficientAtom("B")
    p = poly_of("(A*B + 1)*x + A")
    dag = build(p, "horner")
    assert any(isinstance(n, Const) and n.value not in (A, B) for n in dag.nodes)
    assert verify_equivalence(dag, p, 8).passed
    wrong = EvalDag((Const(A), Input("x"), Mul(0, 1), Const(A), Add(2, 3)), 4)
    assert not verify_equivalence(wrong, p, 8).passed
