from hypothesis import strategies as st

from ringopt.expr import CoefficientAtom, IntegerLiteral, Negation, Power, Product, Sum, Variable

leaves = st.one_of(
    st.just(Variable("x")),
    st.sampled_from([CoefficientAtom("A"), CoefficientAtom("B"), CoefficientAtom("C")]),
    st.integers(0, 7).map(IntegerLiteral),
)


def _extend(children):
    return st.one_of(
        st.builds(Sum, children, children),
        st.builds(Product, children, children),
        st.builds(Negation, children),
        st.builds(Power, children, st.integers(0, 3)),
    )


expressions = st.recursive(leaves, _extend, max_leaves=10)
