from pathlib import Path

import pytest

from ringopt.annotations import parse_expression
from ringopt.expr import CoefficientAtom, Polynomial, normalize

DATA = Path(__file__).parent / "data"


def dense(n, variable="x"):
    """A0 + A1*x + ... + An*x^n with every coefficient a distinct atom."""
    return Polynomial(variable, tuple(CoefficientAtom(f"A{i}") for i in range(n + 1)))


def poly_of(text, variable="x"):
    return normalize(parse_expression(text, variable), variable=variable)


@pytest.fixture
def quartic():
    return (DATA / "quartic.c").read_text()


@pytest.fixture
def nonic():
    return (DATA / "degree9.c").read_text()
