import numpy as np
import pytest

from noether_lab.expressions import ExpressionError, parse_expression
from noether_lab.quantities import RATE, SPEED, Dim
from noether_lab.spacetime import ModelKind

NR, REL = ModelKind.NONREL, ModelKind.REL


def test_kinetic_expression_has_rate_dimension():
    e = parse_expression("0.5 s/m2 * abs2(w1, w2, w3)", NR)
    assert e.result_dim(NR) == RATE
    assert e([0, 0, 0, 0], [1, 3, 0, 0]) == pytest.approx(4.5)


def test_relativistic_collapse():
    e = parse_expression("3 1/s * sqrt(w0*w0 - abs2(w1, w2, w3))", REL)
    assert e.result_dim(REL) == RATE
    assert e([0, 0, 0, 0], [1.25, 0.75, 0, 0]) == pytest.approx(3.0)


def test_dimension_errors_are_reported():
    with pytest.raises(ExpressionError):
        parse_expression("abs2(w1, w2, w3)", NR)  # m2/s2, not 1/s
    with pytest.raises(ExpressionError):
        parse_expression("w0 + x1", NR)
    assert parse_expression("w1").result_dim(NR) == SPEED
    assert parse_expression("x1 * x2").result_dim(NR) == Dim(0, 2)


@pytest.mark.parametrize(
    "source",
    ["__import__('os')", "w1.real", "x9", "exp(w1)", "w1 ** w2", "[w1]", "w1 if w0 else w2", "'a'", "sqrt(w1, w2)",
     "lambda: 1", "w1 // w2", "1 +"],
)
def test_whitelist_rejects(source):
    with pytest.raises(ExpressionError):
        parse_expression(source)


def test_arrays_and_constant_powers():
    e = parse_expression("w1 ** 2 + -x0 / 2")
    x = np.array([[2.0], [0.0], [0.0], [0.0]])
    w = np.array([[1.0], [3.0], [0.0], [0.0]])
    assert np.allclose(e(x, w), [8.0])
