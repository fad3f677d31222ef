import numpy as np
import pytest

from fracnehari import Expression, ExpressionError
from fracnehari.expressions import kernel_evaluator, sample_on_nodes


def test_basic_grammar():
    x = np.array([0.0, 0.25, 0.5])
    out = Expression("2*sin(pi*x) + x**2 - abs(-1)")(x=x)
    assert np.allclose(out, 2 * np.sin(np.pi * x) + x**2 - 1)


def test_constant_broadcasts_to_nodes():
    nodes = np.linspace(0.1, 0.9, 5)[:, None]
    assert np.array_equal(sample_on_nodes("1", nodes), np.ones(5))


def test_two_dimensional_coordinates():
    nodes = np.array([[0.2, 0.3], [0.5, 0.7]])
    assert np.allclose(sample_on_nodes("x - y", nodes), [-0.1, -0.2])


@pytest.mark.parametrize("bad", ["__import__('os')", "x.real", "open", "x ^ 2", "lambda: 1", "[1, 2]", "1 +"])
def test_rejects_unsafe_or_malformed(bad):
    with pytest.raises(ExpressionError):
        sample_on_nodes(bad, np.array([[0.5]]))


def test_unknown_name():
    with pytest.raises(ExpressionError, match="unknown"):
        sample_on_nodes("z + 1", np.array([[0.5]]))


def test_kernel_evaluator_radius():
    ev = kernel_evaluator("r**(-3)", 2)
    assert ev(np.array([[3.0, 4.0]]))[0] == pytest.approx(1 / 125)
