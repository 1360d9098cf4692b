from math import factorial

import numpy as np
import pytest

from uzawa_afem.quadrature import triangle_rule


def exact_monomial(a, b):
    """Integral of x^a y^b over the reference triangle."""
    return factorial(a) * factorial(b) / factorial(a + b + 2)


@pytest.mark.parametrize("order", [1, 2, 3, 4, 5, 6, 8, 11])
def test_rule_is_exact_up_to_its_order(order):
    bary, w = triangle_rule(order)
    assert w.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.all(w > 0) and np.allclose(bary.sum(axis=1), 1.0)
    x, y = bary[:, 1], bary[:, 2]
    for a in range(order + 1):
        for b in range(order + 1 - a):
            approx = 0.5 * w @ (x**a * y**b)
            assert approx == pytest.approx(exact_monomial(a, b), rel=1e-12)


def test_rejects_nonpositive_order():
    with pytest.raises(ValueError):
        triangle_rule(0)
