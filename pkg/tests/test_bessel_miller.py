from decimal import Decimal, localcontext

import numpy as np
import pytest
from hamsim.bessel import bessel_table, miller_start
from scipy import special


def _power_series(k, t, terms=160):
    # J_k(t) = sum_s (-1)^s (t/2)^(2s+k) / (s! (s+k)!) in 90-digit decimals
    with localcontext() as ctx:
        ctx.prec = 90
        half = Decimal(repr(t)) / 2
        term = half**k
        for j in range(1, k + 1):
            term /= j
        total = Decimal(0)
        for s in range(terms):
            total += term
            term *= -(half * half) / ((s + 1) * (s + 1 + k))
        return float(total)


@pytest.mark.parametrize("t", [0.5, 1.0, 7.25, 20.0, 64.0])
def test_miller_matches_power_series(t):
    values = bessel_table(t, 60).values
    for k in (0, 1, 2, 5, 13, 30, 60):
        exact = _power_series(k, t)
        assert abs(values[k] - exact) <= 1e-12 * abs(exact) + 1e-15


@pytest.mark.parametrize("t", [1e-8, 0.3, 3.0, 33.0, 64.0])
def test_miller_matches_scipy(t):
    order = 60
    values = bessel_table(t, order).values
    np.testing.assert_allclose(
        values, special.jv(np.arange(order + 1), t), rtol=1e-10, atol=1e-15
    )


@pytest.mark.parametrize("t", [0.1, 2.0, 15.0, 64.0])
def test_normalisation_identity(t):
    table = bessel_table(t, int(t) + 60)
    assert abs(table.even_sum() - 1.0) < 1e-12


def test_zero_and_negative_arguments():
    zero = bessel_table(0.0, 4).values
    assert np.array_equal(zero, [1.0, 0.0, 0.0, 0.0, 0.0])
    positive = bessel_table(3.5, 8).values
    negative = bessel_table(-3.5, 8).values
    assert np.allclose(negative, positive * (-1.0) ** np.arange(9))


def test_table_metadata_and_validation():
    table = bessel_table(2.0, 10)
    assert table.order == 10
    assert table.t == 2.0
    assert miller_start(10, 2.0) > 10
    assert miller_start(5, 50.0) > 50
    with pytest.raises(ValueError):
        bessel_table(1.0, -1)
