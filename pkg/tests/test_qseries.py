import json
from fractions import Fraction

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from resitor.errors import DegreeIntegralOnRay, ModeMismatch, ValuationError
from resitor.qseries import (COMPLEX, EXACT, QSeries, discriminant, divisor_sigma,
                             eisenstein_e4, qs_geometric, qs_invert, qs_sigma_series, rational)


def S(*c, mode=EXACT):
    return QSeries([rational(x) if mode == EXACT else complex(x) for x in c], mode)


def test_difference_of_squares():
    assert S(1, 1) * S(1, -1) == S(1, 0)


def test_additive_inverse():
    assert (S(1, 1) + S(-1, -1)).is_zero()


def test_finite_geometric_factorization():
    a = S(1, -3, 0, 0)
    b = S(1, 3, 9)
    prod = a * b
    assert prod.q_order == 2
    assert prod == S(1, 0, 0)
    assert S(1, -3, 0, 0) * S(1, 3, 9, 0) == S(1, 0, 0, -27)


def test_truncation_is_min_of_orders():
    assert (S(1, 2, 3) + S(1, 1)).q_order == 1
    assert (S(1, 2, 3) * S(1, 1)).q_order == 1


def test_no_coefficient_beyond_order():
    with pytest.raises(IndexError):
        S(1, 2)[2]


def test_invert_examples():
    assert qs_invert(S(1, -1, 0, 0)) == S(1, 1, 1, 1)
    assert qs_invert(S(1, 0, 0)) == S(1, 0, 0)
    inv = qs_invert(S(2, 2, 0, 0, 0))
    assert inv == S("1/2", "-1/2", "1/2", "-1/2", "1/2")
    assert (inv * S(2, 2, 0, 0, 0)) == S(1, 0, 0, 0, 0)


def test_invert_valuation_error():
    with pytest.raises(ValuationError):
        qs_invert(S(0, 1, 2))


def test_mode_mismatch():
    with pytest.raises(ModeMismatch):
        S(1, 1) + S(1, 1, mode=COMPLEX)
    with pytest.raises(ModeMismatch):
        S(1, 1) * S(1, 1, mode=COMPLEX)


def test_geometric_examples():
    assert qs_geometric(1, -1, 4) == S(1, -1, 1, -1, 1)
    assert qs_geometric(0, -1, 3) == S("1/2", 0, 0, 0)
    assert qs_geometric(-2, -1, 8) == S(0, 0, 1, 0, -1, 0, 1, 0, -1)
    with pytest.raises(DegreeIntegralOnRay):
        qs_geometric(0, 1, 3)


@pytest.mark.parametrize("a", [-3, -2, -1, 1, 2, 3])
@pytest.mark.parametrize("zeta", [-1, 1])
def test_geometric_times_denominator(a, zeta):
    N = 10
    g = qs_geometric(a, zeta, N)
    if a > 0:
        assert g * (QSeries.one(N) - QSeries.monomial(a, N, zeta)) == QSeries.one(N)
    else:
        # continuation: g = -zeta^{-1} q^{-a} / (1 - zeta^{-1} q^{-a})
        zinv = mpq(1) / zeta
        den = QSeries.one(N) - QSeries.monomial(-a, N, zinv)
        assert g * den == QSeries.monomial(-a, N, -zinv)


def test_sigma_examples():
    assert qs_sigma_series(1, 2, 8) == S(0, 0, 1, 0, 3, 0, 4, 0, 7)
    assert qs_sigma_series(1, 1, 3) == S(0, 1, 3, 4)
    assert qs_sigma_series(3, 1, 2) == S(0, 1, 9)
    assert [divisor_sigma(1, r) for r in range(1, 7)] == [1, 3, 4, 7, 6, 12]


def test_e4_and_delta():
    assert eisenstein_e4(3) == S(1, 240, 2160, 6720)
    assert discriminant(5) == S(0, 1, -24, 252, -1472, 4830)


def test_json_round_trip_exact_is_bit_exact():
    s = S("1/4", 6, "-7/3", 0)
    obj = s.to_json()
    assert obj["coeffs"][2] == {"num": "-7", "den": "3"}
    back = QSeries.from_json(json.loads(json.dumps(obj)))
    assert back == s and back.mode == EXACT


def test_json_round_trip_complex():
    s = QSeries([1 + 2j, -0.5j], COMPLEX)
    back = QSeries.from_json(json.loads(json.dumps(s.to_json())))
    assert back == s


def test_exact_hash_matches_fraction():
    assert rational(Fraction(3, 6)) == mpq(1, 2)
    assert hash(rational("2/4")) == hash(Fraction(1, 2))


def test_str():
    assert str(S("1/4", 6, 0)) == "1/4 + (6)*q + O(q^3)"


coeff = st.fractions(min_value=-5, max_value=5, max_denominator=7)


def series(unit=False, n=6):
    def build(cs):
        cs = list(cs)
        if unit:
            cs[0] = Fraction(1) if cs[0] == 0 else cs[0]
        return QSeries([rational(c) for c in cs], EXACT)
    return st.lists(coeff, min_size=n + 1, max_size=n + 1).map(build)


@settings(max_examples=60, deadline=None)
@given(series(), series(), series())
def test_associativity(a, b, c):
    assert (a * b) * c == a * (b * c)


@settings(max_examples=60, deadline=None)
@given(series(unit=True))
def test_inverse_property(a):
    assert a * qs_invert(a) == QSeries.one(a.q_order)


@settings(max_examples=60, deadline=None)
@given(series(), series(unit=True))
def test_float_mode_reproduces_exact(a, b):
    exact = a * qs_invert(b)
    fl = a.to_mode(COMPLEX) * qs_invert(b.to_mode(COMPLEX))
    scale = max(1.0, max(abs(complex(x)) for x in exact.coeffs))
    assert exact.max_deviation(fl) <= 1e-12 * scale
