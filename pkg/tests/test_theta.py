import cmath

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from resitor.errors import ThetaBalanceError, ValuationError
from resitor.jets import jet_inv, jet_mul, jet_slice_q0
from resitor.qseries import COMPLEX, QSeries, qs_sigma_series
from resitor.theta import (CharSeries, ThetaIntegrand, char_series, elliptic_half_Q,
                           theta_alg_jet, theta_log_ratio, theta_numeric, witten_Q, witten_Q_theta)

HALF = mpq(1, 2)


def S(*c):
    return QSeries([mpq(x) if not isinstance(x, str) else mpq(*map(int, x.split("/"))) for x in c])


def test_shift_zero_jet():
    j = theta_alg_jet(0, 1, 1)
    assert j.unit_power == 0
    assert j[1] == S(1, -3)
    for N in range(6):
        assert theta_alg_jet(0, 3, N)[0].is_zero()
        assert theta_alg_jet(0, 3, N)[1][0] == 1


def test_half_period_jet():
    j = theta_alg_jet(HALF, 0, 1)
    assert j.unit_power == 1
    assert j[0] == S(2, 2)


def test_log_ratio_examples():
    assert theta_log_ratio(HALF, 2, 1) == S("1/4", 2)
    A = theta_log_ratio(HALF, 2, 2)
    B = theta_log_ratio(0, 3, 2, base="prime")
    assert A.scale(mpq(3, 2)) - B.scale(HALF) == S("1/4", 6, 6)
    assert theta_log_ratio(HALF, 0, 3) == QSeries.one(3)


def test_ratio_base_vanishing():
    with pytest.raises(ValuationError):
        theta_log_ratio(0, 2, 3, base="self")


def test_third_derivative_ratio_closed_form():
    # (2 pi i)^{-2} theta'''(0)/theta'(0) = 1/4 - 6 sum_j q^j/(1-q^j)^2 = 1/4 - 6 sum sigma_1(n) q^n
    N = 10
    lhs = theta_log_ratio(0, 3, N)
    rhs = QSeries.constant(mpq(1, 4), N) - qs_sigma_series(1, 1, N).scale(6)
    assert lhs == rhs


def test_second_derivative_ratio_closed_form():
    # (2 pi i)^{-2} theta''(1/2)/theta(1/2) = 1/4 + 2 sum_j q^j/(1+q^j)^2
    N = 10
    rhs = [mpq(0)] * (N + 1)
    for j in range(1, N + 1):
        for k in range(1, N // j + 1):
            rhs[j * k] += 2 * (-1) ** (k + 1) * k
    rhs[0] = mpq(1, 4)
    assert theta_log_ratio(HALF, 2, N) == QSeries(rhs)


def test_exact_and_numeric_half_period_jets_agree():
    for shift in (0, HALF):
        ex = theta_alg_jet(shift, 5, 8)
        nu = theta_alg_jet(complex(shift), 5, 8, mode=COMPLEX)
        for a, b in zip(ex.complex_coeffs(), nu.coeffs):
            assert a.max_deviation(b) <= 1e-12


def test_jet_matches_numeric_theta():
    # Theta(x; a) = 2 i theta(a + x/(2 pi i)) / (2 q^{1/8}) at a numeric tau, truncated in q
    tau = 0.05 + 2.0j
    q = cmath.exp(2j * cmath.pi * tau)
    a = 0.3
    jet = theta_alg_jet(a, 0, 12)
    val = sum(c * q ** n for n, c in enumerate(jet[0].coeffs))
    ref = 2j * theta_numeric(a, tau) / (2 * cmath.exp(2j * cmath.pi * tau / 8))
    assert abs(val - ref) <= 1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(-0.9, 0.9), st.floats(-0.4, 0.4), st.floats(-0.4, 0.4), st.floats(0.6, 1.5))
def test_periodicity(x, y, t_re, t_im):
    z = complex(x, y)
    tau = complex(t_re, t_im)
    th = theta_numeric(z, tau)
    assert abs(theta_numeric(z + 1, tau) + th) <= 1e-10 * max(1, abs(th))
    q = cmath.exp(2j * cmath.pi * tau)
    shifted = theta_numeric(z + tau, tau)
    expect = -q ** -0.5 * cmath.exp(-2j * cmath.pi * z) * th
    assert abs(shifted - expect) <= 1e-10 * max(1, abs(expect))


def test_char_series_examples():
    todd = CharSeries("todd").Q(3)
    assert todd == [1, HALF, mpq(1, 12), 0]
    w = CharSeries("witten").Q(4, 1)
    assert w[2] == S("-1/24", 1)
    assert jet_slice_q0(CharSeries("witten").Q(6, 3)) == CharSeries("ahat").Q(6)
    assert CharSeries("ahat").Q(2) == [1, 0, mpq(-1, 24)]


def test_char_series_f_normalization():
    for fam in ("todd", "ahat", "l"):
        f = char_series(fam, 5)
        assert f[0] == 0 and f[1] == 1
    for fam in ("witten", "elliptic-half"):
        f = char_series(fam, 5, 4)
        assert f[0].is_zero() and f[1] == QSeries.one(4)


def test_l_genus_series():
    # f = tanh x = x - x^3/3 + 2 x^5/15
    assert char_series("l", 5) == [0, 1, 0, mpq(-1, 3), 0, mpq(2, 15)]


def test_unknown_family():
    with pytest.raises(ValueError):
        CharSeries("hodge")


def test_witten_two_routes_agree():
    assert witten_Q(8, 6) == witten_Q_theta(8, 6)


def test_witten_f_matches_product_form():
    # f_W(x) = Theta(x; 0)/Theta'(0; 0)
    K, N = 6, 5
    f = CharSeries("witten").f(K, N)
    jet = theta_alg_jet(0, K, N)
    inv = jet[1].invert()
    assert f == [c * inv for c in jet.coeffs]


def test_elliptic_half_is_even_and_normalized():
    Q = elliptic_half_Q(6, 4)
    assert Q[0] == QSeries.one(4)
    assert all(Q[k].is_zero() for k in (1, 3, 5))


def test_custom_family():
    def f(K, N):
        # f = 1 - e^{-x}: reproduces Todd
        out = [mpq(0)]
        sign = 1
        fact = 1
        for k in range(1, K + 1):
            fact *= k
            out.append(mpq(sign, fact))
            sign = -sign
        return out
    assert CharSeries("custom", f).Q(5) == CharSeries("todd").Q(5)
    assert jet_mul(CharSeries("todd").Q(5), jet_inv(CharSeries("todd").Q(5)), 5) == [1, 0, 0, 0, 0, 0]


def test_integrand_balance():
    ti = ThetaIntegrand(("u1",), 3)
    ti.theta((1,), 0, 1)
    with pytest.raises(ThetaBalanceError):
        ti.residue()


def test_integrand_cp1_elliptic():
    # Res x Theta(x;-1/2)Theta'(0) / (Theta(x;0) Theta(0;-1/2)) / x^2, twice: 2 L_1 = 0 at a half period
    ti = ThetaIntegrand(("u1",), 4)
    for _ in range(2):
        ti.linear_power((1,), 1)
        ti.theta((1,), -HALF, 1)
        ti.theta_prime_at_zero(1)
        ti.theta((1,), 0, -1)
        ti.theta_at_zero(-HALF, -1)
    ti.linear_power((1,), -2)
    assert ti.residue() == QSeries.zero(4)
