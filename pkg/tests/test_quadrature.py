from __future__ import annotations

import math

import pytest
from scipy import special

from sllab.quadrature import QuadratureError, integrate_interval, power_denominator


def test_power_denominator():
    assert power_denominator(-0.5) == 2
    assert power_denominator(2.5) == 2
    assert power_denominator(-4 / 3) == 3
    assert power_denominator(None) == 1
    assert power_denominator(2.0) == 1


def test_inverse_sqrt_edge():
    res = integrate_interval(lambda s: 1 / math.sqrt(s), 0.0, 4.0, edge_exponents=(-0.5, None))
    assert res.value == pytest.approx(4.0, abs=1e-12)


def test_beta_integral_on_half_line():
    # int_0^inf s^(1/2)/(1+s^3) ds = pi/(3 sin(pi/2)) from the Beta-function identity
    res = integrate_interval(lambda s: math.sqrt(s) / (1 + s ** 3), 0.0, math.inf,
                             edge_exponents=(0.5, None), tail_exponent=-2.5)
    assert res.value == pytest.approx(math.pi / 3, abs=1e-12)


def test_gamma_tail_and_negative_half_line():
    res = integrate_interval(lambda s: math.exp(s) * (-s) ** -0.5, -math.inf, 0.0,
                             edge_exponents=(None, -0.5))
    assert res.value == pytest.approx(math.sqrt(math.pi), abs=1e-11)


def test_whole_line():
    res = integrate_interval(lambda s: 1 / (1 + s * s), -math.inf, math.inf, tail_exponent=-2)
    assert res.value == pytest.approx(math.pi, abs=1e-12)


def test_complex_integrand():
    res = integrate_interval(lambda s: 1 / (s - 1j), 0.0, 1.0, is_complex=True)
    assert res.value == pytest.approx(complex(0.5 * math.log(2), math.pi / 4), abs=1e-13)


def test_incomplete_gamma_oracle():
    a = 1 / 3
    res = integrate_interval(lambda s: s ** (a - 1) * math.exp(-s), 0.0, 2.0,
                             edge_exponents=(a - 1, None))
    assert res.value == pytest.approx(special.gammainc(a, 2.0) * special.gamma(a), rel=1e-12)


def test_divergent_integral_reports_achieved_error():
    with pytest.raises(QuadratureError) as info:
        integrate_interval(lambda s: 1 / s, 0.0, 1.0, edge_exponents=(-1.0, None))
    assert info.value.achieved >= 0
