from __future__ import annotations

import cmath

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sllab.krein import (MassDistribution, NonDifferentiableError, StringShiftError,
                         density_of, string_shift)
from sllab.slode import HalfLineProblem, m_coefficient

BASE = MassDistribution(mass="x", density="1")
XS = np.linspace(0.0, 100.0, 1001)


def _shifted_exact(x, c=1.0, k=1.0):
    return (1 - (3 * c * k * x + 1) ** (-1 / 3)) / c


@pytest.mark.parametrize("method", ["closed", "numeric"])
def test_unit_shift_of_linear_string(method):
    md = string_shift(BASE, 1.0, method=method)
    err = max(abs(md(x) - _shifted_exact(x)) for x in XS)
    assert err <= 1e-10
    dens = density_of(md, XS)
    assert np.max(np.abs(dens - (3 * XS + 1) ** (-4 / 3))) <= 1e-8


def test_closed_form_text():
    md = string_shift(BASE, 1.0)
    assert md.mass == "1-(3*x+1)^(-1/3)"
    assert md.density == "(3*x+1)^(-4/3)"


def test_zero_shift_is_identity():
    assert string_shift(BASE, 0.0) is BASE
    md = MassDistribution(mass="1-exp(-x)")
    out = string_shift(md, 0.0, method="numeric")
    assert all(out(x) == md(x) for x in XS)


def test_density_examples():
    assert np.all(density_of(MassDistribution(mass="x"), [0.0, 1.0, 7.5]) ==
                  pytest.approx(1.0, abs=1e-10))
    md = MassDistribution(mass="1-(3*x+1)^(-1/3)")
    d0, d5 = density_of(md, [0.0, 5.0])
    assert d0 == pytest.approx(1.0, abs=1e-8)
    assert d5 == pytest.approx(16 ** (-4 / 3), abs=1e-10)
    assert d5 == pytest.approx(0.02480, abs=1e-5)


def test_kink_detected():
    md = MassDistribution(mass="2*x + abs(x-1)")
    with pytest.raises(NonDifferentiableError):
        density_of(md, [1.0])


def test_negative_shift_rejected_on_infinite_string():
    with pytest.raises(StringShiftError):
        string_shift(BASE, -0.5)
    with pytest.raises(StringShiftError):
        string_shift(MassDistribution(mass="x+x^2"), -0.5)


def test_finite_string_length():
    md = string_shift(MassDistribution(mass="x", length=2.0), 1.0)
    assert md.length == pytest.approx(26 / 3, rel=1e-13)
    assert md(26 / 3 * (1 - 1e-12)) == pytest.approx(2 / 3, rel=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.05, 5.0), st.floats(0.0, 200.0))
def test_numeric_route_matches_closed_form(c, x):
    md = string_shift(BASE, c, method="numeric")
    assert md(x) == pytest.approx(_shifted_exact(x, c), abs=1e-10)


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 5.0))
def test_shifted_string_monotone_and_bounded(c):
    md = string_shift(MassDistribution(mass="x+sinh(x)/10"), c)
    vals = np.array([md(x) for x in np.linspace(0, 50, 60)])
    assert np.all(np.diff(vals) > 0)
    assert np.all(vals < 1 / c)


def test_shifted_weight_reproduces_m_function():
    md = string_shift(BASE, 1.0)
    p = HalfLineProblem(md.density.replace("x", "abs(x)"))
    lam = 1j
    r = m_coefficient(p, lam)
    assert abs(r.value - (-1 / lam + 1 / cmath.sqrt(-lam))) <= 1e-8


def test_validation():
    with pytest.raises(ValueError):
        MassDistribution(mass="-x")
    with pytest.raises(ValueError):
        MassDistribution(mass="0*x")
    with pytest.raises(ValueError):
        MassDistribution(mass="x", density="2")
    with pytest.raises(ValueError):
        MassDistribution()


def test_json_and_csv():
    md = string_shift(BASE, 1.0)
    back = MassDistribution.from_dict(md.to_dict())
    assert back == md
    text = md.to_csv([0.0, 1.0])
    lines = text.splitlines()
    assert lines[0] == "x,M,density"
    assert lines[2].split(",")[1] == f"{_shifted_exact(1.0):.12g}"
    tab = MassDistribution(samples=([0.0, 1.0, 2.0], [0.0, 1.0, 1.5]))
    assert tab(1.5) == 1.25
    assert MassDistribution.from_dict(tab.to_dict())(1.5) == 1.25
