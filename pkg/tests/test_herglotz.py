from __future__ import annotations

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from sllab import catalog
from sllab.herglotz import (Atom, AtomAtPointError, Density, Divergent, HerglotzFunction,
                            InversionError, MeasureError, SpectralMeasure, complex_function,
                            herglotz_selfcheck, moment_integral, stieltjes_invert,
                            stieltjes_transform)


def _brute_transform(atoms, rho, a, lam):
    """Plain QUADPACK on real and imaginary parts, no substitutions."""
    def part(fn):
        head = integrate.quad(lambda s: fn(rho(s) / (s - lam)), a, a + 1, limit=500,
                              epsabs=1e-14, epsrel=1e-13)[0]
        tail = integrate.quad(lambda s: fn(rho(s) / (s - lam)), a + 1, math.inf, limit=500,
                              epsabs=1e-14, epsrel=1e-13)[0]
        return head + tail
    val = sum(w / (s - lam) for s, w in atoms)
    return val + part(lambda z: z.real) + 1j * part(lambda z: z.imag)


def test_unit_mass_transform():
    mu = SpectralMeasure(atoms=(Atom(0.0, 1.0),))
    assert stieltjes_transform(mu, 1j) == pytest.approx(1j, abs=1e-15)


def test_decaying_weight_measure_at_minus_one():
    assert stieltjes_transform(catalog.measure("sec5"), -1.0 + 0j) == pytest.approx(2.0,
                                                                                    abs=1e-10)


def test_rational_potential_measure_at_i():
    lam = 1j
    expected = lam / (1 + lam * cmath.sqrt(-lam))
    got = stieltjes_transform(catalog.measure("sec6.1-plus"), lam)
    assert abs(got - expected) <= 1e-10
    brute = _brute_transform([(-1.0, 2 / 3)], lambda s: s ** 2.5 / (math.pi * (1 + s ** 3)),
                             0.0, lam)
    assert abs(got - brute) <= 1e-9


@pytest.mark.parametrize("lam", [1j, 0.1j, -2 + 0.5j, 3 + 1e-3j])
def test_reconstruction_measure_matches_closed_form(lam):
    w = cmath.sqrt(-lam)
    expected = -1 / lam + 1 / w - 1 / (-lam + w)
    got = stieltjes_transform(catalog.measure("sec6.2"), lam)
    assert abs(got - expected) <= 1e-10 * max(1, abs(expected))


@pytest.mark.parametrize("lam", [1j, -1 + 0j, 2 + 0.5j])
def test_regularized_dirichlet_measure(lam):
    expected = -1 / lam - cmath.sqrt(-lam)
    got = stieltjes_transform(catalog.measure("sec6.1-dirichlet"), lam)
    assert abs(got - expected) <= 1e-10


def test_transform_of_reflected_measure():
    mu = catalog.measure("sec5")
    lam = 0.3 + 0.7j
    got = stieltjes_transform(mu.reflected(), lam)
    assert got == pytest.approx(-stieltjes_transform(mu, -lam), abs=1e-12)
    assert got == pytest.approx(-1 / lam - 1 / cmath.sqrt(lam), abs=1e-10)


def test_invert_point_mass():
    M = HerglotzFunction.from_text("-1/lam")
    tab = stieltjes_invert(M, (-1.0, 1.0), n_points=21)
    assert np.all(np.abs(tab.values[tab.s < -0.2]) < 1e-2)
    assert np.all(np.abs(tab.values[tab.s > 0.2] - 1) < 1e-2)
    assert tab(0.0) == pytest.approx(0.5, abs=1e-2)


def test_invert_decaying_weight_m():
    M = HerglotzFunction.from_text("-1/lam + 1/sqrt(-lam)")
    tab = stieltjes_invert(M, (0.1, 10.0))
    exact = 2 / math.pi * (np.sqrt(tab.s) - math.sqrt(0.1))
    assert np.max(np.abs(tab.values - exact)) <= 1e-2


def test_invert_rational_potential_m():
    M = HerglotzFunction.from_text("lam/(1 + lam*sqrt(-lam))")
    tab = stieltjes_invert(M, (0.5, 5.0), n_points=19)
    exact = [integrate.quad(lambda s: s ** 2.5 / (math.pi * (1 + s ** 3)), 0.5, s)[0]
             for s in tab.s]
    assert np.max(np.abs(tab.values - exact)) <= 1e-2


def test_invert_rejects_bad_schedule():
    M = HerglotzFunction.from_text("-1/lam")
    with pytest.raises(ValueError):
        stieltjes_invert(M, (1.0, 0.0))
    with pytest.raises(ValueError):
        stieltjes_invert(M, (0.0, 1.0), eps_schedule=(0.01, 0.02))


def test_invert_flags_non_monotone_input():
    M = HerglotzFunction(lambda z: complex(z.real, -1.0), kind="closed")
    with pytest.raises(InversionError):
        stieltjes_invert(M, (0.0, 1.0))


def test_moment_integrals_for_eigenvalue_measure():
    mu = catalog.measure("sec6.1-plus")
    assert moment_integral(mu, 0.0, 1).value == pytest.approx(0.0, abs=1e-8)
    # 2/3 + (1/pi) * pi/(3 sin(pi/2)) by the Beta-integral identity
    assert moment_integral(mu, 0.0, 2).value == pytest.approx(1.0, abs=1e-8)
    for route in ("hint", "numeric"):
        verdict = moment_integral(mu, 0.0, 4, divergence=route)
        assert isinstance(verdict, Divergent)
        assert not verdict


def test_moment_integral_atom_at_point():
    mu = SpectralMeasure(atoms=(Atom(1.0, 1.0),))
    with pytest.raises(AtomAtPointError):
        moment_integral(mu, 1.0, 2)


def test_moment_integral_unsigned_and_elementary():
    mu = SpectralMeasure(density=Density("1", 1.0, 2.0))
    assert moment_integral(mu, 0.0, 1).value == pytest.approx(math.log(2), abs=1e-12)
    mu = SpectralMeasure(density=Density("1", -2.0, -1.0))
    assert moment_integral(mu, 0.0, 1, signed=True).value == pytest.approx(-math.log(2),
                                                                           abs=1e-12)
    assert moment_integral(mu, 0.0, 1, signed=False).value == pytest.approx(math.log(2),
                                                                            abs=1e-12)


def test_interior_point_of_positive_density_diverges():
    mu = SpectralMeasure(density=Density("1", -1.0, 1.0))
    assert isinstance(moment_integral(mu, 0.0, 2), Divergent)


@pytest.mark.parametrize("name, lam0", [("sec6.1-plus", 0.0), ("sec6.1-minus", 0.0),
                                        ("sec6.2", -1.0), ("sec5", -0.5)])
def test_first_moment_is_boundary_value_of_transform(name, lam0):
    mu = catalog.measure(name)
    assert not isinstance(moment_integral(mu, lam0, 2), Divergent)
    first = moment_integral(mu, lam0, 1).value
    limit = stieltjes_transform(mu, lam0 + 1e-7j)
    assert abs(first - limit) <= 1e-6


def test_selfcheck_examples():
    rng = np.random.default_rng(7)
    grid = rng.normal(size=100) + 1j * rng.normal(size=100)
    assert herglotz_selfcheck(lambda z: -1 / z, grid).ok
    assert herglotz_selfcheck(lambda z: z, grid).ok
    rep = herglotz_selfcheck(lambda z: z.conjugate(), grid)
    assert rep.n_sign_violations == int(np.sum(grid.imag > 0)) + int(np.sum(grid.imag < 0))
    with pytest.raises(ValueError):
        herglotz_selfcheck(lambda z: z, [1.0])


def test_measure_validation():
    with pytest.raises(MeasureError):
        SpectralMeasure(atoms=(Atom(0.0, -1.0),))
    with pytest.raises(MeasureError):
        SpectralMeasure(density=Density("1", 0.0))
    with pytest.raises(MeasureError):
        SpectralMeasure(density=Density("s-1", 0.0, 3.0))


def test_measure_json_round_trip():
    for name in catalog.MEASURES:
        mu = catalog.measure(name)
        back = SpectralMeasure.from_json(mu.to_json())
        assert back == mu


def test_mass_counts_half_atoms():
    mu = catalog.measure("sec5")
    assert mu.mass(0.0, 1.0) == pytest.approx(0.5 + 2 / math.pi, abs=1e-12)
    assert mu.mass(0.1, 10.0) == pytest.approx(2 / math.pi * (math.sqrt(10) - math.sqrt(0.1)),
                                               abs=1e-12)


def test_complex_function_principal_branch():
    f = complex_function("sqrt(-lam)")
    assert f(1j) == pytest.approx(cmath.exp(-1j * math.pi / 4))
    assert complex_function("1+i")(0) == 1 + 1j


def test_herglotz_function_rejects_real_argument():
    with pytest.raises(ValueError):
        HerglotzFunction.from_text("-1/lam")(1.0)


_nonreal = st.tuples(st.floats(-50, 50), st.floats(1e-3, 50), st.booleans()).map(
    lambda t: complex(t[0], t[1] if t[2] else -t[1]))


@settings(max_examples=60, deadline=None)
@given(_nonreal)
def test_measure_transforms_are_herglotz(lam):
    for name in ("sec5", "sec6.1-plus", "sec6.2", "sec6.1-dirichlet"):
        mu = catalog.measure(name)
        rep = herglotz_selfcheck(lambda z: stieltjes_transform(mu, z), [lam])
        assert rep.ok, (name, lam, rep)
