"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

from __future__ import annotations

import cmath
import math
import time

import numpy as np

from sllab import catalog
from sllab.criteria import (eigenvalue_classify, fit_slope, nonreal_roots, parity_ratio,
                            resolvent_correction_norm, scan)
from sllab.glevitan import GLSolver, TabulatedPotential, build_kernel, gl_potential, nystrom_solve
from sllab.herglotz import (Divergent, HerglotzFunction, herglotz_selfcheck, moment_integral,
                            stieltjes_invert)
from sllab.krein import MassDistribution, density_of, string_shift
from sllab.slode import HalfLineProblem, integrate_fundamental, m_coefficient, ode_big_M

LAMBDAS = [0.01j, 0.1j, 1j, 10j, 1 + 1j]
SEC5 = HalfLineProblem(catalog.SEC5_WEIGHT)
SEC61 = HalfLineProblem("1", catalog.SEC61_POTENTIAL)


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_1_decaying_weight_m(criterion):
    t0 = time.perf_counter()
    errs, radii = [], []
    for lam in LAMBDAS:
        r = m_coefficient(SEC5, lam, 1e-8)
        errs.append(_rel(r.value, -1 / lam + 1 / cmath.sqrt(-lam)))
        radii.append(r.error_bound)
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-6 and max(radii) <= 1e-7 and dt <= 30
    criterion(1, ok, f"max rel err {max(errs):.2e}, max radius {max(radii):.2e}, {dt:.1f} s")


def test_criterion_2_rational_potential_m(criterion):
    t0 = time.perf_counter()
    errs = []
    dirichlet = SEC61.with_bc("dirichlet")
    for lam in LAMBDAS:
        w = cmath.sqrt(-lam)
        errs.append(_rel(m_coefficient(SEC61, lam, 1e-8).value, lam / (1 + lam * w)))
        errs.append(_rel(m_coefficient(dirichlet, lam, 1e-8).value, -1 / lam - w))
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-5 and dt <= 30
    criterion(2, ok, f"max rel err {max(errs):.2e}, {dt:.1f} s")


def test_criterion_3_blow_up_exponent(criterion):
    Mp, _ = catalog.closed_pair("sec5")
    eps = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    closed = np.array([parity_ratio(Mp, e) for e in eps])
    exact = 1 + np.sqrt(2 / eps)
    err_closed = float(np.max(np.abs(closed / exact - 1)))
    ode_p, _ = ode_big_M(SEC5, SEC5.with_side("-"), 1e-10)
    ode = np.array([parity_ratio(ode_p, e) for e in eps[:2]])
    err_ode = float(np.max(np.abs(ode / exact[:2] - 1)))
    grid = np.geomspace(1e-4, 1e-1, 13)
    slope, _ = fit_slope(grid, [parity_ratio(Mp, e) for e in grid])
    ok = err_closed <= 0.01 and err_ode <= 0.01 and abs(slope + 0.5) <= 0.05
    criterion(3, ok, f"closed rel err {err_closed:.2e}, ODE rel err {err_ode:.2e}, "
                     f"slope {slope:.4f}")


def test_criterion_4_resolvent_exponent(criterion):
    Mp, Mm = catalog.closed_pair("sec5")
    grid = np.geomspace(1e-4, 1e-1, 13)
    norms = np.array([resolvent_correction_norm(Mp, Mm, 1j * e) for e in grid])
    slope, _ = fit_slope(grid, norms)
    prefactor = norms[0] * grid[0] ** 1.5
    ok = abs(slope + 1.5) <= 0.05 and abs(prefactor / math.sqrt(2) - 1) <= 0.1
    criterion(4, ok, f"slope {slope:.4f}, prefactor {prefactor:.4f}")


def test_criterion_5_similarity_verdicts(criterion):
    verdicts = {name: scan(*catalog.closed_pair(name)) for name in
                ("sec5", "sec6.1", "sec6.2", "free")}
    ok = (all(verdicts[n].verdict == "similarity-excluded-near-0"
              for n in ("sec5", "sec6.1", "sec6.2"))
          and verdicts["free"].verdict == "no-obstruction-found"
          and verdicts["sec6.1"].near_infinity == "bounded")
    detail = ", ".join(f"{n}: {r.verdict}" for n, r in verdicts.items())
    criterion(5, ok, detail + f", sec6.1 near infinity: {verdicts['sec6.1'].near_infinity}")


def test_criterion_6_string_shift(criterion):
    shifted = string_shift(MassDistribution(mass="x", density="1"), 1.0)
    xs = np.linspace(0.0, 100.0, 2001)
    m_err = max(abs(shifted(x) - (1 - (3 * x + 1) ** (-1 / 3))) for x in xs)
    d_err = float(np.max(np.abs(density_of(shifted, xs) - (3 * xs + 1) ** (-4 / 3))))
    ok = m_err <= 1e-10 and d_err <= 1e-8
    criterion(6, ok, f"mass err {m_err:.2e}, density err {d_err:.2e}")


def test_criterion_7_gelfand_levitan_round_trip(criterion):
    t0 = time.perf_counter()
    f = build_kernel(catalog.measure("sec6.2"))
    f_err = 0.0
    for x in np.linspace(0, 5, 51):
        for y in np.linspace(0, x, 21):
            f_err = max(f_err, abs(f(x, y) - (1 - math.exp(-x) * math.cosh(y))))
    table = gl_potential(f, np.linspace(0, 60, 1201), solver=GLSolver(f))
    p = HalfLineProblem("1", potential_func=TabulatedPotential(table.x, table.q))
    m_err = 0.0
    for lam in (0.1j, 1j, 10j):
        w = cmath.sqrt(-lam)
        exact = -1 / lam + 1 / w - 1 / (-lam + w)
        m_err = max(m_err, abs(m_coefficient(p, lam, 1e-8).value - exact))
    dt = time.perf_counter() - t0
    ok = f_err <= 1e-8 and m_err <= 1e-3 and dt <= 60
    criterion(7, ok, f"kernel err {f_err:.2e}, m err {m_err:.2e}, {dt:.1f} s")


def test_criterion_8_eigenvalue_classifier(criterion):
    tp, tm = catalog.measure("sec6.1-plus"), catalog.measure("sec6.1-minus")
    verdict = eigenvalue_classify(tp, tm, 0.0).verdict
    second = moment_integral(tp, 0.0, 2).value
    fourth = moment_integral(tp, 0.0, 4)
    ok = verdict == "simple_eigenvalue" and abs(second - 1) <= 1e-6 and isinstance(
        fourth, Divergent)
    criterion(8, ok, f"{verdict}, power-2 integral {second:.10f}, "
                     f"power-4 {'Divergent' if isinstance(fourth, Divergent) else fourth}")


def test_criterion_9_nonreal_roots(criterion):
    box = (0.05, 10.0, 0.05, 10.0)
    n5 = len(nonreal_roots(*catalog.closed_pair("sec5"), box))
    n61 = len(nonreal_roots(*catalog.closed_pair("sec6.1"), box))
    # i lies on Re = 0, so the toy search box is widened to the left
    toy = nonreal_roots(*catalog.closed_pair("toy-roots"), (-10.0, 10.0, 0.05, 10.0))
    ok = n5 == 0 and n61 == 0 and len(toy) == 1 and abs(toy[0] - 1j) <= 1e-10
    criterion(9, ok, f"sec5 roots {n5}, sec6.1 roots {n61}, toy roots {toy}")


def test_criterion_10_property_suites(criterion):
    rng = np.random.default_rng(2024)
    grid = (rng.uniform(-50, 50, 1000)
            + 1j * rng.uniform(1e-3, 50, 1000) * rng.choice([-1, 1], 1000))
    bad = []
    for name in catalog.CLOSED_FORMS:
        for fn in catalog.closed_pair(name):
            if not herglotz_selfcheck(fn, grid, tol=1e-9).ok:
                bad.append(name)

    drift = 0.0
    for p in (SEC5, SEC61, SEC61.with_bc("dirichlet"), HalfLineProblem("1")):
        for side in ("+", "-"):
            for lam in LAMBDAS:
                fp = integrate_fundamental(p.with_side(side), lam, 40.0)
                drift = max(drift, fp.wronskian_drift())

    tab = stieltjes_invert(HerglotzFunction.from_text("-1/lam + 1/sqrt(-lam)"), (0.1, 10.0))
    inv_err = float(np.max(np.abs(tab.values - 2 / math.pi * (np.sqrt(tab.s) - math.sqrt(0.1)))))

    f = build_kernel(catalog.measure("sec6.2"))
    solver = GLSolver(f)
    ny_err = 0.0
    for x in (0.5, 2.0, 5.0, 10.0):
        row, ny = solver.row(x), nystrom_solve(f, x)
        ny_err = max(ny_err, max(abs(row(y) - ny(y)) for y in np.linspace(0, x, 21)))

    ok = not bad and drift <= 1e-8 and inv_err <= 1e-2 and ny_err <= 1e-6
    criterion(10, ok, f"Herglotz failures {bad}, Wronskian drift {drift:.2e}, "
                      f"inversion err {inv_err:.2e}, Nystrom err {ny_err:.2e}")
