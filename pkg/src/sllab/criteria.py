"""Diagnostics for similarity of indefinite problems to self-adjoint ones.

Given the Herglotz functions ``M_+`` and ``M_-`` of the two half-lines,
similarity of the indefinite operator to a self-adjoint one forces the
ratios

    |Im M_+(lam)| / |M_+(lam) - M_-(lam)|,   |Im M_-(lam)| / |M_+(lam) - M_-(lam)|

to stay bounded near 0 and near infinity.  :func:`scan` samples these
ratios along rays and fits log-log slopes; unbounded growth excludes
similarity.  The module also contains the rank-one resolvent correction,
a non-real root finder for ``M_+ - M_-`` and the eigenvalue test for
real points from the two spectral measures.
"""

from __future__ import annotations

import cmath
import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .herglotz import (AtomAtPointError, Divergent, MomentValue, SpectralMeasure,
                       moment_integral)
from .parallel import parallel_map

__all__ = [
    "NonRealSpectrumCandidate", "ZeroRealPartError", "similarity_ratios", "parity_ratio",
    "resolvent_correction_norm", "CriteriaReport", "RaySample", "scan", "fit_slope",
    "nonreal_roots", "RootSearchError", "eigenvalue_classify", "EigenVerdict",
    "BOUND", "SLOPE_TOL",
]

BOUND = 1e3
SLOPE_TOL = 0.05

HFunc = Callable[[complex], complex]


class NonRealSpectrumCandidate(ArithmeticError):
    """``M_+(lam) = M_-(lam)`` to working precision."""

    def __init__(self, lam: complex):
        super().__init__(f"non-real spectrum candidate at lambda={lam}")
        self.lam = lam


class ZeroRealPartError(ArithmeticError):
    """``Re M(i eps)`` vanishes, so the parity ratio is undefined."""


def _difference(Mp: HFunc, Mm: HFunc, lam: complex):
    lam = complex(lam)
    if lam.imag == 0:
        raise ValueError("lambda must be non-real")
    vp, vm = complex(Mp(lam)), complex(Mm(lam))
    diff = vp - vm
    if abs(diff) <= 1e-14 * max(abs(vp), abs(vm)):
        raise NonRealSpectrumCandidate(lam)
    return vp, vm, diff


def similarity_ratios(Mp: HFunc, Mm: HFunc, lam: complex) -> tuple[float, float]:
    """``(|Im M_+| / |M_+ - M_-|, |Im M_-| / |M_+ - M_-|)`` at ``lam``."""
    vp, vm, diff = _difference(Mp, Mm, lam)
    d = abs(diff)
    return abs(vp.imag) / d, abs(vm.imag) / d


def parity_ratio(Mp: HFunc, eps: float) -> float:
    """``Im M(i eps) / Re M(i eps)``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    v = complex(Mp(1j * eps))
    if abs(v.real) <= 1e-15 * abs(v):
        raise ZeroRealPartError(f"Re M(i*{eps:g}) vanishes (M = {v})")
    return v.imag / v.real


def resolvent_correction_norm(Mp: HFunc, Mm: HFunc, lam: complex) -> float:
    """Norm of the rank-one resolvent correction,
    ``(|Im M_+| + |Im M_-|) / (|Im lam| |M_+ - M_-|)``.

    For a genuine pair both imaginary parts share the sign of ``Im lam``,
    so the absolute values only matter for synthetic inputs.
    """
    lam = complex(lam)
    vp, vm, diff = _difference(Mp, Mm, lam)
    return (abs(vp.imag) + abs(vm.imag)) / (abs(lam.imag) * abs(diff))


def fit_slope(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope and intercept of ``log y`` against ``log x``."""
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slope, intercept = np.polyfit(lx, ly, 1)
    return float(slope), float(intercept)


@dataclass(frozen=True)
class RaySample:
    regime: str
    scale: float
    theta: float
    r_plus: float
    r_minus: float
    candidate: bool = False


@dataclass
class CriteriaReport:
    """Outcome of :func:`scan`.

    ``near_zero`` and ``near_infinity`` are ``"bounded"``, ``"unbounded"``
    or ``"inconclusive"``; ``verdict`` combines them.  ``assumptions``
    lists hypotheses the diagnostics cannot check.
    """

    samples: list[RaySample]
    slopes_zero: dict
    slopes_infinity: dict
    sup_zero: float
    sup_infinity: float
    finest_zero: float
    finest_infinity: float
    near_zero: str
    near_infinity: str
    verdict: str
    bound: float = BOUND
    slope_tol: float = SLOPE_TOL
    candidates: list = field(default_factory=list)
    assumptions: dict = field(default_factory=lambda: {"ker_A_equals_ker_A2": "assumed"})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["samples"] = [asdict(s) for s in self.samples]
        d["candidates"] = [[c.real, c.imag] for c in self.candidates]
        d["slopes_zero"] = {str(k): v for k, v in self.slopes_zero.items()}
        d["slopes_infinity"] = {str(k): v for k, v in self.slopes_infinity.items()}
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["regime", "eps", "theta", "r_plus", "r_minus"])
        for s in self.samples:
            wr.writerow([s.regime, f"{s.scale:.12g}", f"{s.theta:.12g}",
                         f"{s.r_plus:.12g}", f"{s.r_minus:.12g}"])
        return buf.getvalue()


def _classify(slopes: dict, finest: float, sup: float, direction: int,
              bound: float, slope_tol: float) -> str:
    if not slopes:
        return "inconclusive"
    # direction = -1 near zero (growth as scale decreases), +1 near infinity
    growth = [direction * s for s in slopes.values()]
    if max(growth) > slope_tol and finest > bound:
        return "unbounded"
    if max(abs(s) for s in slopes.values()) <= slope_tol and sup <= bound:
        return "bounded"
    if sup <= bound and max(growth) <= slope_tol:
        return "bounded"
    return "inconclusive"


def scan(Mp: HFunc, Mm: HFunc, scales: Optional[Sequence[float]] = None,
         rays: Sequence[float] = (math.pi / 2,), *,
         large_scales: Optional[Sequence[float]] = None,
         bound: float = BOUND, slope_tol: float = SLOPE_TOL,
         fit_decades: float = 3.0) -> CriteriaReport:
    """Sample the similarity ratios on ``eps e^{i theta}`` and ``R e^{i theta}``.

    ``scales`` is the geometric grid of small moduli (at least three
    decades); ``large_scales`` defaults to their reciprocals.  Slopes are
    fitted on the ``fit_decades`` decades closest to 0 (resp. infinity).
    """
    if scales is None:
        scales = np.geomspace(1e-8, 1e-2, 25)
    scales = np.sort(np.asarray(scales, dtype=float))
    if scales[0] <= 0 or math.log10(scales[-1] / scales[0]) < 3 - 1e-9:
        raise ValueError("the eps grid must be positive and span at least three decades")
    large = np.sort(1.0 / scales if large_scales is None else np.asarray(large_scales, float))
    for th in rays:
        if not 0 < th < math.pi:
            raise ValueError("ray arguments must lie in (0, pi)")

    jobs = [("zero", float(e), float(th)) for th in rays for e in scales]
    jobs += [("infinity", float(R), float(th)) for th in rays for R in large]

    def run(job):
        regime, scale, th = job
        lam = scale * cmath.exp(1j * th)
        try:
            rp, rm = similarity_ratios(Mp, Mm, lam)
            return RaySample(regime, scale, th, rp, rm)
        except NonRealSpectrumCandidate:
            return RaySample(regime, scale, th, math.inf, math.inf, True)

    samples = parallel_map(run, jobs)
    candidates = [s.scale * cmath.exp(1j * s.theta) for s in samples if s.candidate]

    def regime_stats(regime: str, direction: int):
        slopes = {}
        sup = 0.0
        finest = 0.0
        for th in rays:
            rows = [s for s in samples if s.regime == regime and s.theta == float(th)
                    and not s.candidate]
            if len(rows) < 3:
                continue
            x = np.array([s.scale for s in rows])
            y = np.array([max(s.r_plus, s.r_minus) for s in rows])
            sup = max(sup, float(y.max()))
            if direction < 0:
                keep = x <= x.min() * 10 ** fit_decades
                finest = max(finest, float(y[np.argmin(x)]))
            else:
                keep = x >= x.max() / 10 ** fit_decades
                finest = max(finest, float(y[np.argmax(x)]))
            slopes[float(th)] = fit_slope(x[keep], y[keep])[0]
        return slopes, sup, finest

    sz, supz, finz = regime_stats("zero", -1)
    si, supi, fini = regime_stats("infinity", 1)
    near_zero = _classify(sz, finz, supz, -1, bound, slope_tol)
    near_inf = _classify(si, fini, supi, 1, bound, slope_tol)
    if near_zero == "unbounded":
        verdict = "similarity-excluded-near-0"
    elif near_inf == "unbounded":
        verdict = "similarity-excluded-near-inf"
    else:
        verdict = "no-obstruction-found"
    return CriteriaReport(samples, sz, si, supz, supi, finz, fini, near_zero, near_inf,
                          verdict, bound, slope_tol, candidates)


# --------------------------------------------------------------------------
# Non-real roots of M_+ - M_-
# --------------------------------------------------------------------------

class RootSearchError(RuntimeError):
    pass


def _winding(h: HFunc, corners: Sequence[complex], n_side: int) -> int:
    """Winding number of ``h`` around the closed polygon ``corners``.

    Each side is sampled at ``n_side`` points and refined wherever the
    argument jumps by more than ``pi/4``.
    """
    total = 0.0
    for k in range(len(corners)):
        a, b = corners[k], corners[(k + 1) % len(corners)]
        total += _arg_change(h, a, b, n_side)
    return int(round(total / (2 * math.pi)))


def _arg_change(h: HFunc, a: complex, b: complex, n: int, level: int = 0) -> float:
    ts = np.linspace(0.0, 1.0, n + 1)
    pts = a + (b - a) * ts
    vals = np.array([h(z) for z in pts])
    if np.any(np.abs(vals) < 1e-12):
        raise RootSearchError("contour passes through a zero")
    dargs = np.angle(vals[1:] / vals[:-1])
    total = 0.0
    for j, da in enumerate(dargs):
        if abs(da) > math.pi / 4 and level < 12:
            total += _arg_change(h, pts[j], pts[j + 1], 8, level + 1)
        else:
            total += da
    return total


def _newton(h: HFunc, z0: complex, tol: float = 1e-12, max_iter: int = 60) -> complex:
    z = complex(z0)
    for _ in range(max_iter):
        hz = h(z)
        step = 1e-7 * max(1.0, abs(z))
        dh = (h(z + step) - h(z - step)) / (2 * step)
        if dh == 0:
            break
        dz = hz / dh
        z -= dz
        if abs(dz) <= tol * max(1.0, abs(z)):
            break
    return z


def nonreal_roots(Mp: HFunc, Mm: HFunc, box: Sequence[float], grid_density: int = 32,
                  *, min_size: float = 1e-3, max_depth: int = 40,
                  residual_tol: float = 1e-8) -> list[complex]:
    """Zeros of ``h = M_+ - M_-`` in ``box = (x0, x1, y0, y1)``, ``y0 > 0``.

    Boxes with a non-zero winding number are split in four until they
    are small or contain one zero, then refined by Newton's method.
    """
    x0, x1, y0, y1 = map(float, box)
    if not (x0 < x1 and 0 < y0 < y1):
        raise ValueError("box must satisfy x0 < x1 and 0 < y0 < y1")

    def h(z):
        return complex(Mp(z)) - complex(Mm(z))

    roots: list[complex] = []
    stack = [(x0, x1, y0, y1, 0)]
    while stack:
        a, b, c, d, depth = stack.pop()
        corners = [complex(a, c), complex(b, c), complex(b, d), complex(a, d)]
        try:
            n = _winding(h, corners, grid_density)
        except RootSearchError:
            if depth >= max_depth:
                raise
            # nudge the box outward slightly and retry
            pad = 1e-7 * max(b - a, d - c)
            stack.append((a - pad, b + pad, max(c - pad, y0 * 0.5), d + pad, depth + 1))
            continue
        if n == 0:
            continue
        size = max(b - a, d - c)
        if n == 1 or size < min_size or depth >= max_depth:
            z = _newton(h, complex(0.5 * (a + b), 0.5 * (c + d)))
            slack = 1e-9 * size
            inside = a - slack <= z.real <= b + slack and c - slack <= z.imag <= d + slack
            if inside and abs(h(z)) <= residual_tol:
                if all(abs(z - r) > 1e-8 * max(1.0, abs(r)) for r in roots):
                    roots.append(z)
                continue
            if size < min_size or depth >= max_depth:
                raise RootSearchError(f"could not refine a root in box {(a, b, c, d)}")
        # deterministic split slightly off-centre to avoid symmetric roots on edges
        xm = a + 0.5123 * (b - a)
        ym = c + 0.4877 * (d - c)
        for sub in ((a, xm, c, ym), (xm, b, c, ym), (a, xm, ym, d), (xm, b, ym, d)):
            stack.append((*sub, depth + 1))
    roots.sort(key=lambda z: (z.real, z.imag))
    return roots


# --------------------------------------------------------------------------
# Eigenvalue test at a real point
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class EigenVerdict:
    verdict: str
    reason: str
    integrals: dict

    def __str__(self):
        return self.verdict


def _fmt(v):
    if isinstance(v, Divergent):
        return f"divergent ({v.where})"
    return f"{v.value:.12g}"


def eigenvalue_classify(tau_plus: SpectralMeasure, tau_minus: SpectralMeasure,
                        lambda0: float, tol: float = 1e-6) -> EigenVerdict:
    """Decide whether ``lambda0`` is an eigenvalue from the two measures.

    Verdicts: ``not_eigenvalue``, ``simple_eigenvalue``,
    ``nonsimple_or_higher`` or ``atom_obstruction`` (the test does not
    apply: an atom at ``lambda0`` or a divergent second moment).
    """
    integrals: dict = {}
    try:
        for name, mu in (("plus", tau_plus), ("minus", tau_minus)):
            integrals[f"abs2_{name}"] = moment_integral(mu, lambda0, 2, signed=False)
    except AtomAtPointError as exc:
        return EigenVerdict("atom_obstruction", str(exc), {})
    for key, v in integrals.items():
        if isinstance(v, Divergent):
            return EigenVerdict("atom_obstruction",
                                f"second moment {key} diverges at {v.where}",
                                {k: _fmt(x) for k, x in integrals.items()})
    f1p = moment_integral(tau_plus, lambda0, 1, signed=True)
    f1m = moment_integral(tau_minus, lambda0, 1, signed=True)
    integrals["signed1_plus"], integrals["signed1_minus"] = f1p, f1m
    info = lambda: {k: _fmt(x) for k, x in integrals.items()}
    if abs(f1p.value - f1m.value) > tol:
        return EigenVerdict("not_eigenvalue",
                            f"first moments differ: {f1p.value:.12g} vs {f1m.value:.12g}",
                            info())
    f4p = moment_integral(tau_plus, lambda0, 4, signed=False)
    f4m = moment_integral(tau_minus, lambda0, 4, signed=False)
    f2p = moment_integral(tau_plus, lambda0, 2, signed=True)
    f2m = moment_integral(tau_minus, lambda0, 2, signed=True)
    integrals.update(abs4_plus=f4p, abs4_minus=f4m, signed2_plus=f2p, signed2_minus=f2m)
    fourth_finite = isinstance(f4p, MomentValue) and isinstance(f4m, MomentValue)
    second_equal = abs(f2p.value - f2m.value) <= tol
    if fourth_finite and second_equal:
        return EigenVerdict("nonsimple_or_higher",
                            "fourth moments finite and second moments agree", info())
    why = "fourth moment diverges" if not fourth_finite else "second moments differ"
    return EigenVerdict("simple_eigenvalue", why, info())
