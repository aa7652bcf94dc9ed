"""Improper integrals with power-law endpoint and tail behaviour.

Integrands met in this package behave like ``(s - a)**beta`` at a finite
endpoint and like ``s**alpha`` at infinity, with rational exponents.  The
substitutions

    s = a + h * u**g          near the endpoint,
    s = T * t**(-g)           on the tail,

with ``g`` the denominator of the exponent turn both pieces into smooth
integrands on bounded intervals, which adaptive Gauss-Kronrod (QUADPACK
via scipy) then handles to near machine precision.  Only the fractional
part of an exponent matters for choosing ``g``, so the exponent of a
density can be passed even when the integrand carries extra integer
powers such as ``1/(s - lam)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate

__all__ = ["QuadratureError", "QuadResult", "power_denominator", "integrate_interval"]


class QuadratureError(RuntimeError):
    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message} (achieved error estimate {achieved:.3g})")
        self.achieved = achieved


@dataclass(frozen=True)
class QuadResult:
    value: complex | float
    error: float


def power_denominator(exponent: Optional[float], max_den: int = 12) -> int:
    """Smallest integer g making ``g*(exponent+1)`` an integer (1 if unknown)."""
    if exponent is None:
        return 1
    frac = Fraction(exponent).limit_denominator(max_den)
    if abs(float(frac) - exponent) > 1e-12:
        return 1
    return frac.denominator


def _quad(func, a, b, epsabs, epsrel, limit, is_complex, points=None):
    kwargs = dict(epsabs=epsabs, epsrel=epsrel, limit=limit, full_output=1)
    if points is not None and len(points):
        kwargs["points"] = list(points)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        if is_complex:
            re = integrate.quad(lambda s: func(s).real, a, b, **kwargs)
            im = integrate.quad(lambda s: func(s).imag, a, b, **kwargs)
            return complex(re[0], im[0]), math.hypot(re[1], im[1])
        res = integrate.quad(func, a, b, **kwargs)
        return res[0], res[1]


def integrate_interval(
    func: Callable[[float], complex | float],
    a: float,
    b: float,
    *,
    edge_exponents: tuple[Optional[float], Optional[float]] = (None, None),
    tail_exponent: Optional[float] = None,
    is_complex: bool = False,
    points: Sequence[float] = (),
    epsabs: float = 1e-13,
    epsrel: float = 1e-12,
    limit: int = 400,
    edge_width: float = 1.0,
    tail_start: Optional[float] = None,
    strict: bool = True,
    max_error: float = 1e-8,
) -> QuadResult:
    """Integrate ``func`` over ``[a, b]`` where either end may be infinite.

    ``edge_exponents`` give the local power of the integrand at finite
    ``a`` and ``b``; ``tail_exponent`` the power at infinite ends (with
    respect to ``|s|``).  Interior ``points`` mark kinks or near-poles and
    are handed to QUADPACK.
    """
    if not a < b:
        raise ValueError("need a < b")
    lo, hi = a, b
    total = 0.0
    err = 0.0
    g_tail = power_denominator(tail_exponent)
    lo_is_inf, hi_is_inf = math.isinf(a), math.isinf(b)

    if lo_is_inf and hi_is_inf:
        mid = 0.0
        r1 = integrate_interval(func, -math.inf, mid, edge_exponents=(None, None),
                                tail_exponent=tail_exponent, is_complex=is_complex,
                                points=[p for p in points if p < mid], epsabs=epsabs,
                                epsrel=epsrel, limit=limit, strict=strict,
                                max_error=max_error)
        r2 = integrate_interval(func, mid, math.inf, edge_exponents=(None, None),
                                tail_exponent=tail_exponent, is_complex=is_complex,
                                points=[p for p in points if p > mid], epsabs=epsabs,
                                epsrel=epsrel, limit=limit, strict=strict,
                                max_error=max_error)
        return QuadResult(r1.value + r2.value, r1.error + r2.error)

    if lo_is_inf:
        # reflect to [-b, inf)
        flipped = integrate_interval(lambda s: func(-s), -b, math.inf,
                                     edge_exponents=(edge_exponents[1], None),
                                     tail_exponent=tail_exponent, is_complex=is_complex,
                                     points=[-p for p in points], epsabs=epsabs,
                                     epsrel=epsrel, limit=limit, edge_width=edge_width,
                                     tail_start=tail_start, strict=strict,
                                     max_error=max_error)
        return flipped

    inner_pts = sorted(p for p in points if a < p < (b if not hi_is_inf else math.inf))

    # left edge
    beta_a = edge_exponents[0]
    if beta_a is not None:
        g = power_denominator(beta_a)
        h = edge_width
        if not hi_is_inf:
            h = min(h, 0.25 * (b - a))
        if inner_pts:
            h = min(h, 0.5 * (inner_pts[0] - a))
        if g > 1:
            def f_left(u, g=g, h=h):
                return func(a + h * u ** g) * (h * g * u ** (g - 1))
            v, e = _quad(f_left, 0.0, 1.0, epsabs, epsrel, limit, is_complex)
        else:
            v, e = _quad(func, a, a + h, epsabs, epsrel, limit, is_complex)
        total += v
        err += e
        lo = a + h

    # right edge (finite b only)
    if not hi_is_inf and edge_exponents[1] is not None:
        g = power_denominator(edge_exponents[1])
        h = min(edge_width, 0.25 * (b - a))
        if inner_pts:
            h = min(h, 0.5 * (b - inner_pts[-1]))
        if g > 1:
            def f_right(u, g=g, h=h):
                return func(b - h * u ** g) * (h * g * u ** (g - 1))
            v, e = _quad(f_right, 0.0, 1.0, epsabs, epsrel, limit, is_complex)
        else:
            v, e = _quad(func, b - h, b, epsabs, epsrel, limit, is_complex)
        total += v
        err += e
        hi = b - h

    # tail
    if hi_is_inf:
        T = tail_start
        if T is None:
            T = max(1.0, 2.0 * abs(lo), 2.0 * max([abs(p) for p in inner_pts], default=0.0))
        T = max(T, lo + 1.0)
        g = max(g_tail, 1)
        if tail_exponent is None:
            v, e = _quad(func, T, math.inf, epsabs, epsrel, limit, is_complex)
        else:
            # QUADPACK never samples the endpoint t = 0
            def f_tail(t, g=g, T=T):
                return func(T * t ** (-g)) * (g * T * t ** (-g - 1))
            v, e = _quad(f_tail, 0.0, 1.0, epsabs, epsrel, limit, is_complex)
        total += v
        err += e
        hi = T

    mids = [p for p in inner_pts if lo < p < hi]
    if hi > lo:
        v, e = _quad(func, lo, hi, epsabs, epsrel, limit, is_complex, points=mids)
        total += v
        err += e

    if strict and not (np.isfinite(abs(total)) and err <= max(max_error, epsrel * abs(total))):
        raise QuadratureError("quadrature did not converge", err)
    return QuadResult(total, err)
