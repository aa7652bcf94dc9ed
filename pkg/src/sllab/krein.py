"""Krein strings and the spectral shift ``tau -> c + tau``.

A string is a length ``l`` and a nondecreasing mass function ``M(x)`` on
``[0, l)``.  Adding ``c`` to the spectral function (a point mass at 0)
produces the string

    M*(x) = M(zeta) / (1 + c M(zeta)),    x = int_0^zeta (1 + c M(s))^2 ds,

whose density is ``M'(zeta) / (1 + c M(zeta))^4``.  The map ``zeta -> x``
is inverted by bracketed root finding on a table of Gauss-Legendre
panels, or in closed form for linear base strings.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import exprparse as ep

__all__ = ["MassDistribution", "StringShiftError", "NonDifferentiableError",
           "string_shift", "density_of", "richardson_derivative"]


class StringShiftError(ValueError):
    """Shift precondition violated or inversion failed."""


class NonDifferentiableError(ValueError):
    """One-sided slopes of a tabulated mass function disagree."""


def _as_callable(f):
    if f is None:
        return None
    if isinstance(f, str):
        return ep.Function(f, "x")
    return f


@dataclass(frozen=True)
class MassDistribution:
    """Mass function of a string.

    Exactly one of ``mass`` (expression text in ``x``), ``func`` (a
    callable) or ``samples`` (``(x, M)`` arrays, linearly interpolated) is
    given.  ``density`` is optional text or callable for ``dM/dx``.
    """

    mass: Optional[str] = None
    length: float = math.inf
    density: Optional[str] = None
    func: Optional[Callable[[float], float]] = field(default=None, compare=False)
    density_func: Optional[Callable[[float], float]] = field(default=None, compare=False)
    samples: Optional[tuple] = field(default=None, compare=False)
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        given = [self.mass is not None, self.func is not None, self.samples is not None]
        if sum(given) != 1:
            raise ValueError("give exactly one of mass, func or samples")
        if not self.length > 0:
            raise ValueError("length must be positive")
        if self.mass is not None:
            f = ep.Function(self.mass, "x")
        elif self.func is not None:
            f = self.func
        else:
            xs, ms = (np.asarray(a, float) for a in self.samples)
            if np.any(np.diff(xs) <= 0):
                raise ValueError("sample abscissae must increase")
            f = lambda x, xs=xs, ms=ms: np.interp(x, xs, ms)
        object.__setattr__(self, "_f", f)
        dens = _as_callable(self.density) if self.density is not None else self.density_func
        object.__setattr__(self, "_rho", dens)
        if self.validate:
            self.check()

    def __call__(self, x):
        if np.ndim(x) == 0:
            return float(self._f(float(x)))
        return np.array([self(v) for v in np.ravel(x)]).reshape(np.shape(x))

    @property
    def has_density(self) -> bool:
        return self._rho is not None

    def density_at(self, x: float) -> float:
        if self._rho is None:
            raise ValueError("no density attached")
        return float(self._rho(float(x)))

    def _grid(self, n: int = 200) -> np.ndarray:
        top = self.length if math.isfinite(self.length) else 100.0
        if self.samples is not None:
            top = min(top, float(np.asarray(self.samples[0])[-1]))
        return np.linspace(0.0, top * (1 - 1e-9), n)

    def check(self) -> None:
        """Monotonicity, growth at 0 and density consistency."""
        xs = self._grid()
        ms = np.array([self(x) for x in xs])
        if np.any(np.diff(ms) < -1e-12 * max(1.0, np.max(np.abs(ms)))):
            raise ValueError("mass function must be nondecreasing")
        h = 1e-6 * (xs[1] - xs[0]) * 200
        if not self(h) > self(0.0):
            raise ValueError("x = 0 must be a point of growth of the mass function")
        if self._rho is not None:
            from scipy.integrate import quad
            for x in xs[1::40]:
                val = quad(self._rho, 0.0, x, epsabs=1e-13, epsrel=1e-12, limit=200)[0]
                if abs(val - (self(x) - self(0.0))) > 1e-8 * max(1.0, abs(val)):
                    raise ValueError(f"density does not integrate to the mass at x={x}")

    def to_dict(self) -> dict:
        out: dict = {"length": None if math.isinf(self.length) else self.length}
        if self.mass is not None:
            out["mass_expr"] = self.mass
        else:
            xs = self._grid(101) if self.samples is None else np.asarray(self.samples[0])
            out["samples"] = [[float(x), float(self(x))] for x in xs]
        if self.density is not None:
            out["density_expr"] = self.density
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "MassDistribution":
        length = data.get("length")
        length = math.inf if length is None else float(length)
        if "mass_expr" in data:
            return cls(mass=data["mass_expr"], length=length, density=data.get("density_expr"))
        pts = np.asarray(data["samples"], float)
        return cls(samples=(pts[:, 0], pts[:, 1]), length=length)

    def to_csv(self, x_grid: Sequence[float]) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["x", "M", "density"])
        dens = density_of(self, x_grid)
        for x, d in zip(x_grid, dens):
            wr.writerow([f"{x:.12g}", f"{self(x):.12g}", f"{d:.12g}"])
        return buf.getvalue()


# --------------------------------------------------------------------------
# Derivatives
# --------------------------------------------------------------------------

def richardson_derivative(f: Callable[[float], float], x: float, h: float = 1e-3,
                          lower: float = -math.inf) -> tuple[float, float]:
    """Derivative of ``f`` at ``x`` with one Richardson level.

    Central differences when ``x - h >= lower``, otherwise second-order
    forward differences with a ten times smaller step (their truncation
    error is one order worse).  Returns ``(value, error_estimate)``.
    """
    def central(hh):
        return (f(x + hh) - f(x - hh)) / (2 * hh)

    def forward(hh):
        return (-3 * f(x) + 4 * f(x + hh) - f(x + 2 * hh)) / (2 * hh)

    if x - h >= lower:
        rule = central
    else:
        rule, h = forward, 0.1 * h
    d1, d2 = rule(h), rule(h / 2)
    best = (4 * d2 - d1) / 3
    return best, abs(best - d2)


def density_of(md: MassDistribution, x_grid: Sequence[float], h: float = 1e-3,
               tol: float = 1e-6) -> np.ndarray:
    """``dM/dx`` on ``x_grid``.

    Uses the attached density when there is one.  Otherwise differentiates
    numerically and raises :class:`NonDifferentiableError` where the
    Richardson-extrapolated one-sided slopes disagree by more than ``tol``
    (relative).
    """
    xs = np.asarray(x_grid, float)
    if md.has_density:
        return np.array([md.density_at(x) for x in xs])
    out = np.empty(len(xs))
    f = md.__call__

    def one_sided(x, sgn):
        def rule(hh):
            return sgn * (-3 * f(x) + 4 * f(x + sgn * hh) - f(x + 2 * sgn * hh)) / (2 * hh)
        return (4 * rule(h / 2) - rule(h)) / 3

    for k, x in enumerate(xs):
        val, _ = richardson_derivative(f, x, h, lower=0.0)
        if x - 2 * h >= 0.0:
            fwd, bwd = one_sided(x, 1), one_sided(x, -1)
            if abs(fwd - bwd) > tol * max(1.0, abs(val)):
                raise NonDifferentiableError(f"one-sided slopes differ at x={x}: {fwd} vs {bwd}")
        out[k] = val
    return out


# --------------------------------------------------------------------------
# Shift
# --------------------------------------------------------------------------

def _linear_coefficient(md: MassDistribution) -> Optional[float]:
    """Return ``k`` if the mass expression is literally ``k*x`` or ``x``."""
    if md.mass is None:
        return None
    node = ep.parse(md.mass, "x")
    if isinstance(node, ep.Var):
        return 1.0
    if isinstance(node, ep.BinOp) and node.op == "*":
        if isinstance(node.left, ep.Num) and isinstance(node.right, ep.Var):
            return node.left.value
        if isinstance(node.right, ep.Num) and isinstance(node.left, ep.Var):
            return node.right.value
    return None


class _ParametricInverse:
    """Table of ``x(zeta)`` on Gauss-Legendre panels plus bracketed inversion."""

    def __init__(self, M: Callable[[float], float], c: float, length: float,
                 panel: float = 0.25, order: int = 20):
        self.M, self.c, self.length = M, c, length
        self.panel = panel
        self.nodes, self.weights = np.polynomial.legendre.leggauss(order)
        self.zeta = [0.0]
        self.x = [0.0]

    def _factor(self, z: float) -> float:
        f = 1.0 + self.c * self.M(z)
        if not f > 0:
            raise StringShiftError(
                f"1 + c*M(zeta) = {f:.6g} <= 0 at zeta={z:.6g}; the shift c={self.c} "
                "is not admissible for this string")
        return f * f

    def _segment(self, a: float, b: float) -> float:
        t = 0.5 * (b - a) * self.nodes + 0.5 * (a + b)
        return 0.5 * (b - a) * float(sum(w * self._factor(z) for w, z in zip(self.weights, t)))

    def x_of(self, z: float) -> float:
        k = int(np.searchsorted(self.zeta, z, side="right")) - 1
        k = max(0, min(k, len(self.zeta) - 1))
        if z == self.zeta[k]:
            return self.x[k]
        return self.x[k] + self._segment(self.zeta[k], z)

    def _extend_to(self, x: float) -> None:
        while self.x[-1] < x:
            a = self.zeta[-1]
            b = a + self.panel
            if b >= self.length:
                b = self.length
                if a >= b:
                    raise StringShiftError(f"x={x} lies beyond the shifted string's length")
            self.x.append(self.x[-1] + self._segment(a, b))
            self.zeta.append(b)
            if len(self.zeta) > 10_000_000:
                raise StringShiftError("inversion table did not reach the requested x")

    def zeta_of(self, x: float) -> float:
        if x < 0:
            raise ValueError("x must be non-negative")
        if x == 0:
            return 0.0
        self._extend_to(x)
        k = int(np.searchsorted(self.x, x, side="left"))
        lo, hi = self.zeta[k - 1], self.zeta[k]
        if self.x[k] == x:
            return hi
        return brentq(lambda z: self.x_of(z) - x, lo, hi, xtol=1e-15, rtol=1e-15,
                      maxiter=200)


def string_shift(base: MassDistribution, c: float, method: str = "auto") -> MassDistribution:
    """String whose spectral function is ``c + tau_base``.

    ``method="closed"`` requires a linear base ``M(x) = k x``;
    ``"numeric"`` always inverts ``x(zeta)`` numerically; ``"auto"`` picks
    the closed form when available.
    """
    c = float(c)
    if method not in ("auto", "closed", "numeric"):
        raise ValueError("method must be 'auto', 'closed' or 'numeric'")
    if c == 0.0:
        return base
    k = _linear_coefficient(base)
    if method == "closed" and k is None:
        raise StringShiftError("closed form only for linear base strings")
    if k is not None and method != "numeric" and math.isinf(base.length):
        if c < 0:
            raise StringShiftError(
                f"shift c={c} is not admissible: 1 + c*M(x) vanishes on the infinite string")
        inner = f"({_num(3.0 * c * k)}*x+1)"
        mass = f"1-{inner}^(-1/3)" if c == 1 else f"(1-{inner}^(-1/3))/{_num(c)}"
        dens = f"{inner}^(-4/3)" if k == 1 else f"{_num(k)}*{inner}^(-4/3)"
        return MassDistribution(mass=mass, length=math.inf, density=dens)

    M = base.__call__
    if base.has_density:
        dM = base.density_at
    else:
        dM = lambda z: richardson_derivative(M, z, 1e-3, lower=0.0)[0]
    inv = _ParametricInverse(M, c, base.length)
    if math.isfinite(base.length):
        edges = np.append(np.arange(0.0, base.length, inv.panel), base.length)
        new_length = float(sum(inv._segment(lo, hi) for lo, hi in zip(edges, edges[1:])))
    else:
        if c < 0:
            # an unbounded string eventually violates 1 + c M > 0
            for z in np.geomspace(1.0, 1e6, 25):
                inv._factor(z)
        new_length = math.inf

    def shifted(x: float) -> float:
        z = inv.zeta_of(float(x))
        m = M(z)
        return m / (1.0 + c * m)

    def shifted_density(x: float) -> float:
        z = inv.zeta_of(float(x))
        return dM(z) / (1.0 + c * M(z)) ** 4

    return MassDistribution(func=shifted, length=new_length, density_func=shifted_density,
                            validate=False)


def _num(v: float) -> str:
    return ep.to_text(ep.Num(abs(v))) if v >= 0 else f"(-{ep.to_text(ep.Num(-v))})"
