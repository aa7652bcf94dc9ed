"""Spectral measures and Herglotz (Nevanlinna) functions.

A :class:`SpectralMeasure` is a finite list of point masses plus at most
one absolutely continuous density on an interval.  Its Stieltjes transform

    M(lam) = sum_j w_j / (s_j - lam) + int rho(s) / (s - lam) ds

is a Herglotz function.  Measures that only satisfy
``int dtau / (1 + s^2) < inf`` are stored with ``regularized=True`` and
use the kernel ``1/(s - lam) - s/(1 + s^2)`` plus an additive constant.

The module also provides the inverse direction (Stieltjes inversion with
Richardson extrapolation in the distance to the real axis) and the
moment integrals ``int dtau / (s - lam0)^p`` used by the eigenvalue test,
including a divergence verdict.
"""

from __future__ import annotations

import cmath
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from . import exprparse as ep
from .quadrature import QuadratureError, integrate_interval

__all__ = [
    "Atom", "Density", "SpectralMeasure", "MeasureError",
    "HerglotzFunction", "complex_function",
    "stieltjes_transform", "stieltjes_invert", "InversionError", "TabulatedTau",
    "moment_integral", "Divergent", "MomentValue", "AtomAtPointError",
    "herglotz_selfcheck", "SelfCheckReport",
]


class MeasureError(ValueError):
    """Invalid spectral measure."""


# --------------------------------------------------------------------------
# Measures
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Atom:
    s: float
    w: float


@dataclass(frozen=True)
class Density:
    """Density ``rho(s)`` on ``[a, b]`` (``a`` or ``b`` may be infinite).

    ``edge_exponent`` is the power of ``rho`` at the finite endpoints
    (a pair, or one number used for both); ``tail_exponent`` the power of
    ``rho(s)`` in ``|s|`` at an infinite end.  Both are hints for the
    quadrature substitutions and for divergence verdicts.
    """

    expr: str
    a: float
    b: float = math.inf
    tail_exponent: Optional[float] = None
    edge_exponent: tuple[Optional[float], Optional[float]] = (None, None)

    def __post_init__(self):
        if not self.a < self.b:
            raise MeasureError(f"empty density interval [{self.a}, {self.b}]")
        ee = self.edge_exponent
        if ee is None or isinstance(ee, (int, float)):
            object.__setattr__(self, "edge_exponent", (ee, ee))
        else:
            object.__setattr__(self, "edge_exponent", tuple(ee))
        object.__setattr__(self, "_func", ep.Function(self.expr, "s"))

    def __call__(self, s):
        return self._func(s)

    @property
    def function(self) -> ep.Function:
        return self._func


def _interval_to_json(a: float, b: float) -> list:
    return [None if math.isinf(a) else a, None if math.isinf(b) else b]


@dataclass(frozen=True)
class SpectralMeasure:
    """Point masses plus an optional density; see the module docstring.

    ``regularized`` selects the kernel ``1/(s-lam) - s/(1+s^2)`` and adds
    ``constant`` to the transform.
    """

    atoms: tuple[Atom, ...] = ()
    density: Optional[Density] = None
    regularized: bool = False
    constant: float = 0.0
    label: str = ""
    validate: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(
            a if isinstance(a, Atom) else Atom(float(a[0]), float(a[1])) for a in self.atoms))
        if self.constant and not self.regularized:
            raise MeasureError("an additive constant needs the regularized kernel")
        if self.validate:
            self.check()

    # -- validation ---------------------------------------------------------
    def check(self, n_sample: int = 64) -> None:
        """Raise :class:`MeasureError` if an invariant visibly fails."""
        for at in self.atoms:
            if not (at.w > 0 and math.isfinite(at.w) and math.isfinite(at.s)):
                raise MeasureError(f"atom weights must be positive and finite: {at}")
        d = self.density
        if d is None:
            return
        for s in self._sample_points(n_sample):
            try:
                v = d(s)
            except ep.ExprError as exc:
                raise MeasureError(f"density not evaluable at s={s}: {exc}") from None
            if not (v >= 0 and math.isfinite(v)):
                raise MeasureError(f"density negative or non-finite at s={s}: {v}")
        power = 2 if self.regularized else 1
        try:
            integrate_interval(lambda s: d(s) / (1.0 + abs(s) ** power), d.a, d.b,
                               edge_exponents=d.edge_exponent,
                               tail_exponent=d.tail_exponent, max_error=1e-6)
        except (QuadratureError, ep.ExprError, OverflowError) as exc:
            kind = "1+s^2" if self.regularized else "1+|s|"
            raise MeasureError(f"int dtau/({kind}) appears divergent: {exc}") from None

    def _sample_points(self, n: int) -> np.ndarray:
        d = self.density
        u = (np.arange(n) + 0.5) / n
        if math.isinf(d.a) and math.isinf(d.b):
            return np.tan(np.pi * (u - 0.5))
        if math.isinf(d.b):
            return d.a + u / (1 - u)
        if math.isinf(d.a):
            return d.b - u / (1 - u)
        return d.a + (d.b - d.a) * u

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        out: dict = {"atoms": [{"s": a.s, "w": a.w} for a in self.atoms]}
        if self.density is not None:
            d = self.density
            dens = {"expr": d.expr, "interval": _interval_to_json(d.a, d.b)}
            if d.tail_exponent is not None:
                dens["tail_exponent"] = d.tail_exponent
            if d.edge_exponent != (None, None):
                dens["edge_exponent"] = list(d.edge_exponent)
            out["density"] = dens
        if self.regularized:
            out["regularized"] = True
            out["constant"] = self.constant
        if self.label:
            out["label"] = self.label
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict, validate: bool = True) -> "SpectralMeasure":
        atoms = tuple(Atom(float(a["s"]), float(a["w"])) for a in data.get("atoms", []))
        density = None
        if data.get("density") is not None:
            d = data["density"]
            a, b = d["interval"]
            density = Density(
                expr=d["expr"],
                a=-math.inf if a is None else float(a),
                b=math.inf if b is None else float(b),
                tail_exponent=d.get("tail_exponent"),
                edge_exponent=d.get("edge_exponent"),
            )
        return cls(atoms=atoms, density=density,
                   regularized=bool(data.get("regularized", False)),
                   constant=float(data.get("constant", 0.0)),
                   label=data.get("label", ""), validate=validate)

    @classmethod
    def from_json(cls, text: str) -> "SpectralMeasure":
        return cls.from_dict(json.loads(text))

    # -- distribution function ---------------------------------------------
    def mass(self, s0: float, s1: float) -> float:
        """Measure of ``(s0, s1)`` with half weight for atoms on the ends.

        This is ``tau_avg(s1) - tau_avg(s0)`` where ``tau_avg`` averages the
        left and right limits, matching what Stieltjes inversion returns.
        """
        if s1 < s0:
            return -self.mass(s1, s0)
        total = 0.0
        for at in self.atoms:
            if s0 < at.s < s1:
                total += at.w
            elif at.s == s0 or at.s == s1:
                total += 0.5 * at.w if s0 != s1 else 0.0
        d = self.density
        if d is not None:
            lo, hi = max(s0, d.a), min(s1, d.b)
            if hi > lo:
                ee = (d.edge_exponent[0] if lo == d.a else None,
                      d.edge_exponent[1] if hi == d.b else None)
                total += integrate_interval(d, lo, hi, edge_exponents=ee,
                                            tail_exponent=d.tail_exponent).value
        return total

    def reflected(self) -> "SpectralMeasure":
        """Image under ``s -> -s``."""
        atoms = tuple(Atom(-a.s, a.w) for a in self.atoms)
        density = None
        if self.density is not None:
            d = self.density
            node = ep.parse(d.expr, "s")
            text = ep.to_text(_substitute_neg(node))
            density = Density(text, -d.b, -d.a, d.tail_exponent,
                              (d.edge_exponent[1], d.edge_exponent[0]))
        return SpectralMeasure(atoms, density, self.regularized, -self.constant,
                               label=(self.label + " reflected").strip(),
                               validate=False)


def _substitute_neg(node: ep.Expr) -> ep.Expr:
    if isinstance(node, ep.Var):
        return ep.Neg(node)
    if isinstance(node, ep.Neg):
        return ep.Neg(_substitute_neg(node.operand))
    if isinstance(node, ep.Call):
        return ep.Call(node.func, _substitute_neg(node.arg))
    if isinstance(node, ep.BinOp):
        return ep.BinOp(node.op, _substitute_neg(node.left), _substitute_neg(node.right))
    return node


# --------------------------------------------------------------------------
# Complex closed forms
# --------------------------------------------------------------------------

def _csign(z):
    raise ZeroDivisionError("sign is not defined for complex arguments")


_CFUNCS = {
    "sqrt": cmath.sqrt, "exp": cmath.exp, "log": cmath.log, "sin": cmath.sin,
    "cos": cmath.cos, "cosh": cmath.cosh, "sinh": cmath.sinh, "atan": cmath.atan,
    "abs": lambda z: complex(abs(z)), "sign": _csign,
}
_CCONST = {"pi": complex(math.pi), "i": 1j}


def _ceval(node: ep.Expr, z: complex) -> complex:
    if isinstance(node, ep.Num):
        return complex(node.value)
    if isinstance(node, ep.Var):
        return z
    if isinstance(node, ep.Const):
        return _CCONST[node.name]
    if isinstance(node, ep.Neg):
        return -_ceval(node.operand, z)
    if isinstance(node, ep.Call):
        arg = _ceval(node.arg, z)
        try:
            return complex(_CFUNCS[node.func](arg))
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ep.ExprDomainError(str(exc), ep.to_text(node), arg) from None
    a, b = _ceval(node.left, z), _ceval(node.right, z)
    try:
        if node.op == "+":
            return a + b
        if node.op == "-":
            return a - b
        if node.op == "*":
            return a * b
        if node.op == "/":
            return a / b
        if b.imag == 0 and float(b.real).is_integer():
            return a ** int(b.real)
        return a ** b
    except (ZeroDivisionError, OverflowError) as exc:
        raise ep.ExprDomainError(str(exc), ep.to_text(node), z) from None


def complex_function(text: str, var: str = "lam") -> Callable[[complex], complex]:
    """Compile closed-form text in ``var`` into a complex evaluator.

    ``sqrt`` and ``log`` use the principal branch (cut along the negative
    real axis), ``i`` is the imaginary unit.
    """
    node = ep.parse(text, var, extra_constants=("i",))

    def f(z: complex) -> complex:
        return _ceval(node, complex(z))

    return f


# --------------------------------------------------------------------------
# Herglotz functions
# --------------------------------------------------------------------------

class HerglotzFunction:
    """Evaluator ``lam -> M(lam)`` on the non-real plane.

    ``kind`` records the backend: ``"closed"`` (a formula), ``"measure"``
    (Stieltjes transform of a :class:`SpectralMeasure`) or ``"ode"``
    (computed from a differential equation, see :mod:`sllab.slode`).
    ``tol`` is the backend's nominal absolute accuracy.
    """

    def __init__(self, func: Callable[[complex], complex], label: str = "",
                 kind: str = "closed", tol: float = 0.0, source=None):
        self._func = func
        self.label = label
        self.kind = kind
        self.tol = tol
        self.source = source

    def __call__(self, lam):
        if np.ndim(lam) == 0:
            lam = complex(lam)
            if lam.imag == 0:
                raise ValueError(f"Herglotz functions are evaluated off the real axis, got {lam}")
            return complex(self._func(lam))
        arr = np.asarray(lam, dtype=complex)
        return np.array([self(z) for z in arr.ravel()]).reshape(arr.shape)

    def __repr__(self):
        return f"HerglotzFunction({self.label or self.kind!r}, kind={self.kind!r})"

    @classmethod
    def from_text(cls, text: str, var: str = "lam", label: str = "") -> "HerglotzFunction":
        return cls(complex_function(text, var), label or text, "closed", 0.0, text)

    @classmethod
    def from_measure(cls, mu: SpectralMeasure, label: str = "") -> "HerglotzFunction":
        return cls(lambda z: stieltjes_transform(mu, z), label or mu.label, "measure",
                   1e-10, mu)

    def neg_reciprocal(self, label: str = "") -> "HerglotzFunction":
        """``lam -> -1/M(lam)``; (R)-class is preserved."""
        f = self._func

        def g(z):
            v = f(z)
            if v == 0:
                raise ZeroDivisionError(f"M vanishes at {z}")
            return -1.0 / v

        return HerglotzFunction(g, label or f"-1/({self.label})", self.kind, self.tol, self)

    def reflected(self, label: str = "") -> "HerglotzFunction":
        """``lam -> -M(-lam)``, again a Herglotz function."""
        f = self._func
        return HerglotzFunction(lambda z: -f(-z), label or f"-M(-lam) of {self.label}",
                                self.kind, self.tol, self)


# --------------------------------------------------------------------------
# Stieltjes transform
# --------------------------------------------------------------------------

def stieltjes_transform(mu: SpectralMeasure, lam: complex, *, epsabs: float = 1e-12,
                        epsrel: float = 1e-12) -> complex:
    """Evaluate the Stieltjes transform of ``mu`` at ``lam``.

    ``lam`` must be non-real or a real point off the support (away from
    every atom and outside the closed density interval).
    """
    lam = complex(lam)
    if lam.imag == 0:
        x = lam.real
        d = mu.density
        if any(at.s == x for at in mu.atoms) or (d is not None and d.a <= x <= d.b):
            raise ValueError("lambda must be non-real or lie off the support")
    reg = mu.regularized
    total = complex(mu.constant)
    for at in mu.atoms:
        total += at.w * (1.0 / (at.s - lam) - (at.s / (1 + at.s * at.s) if reg else 0.0))
    d = mu.density
    if d is None:
        return total
    rho = d.function._f

    if reg:
        def integrand(s):
            return rho(s) * ((1.0 + s * lam) / ((s - lam) * (1.0 + s * s)))
    else:
        def integrand(s):
            return rho(s) / (s - lam)

    points = []
    if d.a < lam.real < d.b:
        points.append(lam.real)
    width = abs(lam.imag)
    if 0 < width < 0.5:
        points += [lam.real - 20 * width, lam.real + 20 * width]
    points = [p for p in points if d.a < p < d.b]
    res = integrate_interval(integrand, d.a, d.b, edge_exponents=d.edge_exponent,
                             tail_exponent=d.tail_exponent, is_complex=True,
                             points=points, epsabs=epsabs, epsrel=epsrel,
                             limit=1000, max_error=1e-9)
    return total + res.value


# --------------------------------------------------------------------------
# Stieltjes inversion
# --------------------------------------------------------------------------

class InversionError(RuntimeError):
    """Extrapolated distribution function is not monotone."""


@dataclass(frozen=True)
class TabulatedTau:
    """``values[k]`` approximates ``tau(s[k]) - tau(s[0])`` (averaged at jumps)."""

    s: np.ndarray
    values: np.ndarray
    error: np.ndarray

    def __call__(self, x):
        return np.interp(x, self.s, self.values)


def _cumulative_im(M: HerglotzFunction, grid: np.ndarray, eps: float, method: str,
                   order: int) -> np.ndarray:
    out = np.zeros(len(grid))
    if method == "gauss":
        nodes, weights = np.polynomial.legendre.leggauss(order)
    for k in range(1, len(grid)):
        a, b = grid[k - 1], grid[k]
        if method == "gauss":
            t = 0.5 * (b - a) * nodes + 0.5 * (a + b)
            vals = np.array([M(complex(tt, eps)).imag for tt in t])
            piece = 0.5 * (b - a) * float(weights @ vals)
        else:
            piece = integrate.quad(lambda t: M(complex(t, eps)).imag, a, b,
                                   epsabs=1e-11, epsrel=1e-10, limit=200)[0]
        out[k] = out[k - 1] + piece / math.pi
    return out


def stieltjes_invert(M: HerglotzFunction, interval: Sequence[float],
                     eps_schedule: Sequence[float] = (0.02, 0.01), *,
                     n_points: int = 41, grid: Optional[Sequence[float]] = None,
                     method: str = "adaptive", order: int = 12,
                     monotone_tol: Optional[float] = None) -> TabulatedTau:
    """Recover ``tau(s) - tau(s0)`` on ``interval`` from values of ``M``.

    For each ``eps`` the smoothed distribution ``(1/pi) int Im M(t + i eps) dt``
    is tabulated; the last two schedules are combined by Richardson
    extrapolation assuming an error linear in ``eps``.  ``method="gauss"``
    uses fixed Gauss-Legendre panels, which is cheaper for expensive
    backends.  Raises :class:`InversionError` if the extrapolated table
    decreases by more than ``monotone_tol``.
    """
    s0, s1 = float(interval[0]), float(interval[1])
    if not s0 < s1:
        raise ValueError("interval must satisfy s0 < s1")
    eps = [float(e) for e in eps_schedule]
    if not eps or any(e <= 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps_schedule must be positive and strictly decreasing")
    s = np.asarray(grid, dtype=float) if grid is not None else np.linspace(s0, s1, n_points)
    tables = [_cumulative_im(M, s, e, method, order) for e in eps]
    if len(eps) == 1:
        values, error = tables[0], np.full(len(s), np.nan)
    else:
        e1, e2 = eps[-2], eps[-1]
        F1, F2 = tables[-2], tables[-1]
        values = (e1 * F2 - e2 * F1) / (e1 - e2)
        if len(eps) >= 3:
            e0, F0 = eps[-3], tables[-3]
            prev = (e0 * F1 - e1 * F0) / (e0 - e1)
            error = np.abs(values - prev)
        else:
            error = np.abs(values - F2)
    if monotone_tol is None:
        monotone_tol = 1e-3 * max(1.0, float(np.ptp(values)))
    drops = np.diff(values)
    if drops.size and drops.min() < -monotone_tol:
        k = int(np.argmin(drops))
        raise InversionError(
            f"extrapolated tau decreases by {-drops[k]:.3g} near s={s[k]:.6g}; "
            "refine the eps schedule")
    return TabulatedTau(s, values, error)


# --------------------------------------------------------------------------
# Moment integrals
# --------------------------------------------------------------------------

class AtomAtPointError(ValueError):
    """The measure has a point mass at the requested point."""


@dataclass(frozen=True)
class Divergent:
    """Verdict for a divergent moment integral."""

    where: str
    exponent: Optional[float] = None
    reason: str = ""

    def __bool__(self):
        return False


@dataclass(frozen=True)
class MomentValue:
    value: float
    error: float

    def __float__(self):
        return self.value


def _nested_windows(func, start: float, toward: str, *, refinements: int = 4,
                    edge_exponent=None, tail_exponent=None) -> bool:
    """Numeric divergence test on nested windows.

    ``toward="point"`` shrinks ``[start + delta_k, start + 1]`` with
    ``delta_k = 100**-k``; ``toward="infinity"`` grows ``[start, start +
    100**k]``.  Divergent when the windowed integral grows by more than
    10x over three refinements or its increments stop shrinking.
    """
    vals = []
    for k in range(1, refinements + 1):
        if toward == "point":
            lo, hi = start + 100.0 ** (-k), start + 1.0
        else:
            lo, hi = start + 1.0, start + 100.0 ** k
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            vals.append(abs(integrate.quad(func, lo, hi, limit=400, epsabs=1e-14,
                                           epsrel=1e-10)[0]))
    vals = np.array(vals)
    if vals[0] > 0 and vals[-1] / vals[0] > 10.0:
        return True
    inc = np.abs(np.diff(vals))
    if inc[0] == 0:
        return False
    return bool(np.all(inc[1:] >= 0.5 * inc[:-1]))


def moment_integral(mu: SpectralMeasure, lambda0: float, power: int, signed: bool = True,
                    *, divergence: str = "auto") -> Union[MomentValue, Divergent]:
    """``int dtau(s) / (s - lambda0)^power`` (or ``/|s - lambda0|^power``).

    ``divergence`` selects how a divergent integral is recognised:
    ``"hint"`` uses the edge and tail exponents of the density,
    ``"numeric"`` uses nested windows, ``"auto"`` prefers hints when the
    density carries them.
    """
    if power not in (1, 2, 4):
        raise ValueError("power must be 1, 2 or 4")
    if mu.regularized:
        raise ValueError("moment integrals need an unregularized measure")
    lambda0 = float(lambda0)
    scale = 1e-12 * (1.0 + abs(lambda0))
    value = 0.0
    for at in mu.atoms:
        if abs(at.s - lambda0) <= scale:
            raise AtomAtPointError(f"atom at lambda0={lambda0} (weight {at.w})")
        diff = at.s - lambda0
        value += at.w / (diff ** power if signed else abs(diff) ** power)
    d = mu.density
    if d is None:
        return MomentValue(value, 0.0)
    rho = d.function._f

    def integrand(s):
        diff = s - lambda0
        return rho(s) / (diff ** power if signed else abs(diff) ** power)

    def magnitude(s):
        return abs(integrand(s))

    if divergence not in ("auto", "hint", "numeric"):
        raise ValueError("divergence must be 'auto', 'hint' or 'numeric'")

    def exponent_or_numeric(exponent, window_func, start, toward):
        """True/False verdict from a hint, or None to fall back to windows."""
        if divergence != "numeric" and exponent is not None:
            return None
        if divergence == "hint":
            raise ValueError("missing exponent hint for a divergence verdict")
        return _nested_windows(window_func, start, toward)

    touches_a = lambda0 == d.a
    touches_b = lambda0 == d.b
    inside = d.a < lambda0 < d.b
    if inside:
        r0 = rho(lambda0)
        if r0 > 0:
            return Divergent("interior", -float(power),
                             f"density {r0:.3g} > 0 at lambda0 inside its support")
        if divergence == "hint":
            raise ValueError("no exponent hint for an interior zero of the density")
        for side, sgn in (("left", -1), ("right", 1)):
            if _nested_windows(lambda t, sgn=sgn: magnitude(lambda0 + sgn * t), 0.0, "point"):
                return Divergent(f"interior ({side})", None, "nested windows grow")

    for touch, idx, name in ((touches_a, 0, "lower edge"), (touches_b, 1, "upper edge")):
        if not touch:
            continue
        beta = d.edge_exponent[idx]
        sgn = 1 if idx == 0 else -1
        verdict = exponent_or_numeric(
            beta, lambda t, sgn=sgn: magnitude(lambda0 + sgn * t), 0.0, "point")
        if verdict is None and beta - power <= -1:
            return Divergent(name, beta - power, "local exponent <= -1")
        if verdict:
            return Divergent(name, None, "nested windows grow")

    for sgn, name in ((1, "+infinity"), (-1, "-infinity")):
        end = d.b if sgn > 0 else d.a
        if not math.isinf(end):
            continue
        other = d.a if sgn > 0 else d.b
        start = max(abs(lambda0), 0.0 if math.isinf(other) else sgn * other, 0.0) + 1.0
        alpha = d.tail_exponent
        verdict = exponent_or_numeric(
            alpha, lambda t, sgn=sgn: magnitude(sgn * t), start, "infinity")
        if verdict is None and alpha - power >= -1:
            return Divergent(name, alpha - power, "tail exponent >= -1")
        if verdict:
            return Divergent(name, None, "nested windows grow")

    ee = (d.edge_exponent[0], d.edge_exponent[1])
    if touches_a and ee[0] is not None:
        ee = (ee[0] - power, ee[1])
    if touches_b and ee[1] is not None:
        ee = (ee[0], ee[1] - power)
    points = [lambda0] if inside else []
    res = integrate_interval(integrand, d.a, d.b, edge_exponents=ee,
                             tail_exponent=d.tail_exponent, points=points,
                             epsabs=1e-13, epsrel=1e-12, max_error=1e-8)
    return MomentValue(value + res.value, res.error)


# --------------------------------------------------------------------------
# Self-check
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SelfCheckReport:
    n_points: int
    max_symmetry_violation: float
    max_sign_violation: float
    n_symmetry_violations: int
    n_sign_violations: int
    tol: float

    @property
    def ok(self) -> bool:
        return self.n_symmetry_violations == 0 and self.n_sign_violations == 0


def herglotz_selfcheck(M: Callable[[complex], complex], grid: Iterable[complex],
                       tol: float = 1e-9) -> SelfCheckReport:
    """Check ``M(conj lam) = conj M(lam)`` and ``Im lam * Im M(lam) >= 0``.

    Violations are measured relative to ``max(1, |M(lam)|)``.
    """
    sym, sign = [], []
    for lam in grid:
        lam = complex(lam)
        if lam.imag == 0:
            raise ValueError("grid must avoid the real axis")
        v = complex(M(lam))
        vc = complex(M(lam.conjugate()))
        scale = max(1.0, abs(v))
        sym.append(abs(vc - v.conjugate()) / scale)
        sign.append(max(0.0, -math.copysign(1.0, lam.imag) * v.imag) / scale)
    sym_a, sign_a = np.array(sym), np.array(sign)
    return SelfCheckReport(
        n_points=len(sym),
        max_symmetry_violation=float(sym_a.max(initial=0.0)),
        max_sign_violation=float(sign_a.max(initial=0.0)),
        n_symmetry_violations=int(np.sum(sym_a > tol)),
        n_sign_violations=int(np.sum(sign_a > tol)),
        tol=tol,
    )
