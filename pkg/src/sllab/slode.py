"""Half-line Sturm-Liouville problems and their m-coefficients.

For ``-y'' + q y = lam |r| y`` on a half-line the fundamental pair
``c, s`` with ``c(0)=1, c'(0)=0, s(0)=0, s'(0)=1`` is integrated for
complex ``lam``.  The Neumann m-coefficient is the unique ``m`` with
``s - m c`` square integrable against ``|r|`` at infinity (limit point
case), the Dirichlet one is ``-1/m``.

The value is located with Weyl's nested disks.  Truncating at ``b``, the
candidates form a disk of radius ``1 / (2 |Im lam| int_0^b |phi|^2 |r|)``,
``phi = c`` for Neumann and ``phi = s`` for Dirichlet.  The truncation is
doubled until the radius drops below the tolerance, and the disk centre
is returned with the radius as error bound.

The negative half-line is reflected onto ``[0, inf)``: with
``x -> -x`` the coefficient of the reflected problem equals the
coefficient of the original one for both boundary conditions.
"""

from __future__ import annotations

import csv
import io
import math
import threading
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.integrate import solve_ivp

from . import exprparse as ep
from .herglotz import HerglotzFunction

__all__ = [
    "HalfLineProblem", "FundamentalPair", "WeylDisk", "MSolution", "MCoefficient",
    "MCoefficientError", "integrate_fundamental", "weyl_disk", "solve_m",
    "m_coefficient", "big_M", "dirichlet_from_neumann", "ode_herglotz", "ode_big_M",
    "NEAR_REAL", "B_MAX",
]

NEAR_REAL = 1e-4
B_MAX = 2.0 ** 30
ODE_RTOL = 1e-12
ODE_ATOL = 1e-14


class MCoefficientError(RuntimeError):
    """The Weyl disk did not shrink below the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(f"{message}; achieved error bound {achieved:.3g}")
        self.achieved = achieved


@dataclass(frozen=True)
class HalfLineProblem:
    """Coefficients of ``-y'' + q y = lam |r| y`` on one half-line.

    ``weight`` (``|r|``) and ``potential`` (``q``) are expressions in ``x``
    written in the original coordinate, so for ``side="-"`` they are
    evaluated at negative ``x``.  ``bc`` is ``"neumann"`` (``y'(0)=0``)
    or ``"dirichlet"`` (``y(0)=0``).  ``potential_func`` replaces the
    potential text by a callable, e.g. a tabulated potential.
    """

    weight: str
    potential: str = "0"
    side: str = "+"
    bc: str = "neumann"
    potential_func: Optional[Callable[[float], float]] = field(default=None, compare=False)

    def __post_init__(self):
        if self.side not in ("+", "-"):
            raise ValueError("side must be '+' or '-'")
        if self.bc not in ("neumann", "dirichlet"):
            raise ValueError("bc must be 'neumann' or 'dirichlet'")
        w = ep.Function(self.weight, "x")
        q = ep.Function(self.potential, "x")._f if self.potential_func is None \
            else self.potential_func
        object.__setattr__(self, "_w", w)
        object.__setattr__(self, "_q", q)
        sgn = 1.0 if self.side == "+" else -1.0
        for t in np.concatenate([np.linspace(0.0, 10.0, 41), np.geomspace(10.0, 1e6, 21)]):
            v = w(sgn * t)
            if not (v > 0 and math.isfinite(v)):
                raise ValueError(f"weight must be positive, got {v} at x={sgn * t}")
            q(sgn * t)

    def reflected_coefficients(self):
        """Return ``(w, q)`` as functions of ``t = |x| >= 0``."""
        wf, qf = self._w._f, self._q
        if self.side == "+":
            return wf, qf
        return (lambda t: wf(-t)), (lambda t: qf(-t))

    def with_bc(self, bc: str) -> "HalfLineProblem":
        return HalfLineProblem(self.weight, self.potential, self.side, bc, self.potential_func)

    def with_side(self, side: str) -> "HalfLineProblem":
        return HalfLineProblem(self.weight, self.potential, side, self.bc, self.potential_func)

    def to_dict(self) -> dict:
        if self.potential_func is not None:
            raise ValueError("a callable potential cannot be serialized")
        return {"side": self.side, "weight_expr": self.weight,
                "potential_expr": self.potential, "bc": self.bc}

    @classmethod
    def from_dict(cls, data: dict) -> "HalfLineProblem":
        return cls(weight=data["weight_expr"], potential=data.get("potential_expr", "0"),
                   side=data.get("side", "+"), bc=data.get("bc", "neumann"))


@dataclass(frozen=True)
class FundamentalPair:
    """``c, c', s, s'`` on the integration mesh, in the original coordinate."""

    lam: complex
    x: np.ndarray
    c: np.ndarray
    dc: np.ndarray
    s: np.ndarray
    ds: np.ndarray

    def wronskian(self) -> np.ndarray:
        return self.c * self.ds - self.dc * self.s

    def wronskian_drift(self) -> float:
        """Max of ``|W - 1|`` relative to the size of its two products."""
        scale = np.maximum(1.0, np.abs(self.c * self.ds) + np.abs(self.dc * self.s))
        return float(np.max(np.abs(self.wronskian() - 1.0) / scale))

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["x", "re_c", "im_c", "re_dc", "im_dc", "re_s", "im_s", "re_ds", "im_ds"])
        for k in range(len(self.x)):
            row = [self.x[k]]
            for arr in (self.c, self.dc, self.s, self.ds):
                row += [arr[k].real, arr[k].imag]
            wr.writerow([f"{v:.12g}" for v in row])
        return buf.getvalue()


@dataclass(frozen=True)
class WeylDisk:
    b: float
    center: complex
    radius: float
    cap_point: complex

    def contains(self, m: complex, slack: float = 0.0) -> bool:
        return abs(m - self.center) <= self.radius * (1.0 + slack)


class MSolution(NamedTuple):
    value: complex
    error_bound: float
    disk: WeylDisk
    converged: bool
    nfev: int


class MCoefficient(NamedTuple):
    value: complex
    error_bound: float


def _rhs_factory(w, q, lam):
    def rhs(t, z):
        c, dc, s, ds = z[0], z[1], z[2], z[3]
        wt = w(t)
        k = q(t) - lam * wt
        return np.array([dc, k * c, ds, k * s,
                         (c.real * c.real + c.imag * c.imag) * wt,
                         (s.real * s.real + s.imag * s.imag) * wt,
                         c.conjugate() * s * wt])
    return rhs


_Z0 = np.array([1, 0, 0, 1, 0, 0, 0], dtype=complex)


def integrate_fundamental(p: HalfLineProblem, lam: complex, b: float,
                          tol: float = ODE_RTOL) -> FundamentalPair:
    """Integrate the fundamental pair on ``[0, b]`` (``[-b, 0]`` for side -).

    ``tol`` is the relative local error per step of the DOP853 pair.
    """
    if not b > 0 or not tol > 0:
        raise ValueError("need b > 0 and tol > 0")
    lam = complex(lam)
    w, q = p.reflected_coefficients()
    sol = solve_ivp(_rhs_factory(w, q, lam), (0.0, b), _Z0, method="DOP853",
                    rtol=tol, atol=tol * 1e-2)
    if sol.status != 0:
        raise RuntimeError(f"integration failed: {sol.message}")
    t = sol.t
    c, dc, s, ds = sol.y[0], sol.y[1], sol.y[2], sol.y[3]
    if p.side == "-":
        return FundamentalPair(lam, -t, c, -dc, -s, ds)
    return FundamentalPair(lam, t, c, dc, s, ds)


def _disk_from_state(z: np.ndarray, lam: complex, bc: str, b: float) -> WeylDisk:
    c, dc, s, ds = z[0], z[1], z[2], z[3]
    if bc == "neumann":
        area, cross = z[4].real, z[6]
        phi, theta = c, s
    else:
        area, cross = z[5].real, -z[6].conjugate()
        phi, theta = -s, c
    im = lam.imag
    radius = 1.0 / (2.0 * abs(im) * area)
    center = (cross + 0.5j / im) / area
    cap = theta / phi if phi != 0 else complex("nan")
    return WeylDisk(b, complex(center), float(radius), complex(cap))


def weyl_disk(p: HalfLineProblem, lam: complex, b: float,
              tol: float = ODE_RTOL) -> WeylDisk:
    """Weyl disk for truncation at ``b``.

    ``center`` is the true centre of the circle of values ``m`` obtained
    from real (self-adjoint) boundary conditions at ``b``; ``cap_point``
    is the member obtained from the Dirichlet condition at ``b`` and lies
    on that circle.
    """
    lam = complex(lam)
    if lam.imag == 0:
        raise ValueError("lambda must be non-real")
    w, q = p.reflected_coefficients()
    sol = solve_ivp(_rhs_factory(w, q, lam), (0.0, b), _Z0, method="DOP853",
                    rtol=tol, atol=tol * 1e-2)
    if sol.status != 0:
        raise RuntimeError(f"integration failed: {sol.message}")
    return _disk_from_state(sol.y[:, -1], lam, p.bc, b)


def solve_m(p: HalfLineProblem, lam: complex, tol: float = 1e-9, *,
            b0: float = 1.0, b_max: float = B_MAX, max_nfev: int = 3_000_000,
            ode_tol: float = ODE_RTOL) -> MSolution:
    """Double the truncation until the Weyl radius is below ``tol``.

    Returns the last disk even without convergence; :func:`m_coefficient`
    decides whether that is acceptable.
    """
    lam = complex(lam)
    if lam.imag == 0:
        raise ValueError("lambda must be non-real")
    w, q = p.reflected_coefficients()
    rhs = _rhs_factory(w, q, lam)
    z = _Z0.copy()
    x0, b = 0.0, float(b0)
    nfev = 0
    disk = None
    while True:
        sol = solve_ivp(rhs, (x0, b), z, method="DOP853", rtol=ode_tol, atol=ode_tol * 1e-2)
        if sol.status != 0:
            raise RuntimeError(f"integration failed: {sol.message}")
        nfev += sol.nfev
        z = sol.y[:, -1]
        disk = _disk_from_state(z, lam, p.bc, b)
        if disk.radius <= tol:
            return MSolution(disk.center, disk.radius, disk, True, nfev)
        if 2 * b > b_max or nfev > max_nfev or not np.all(np.isfinite(z)):
            return MSolution(disk.center, disk.radius, disk, False, nfev)
        x0, b = b, 2 * b


def m_coefficient(p: HalfLineProblem, lam: complex, tol: float = 1e-9,
                  **kwargs) -> MCoefficient:
    """m-coefficient of ``p`` at ``lam`` with a Weyl-disk error bound.

    Close to the real axis (``|Im lam| < 1e-4``) an unconverged result is
    returned with its achieved bound; elsewhere it raises
    :class:`MCoefficientError`.
    """
    sol = solve_m(p, lam, tol, **kwargs)
    if not sol.converged and abs(complex(lam).imag) >= NEAR_REAL:
        raise MCoefficientError(f"Weyl disk did not shrink below {tol:g} at lambda={lam}",
                                sol.error_bound)
    return MCoefficient(sol.value, sol.error_bound)


def big_M(p_plus: HalfLineProblem, p_minus: HalfLineProblem, lam: complex,
          tol: float = 1e-9) -> tuple[MCoefficient, MCoefficient]:
    """``M_+(lam) = m_+(lam)`` and ``M_-(lam) = -m_-(-lam)``."""
    if p_plus.side != "+" or p_minus.side != "-":
        raise ValueError("expected a (+, -) pair of problems")
    lam = complex(lam)
    mp = m_coefficient(p_plus, lam, tol)
    mm = m_coefficient(p_minus, -lam, tol)
    return mp, MCoefficient(-mm.value, mm.error_bound)


def dirichlet_from_neumann(M: HerglotzFunction) -> HerglotzFunction:
    """``lam -> -1/M(lam)``."""
    return M.neg_reciprocal()


class _Cache:
    def __init__(self):
        self._lock = threading.Lock()
        self._data: dict = {}

    def get(self, key):
        with self._lock:
            return self._data.get(key)

    def put(self, key, value):
        with self._lock:
            self._data[key] = value


def ode_herglotz(p: HalfLineProblem, tol: float = 1e-9, label: str = "") -> HerglotzFunction:
    """Herglotz function ``lam -> m(lam)`` backed by :func:`m_coefficient`.

    Results are memoised per ``lam`` behind a lock, so the object can be
    shared across threads.
    """
    cache = _Cache()

    def f(lam: complex) -> complex:
        hit = cache.get(lam)
        if hit is None:
            hit = m_coefficient(p, lam, tol).value
            cache.put(lam, hit)
        return hit

    return HerglotzFunction(f, label or f"m[{p.side},{p.bc}]", "ode", tol, p)


def ode_big_M(p_plus: HalfLineProblem, p_minus: HalfLineProblem,
              tol: float = 1e-9) -> tuple[HerglotzFunction, HerglotzFunction]:
    """ODE-backed ``M_+`` and ``M_-`` for a pair of half-line problems."""
    mp = ode_herglotz(p_plus, tol, "M_+")
    mm = ode_herglotz(p_minus, tol, "m_-").reflected("M_-")
    return mp, mm
