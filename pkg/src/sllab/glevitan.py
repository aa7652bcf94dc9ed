"""Gelfand-Levitan reconstruction of a Neumann potential.

For a spectral function ``tau`` of ``-y'' + q y = lam y`` on the half-line
with ``y'(0) = 0``, the kernel

    f(x, y) = int cos(sqrt(s) x) cos(sqrt(s) y) d(tau - tau0)(s),

``tau0(s) = 2 sqrt(s) / pi``, drives the integral equation

    K(x, y) + f(x, y) + int_0^x K(x, t) f(t, y) dt = 0,   0 <= y <= x,

and the potential is ``q(x) = 2 d/dx K(x, x)``.

Here ``f`` is semi-separable, ``f(t, y) = sum_i a_i(max) b_i(min)``.  With
``U_i(y) = int_0^y K b_i`` and ``W_i(y) = a_i(x) + int_y^x K a_i`` the
equation becomes the linear ODE

    U' = -b (a.U + b.W),   W' = a (a.U + b.W),   K = -(a.U + b.W),

with ``U(0) = 0`` and ``W(x) = a(x)``.  Its fundamental matrix started
from ``(U, W) = (0, I)`` does not depend on ``x``, so one integration
serves every ``x``: the row ``K(x, .)`` follows from an ``n x n`` solve.
The columns grow at different exponential rates, so the matrix is
re-orthonormalised (QR) at the end of every unit segment.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from . import exprparse as ep
from .herglotz import Density, SpectralMeasure
from .krein import richardson_derivative

__all__ = [
    "SeparableKernel", "TabulatedKernel", "FREE_NEUMANN", "build_kernel",
    "GLSolver", "KernelRow", "GLSingularError", "gl_solve", "gl_residual",
    "gl_potential", "PotentialTable", "nystrom_solve", "TabulatedPotential",
]

FREE_NEUMANN = SpectralMeasure(
    density=Density("1/(pi*sqrt(s))", 0.0, math.inf, -0.5, (-0.5, None)),
    label="free Neumann", validate=False)


class GLSingularError(ArithmeticError):
    """The n x n system for the kernel row is (numerically) singular."""

    def __init__(self, x: float, cond: float):
        super().__init__(f"singular Gelfand-Levitan system at x={x:g} (condition {cond:.3g})")
        self.x = x
        self.cond = cond


# --------------------------------------------------------------------------
# Kernels
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class SeparableKernel:
    """``f(t, y) = sum_i a_i(max(t, y)) b_i(min(t, y))``.

    ``a_exprs`` are expressions in ``x``, ``b_exprs`` in ``y``.
    """

    a_exprs: tuple[str, ...] = ()
    b_exprs: tuple[str, ...] = ()
    provenance: str = "closed-form"

    def __post_init__(self):
        object.__setattr__(self, "a_exprs", tuple(self.a_exprs))
        object.__setattr__(self, "b_exprs", tuple(self.b_exprs))
        if len(self.a_exprs) != len(self.b_exprs):
            raise ValueError("a and b need the same number of terms")
        object.__setattr__(self, "_a", [ep.Function(t, "x") for t in self.a_exprs])
        object.__setattr__(self, "_b", [ep.Function(t, "y") for t in self.b_exprs])

    @property
    def rank(self) -> int:
        return len(self.a_exprs)

    def a(self, x: float) -> np.ndarray:
        return np.array([f._f(x) for f in self._a])

    def b(self, y: float) -> np.ndarray:
        return np.array([f._f(y) for f in self._b])

    def da(self, x: float) -> np.ndarray:
        return np.array([richardson_derivative(f._f, x, 1e-4)[0] for f in self._a])

    def db(self, y: float) -> np.ndarray:
        return np.array([richardson_derivative(f._f, y, 1e-4)[0] for f in self._b])

    def __call__(self, t, y):
        t_arr, y_arr = np.broadcast_arrays(np.asarray(t, float), np.asarray(y, float))
        out = np.empty(t_arr.shape)
        for idx in np.ndindex(t_arr.shape):
            hi, lo = max(t_arr[idx], y_arr[idx]), min(t_arr[idx], y_arr[idx])
            out[idx] = float(self.a(hi) @ self.b(lo)) if self.rank else 0.0
        return out if out.ndim else float(out)

    def to_dict(self) -> dict:
        return {"rank": self.rank, "a_exprs": list(self.a_exprs),
                "b_exprs": list(self.b_exprs), "provenance": self.provenance}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "SeparableKernel":
        k = cls(tuple(data["a_exprs"]), tuple(data["b_exprs"]),
                data.get("provenance", "closed-form"))
        if "rank" in data and data["rank"] != k.rank:
            raise ValueError("rank does not match the number of terms")
        return k


@dataclass(frozen=True)
class TabulatedKernel:
    """``f(t, y) = (F(|t - y|) + F(t + y)) / 2 + separable atom terms``.

    ``F`` is the cosine transform of the continuous part of the measure
    difference, tabulated on ``[0, u_max]`` and interpolated by a cubic
    spline.
    """

    u: np.ndarray
    F: np.ndarray
    atoms: SeparableKernel = field(default_factory=SeparableKernel)
    provenance: str = "oscillatory quadrature"

    def __post_init__(self):
        object.__setattr__(self, "_spline", CubicSpline(self.u, self.F))

    @property
    def u_max(self) -> float:
        return float(self.u[-1])

    def __call__(self, t, y):
        t, y = np.asarray(t, float), np.asarray(y, float)
        if np.any(t + y > self.u_max * (1 + 1e-12)):
            raise ValueError("kernel evaluated outside its tabulated range")
        val = 0.5 * (self._spline(np.abs(t - y)) + self._spline(t + y))
        if self.atoms.rank:
            val = val + self.atoms(t, y)
        return val if np.ndim(val) else float(val)


def _snap(v: float) -> float:
    """Round to a nearby small-denominator rational if within 1e-9."""
    frac = Fraction(v).limit_denominator(1000)
    return float(frac) if abs(float(frac) - v) <= 1e-9 * max(1.0, abs(v)) else v


def _num(v: float) -> str:
    text = ep.to_text(ep.Num(abs(v)))
    return text if v >= 0 else f"(-{text})"


def _atom_terms(atoms) -> tuple[list[str], list[str]]:
    a_list, b_list = [], []
    for s, w in atoms:
        if s == 0:
            a_list.append(_num(w))
            b_list.append("1")
        elif s > 0:
            k = _num(_snap(math.sqrt(s)))
            a_list.append(f"{_num(w)}*cos({k}*x)")
            b_list.append(f"cos({k}*y)")
        else:
            k = _num(_snap(math.sqrt(-s)))
            a_list.append(f"{_num(w)}*cosh({k}*x)")
            b_list.append(f"cosh({k}*y)")
    return a_list, b_list


def _density_difference(mu: SpectralMeasure, ref: SpectralMeasure) -> Callable[[float], float]:
    dm, dr = mu.density, ref.density

    def g(s):
        v = 0.0
        if dm is not None and dm.a <= s <= dm.b:
            v += dm(s)
        if dr is not None and dr.a <= s <= dr.b:
            v -= dr(s)
        return v

    return g


def _match_lorentzian(g: Callable[[float], float]) -> Optional[tuple[float, float]]:
    """Fit ``g(s) = C / (pi sqrt(s) (s + alpha^2))``; return ``(C, alpha)``."""
    ss = np.geomspace(1e-3, 1e3, 25)
    h = np.array([g(s) * math.pi * math.sqrt(s) for s in ss])
    if np.any(h == 0) or np.any(np.sign(h) != np.sign(h[0])):
        return None
    inv = 1.0 / h
    slope, icpt = np.polyfit(ss, inv, 1, w=1.0 / np.abs(inv))
    if not np.allclose(slope * ss + icpt, inv, rtol=1e-10, atol=0):
        return None
    C = 1.0 / slope
    beta = icpt * C
    if not beta > 0:
        return None
    return _snap(C), _snap(math.sqrt(beta))


def build_kernel(mu: SpectralMeasure, ref: SpectralMeasure = FREE_NEUMANN, *,
                 method: str = "auto", u_max: float = 40.0,
                 n_table: int = 801) -> Union[SeparableKernel, TabulatedKernel]:
    """Kernel ``f`` of the measure difference ``mu - ref``.

    Atoms give separable ``cos``/``cosh`` terms.  A continuous difference
    of the form ``C / (pi sqrt(s) (s + alpha^2))`` has the closed-form
    transform ``(C / (2 alpha)) e^{-alpha x} (e^{alpha y} + e^{-alpha y})``
    for ``y <= x``; any other difference is tabulated by oscillatory
    quadrature (``method="numeric"`` forces this route).
    """
    if mu.regularized or ref.regularized:
        raise ValueError("the cosine kernel needs unregularized measures")
    atoms: dict[float, float] = {}
    for at in mu.atoms:
        atoms[at.s] = atoms.get(at.s, 0.0) + at.w
    for at in ref.atoms:
        atoms[at.s] = atoms.get(at.s, 0.0) - at.w
    atom_list = [(s, w) for s, w in sorted(atoms.items()) if w != 0]
    a_list, b_list = _atom_terms(atom_list)
    g = _density_difference(mu, ref)
    for d in (mu.density, ref.density):
        if d is not None and d.a < 0:
            raise ValueError("densities on the negative axis are not supported")

    samples = [g(s) for s in np.geomspace(1e-3, 1e3, 25)]
    if all(v == 0 for v in samples):
        return SeparableKernel(tuple(a_list), tuple(b_list), "closed-form (atoms only)")
    if method != "numeric":
        fit = _match_lorentzian(g)
        if fit is not None:
            C, alpha = fit
            amp = _num(_snap(C / (2 * alpha)))
            al = _num(alpha) if alpha != 1 else ""
            ex = f"{al}*x" if al else "x"
            ey = f"{al}*y" if al else "y"
            a_list += [f"{amp}*exp(-{ex})", f"{amp}*exp(-{ex})"]
            b_list += [f"exp({ey})", f"exp(-{ey})"]
            return SeparableKernel(tuple(a_list), tuple(b_list), "closed-form")
        if method == "closed":
            raise ValueError("measure difference is not in the closed-form table")
    u = np.linspace(0.0, u_max, n_table)
    F = np.array([_cosine_transform(g, ui) for ui in u])
    return TabulatedKernel(u, F, SeparableKernel(tuple(a_list), tuple(b_list)))


def _cosine_transform(g: Callable[[float], float], u: float) -> float:
    """``int_0^inf cos(k u) 2 k g(k^2) dk`` (QAWF on the tail)."""
    def h(k):
        return 2.0 * k * g(k * k)
    head = integrate.quad(lambda k: h(k) * math.cos(k * u), 0.0, 1.0, epsabs=1e-13,
                          epsrel=1e-12, limit=400)[0]
    if u == 0:
        tail = integrate.quad(h, 1.0, math.inf, epsabs=1e-13, epsrel=1e-12, limit=400)[0]
    else:
        tail = integrate.quad(lambda k: h(k + 1.0), 0.0, math.inf, weight="cos", wvar=u,
                              epsabs=1e-13, limit=400)[0] * math.cos(u) \
            - integrate.quad(lambda k: h(k + 1.0), 0.0, math.inf, weight="sin", wvar=u,
                             epsabs=1e-13, limit=400)[0] * math.sin(u)
    return head + tail


# --------------------------------------------------------------------------
# Semi-separable solver
# --------------------------------------------------------------------------

@dataclass
class _Segment:
    y0: float
    y1: float
    scale: np.ndarray    # row scaling D: Z = D * Zhat on this segment
    sol: object          # OdeSolution for Zhat, starting from Q
    R_end: np.ndarray    # Z(y1) = D_next Q_next R_end


class KernelRow:
    """``K(x, .)`` on ``[0, x]`` for one ``x``.

    ``coefficients[j]`` multiplies the segment-``j`` basis, i.e.
    ``K(x, y) = -v(y) . Zseg_j(y) coefficients[j]`` for ``y`` in segment
    ``j``, with ``v = (a, b)``.
    """

    def __init__(self, solver: "GLSolver", x: float, coefficients: list[np.ndarray],
                 cond: float):
        self.solver = solver
        self.x = x
        self.coefficients = coefficients
        self.cond = cond

    def __call__(self, y):
        y_arr = np.atleast_1d(np.asarray(y, float))
        out = np.empty(len(y_arr))
        for k, yy in enumerate(y_arr):
            if yy < 0 or yy > self.x * (1 + 1e-12):
                raise ValueError(f"y={yy} outside [0, {self.x}]")
            out[k] = (self.solver._k_value(min(yy, self.x), self.coefficients)
                      if self.coefficients else 0.0)
        return out if np.ndim(y) else float(out[0])


class GLSolver:
    """Fundamental-matrix solver for a :class:`SeparableKernel`.

    The matrix is integrated lazily up to the largest ``x`` requested.
    """

    def __init__(self, kernel: SeparableKernel, segment: float = 1.0,
                 rtol: float = 1e-13, atol: float = 1e-15, cond_max: float = 1e12):
        if not isinstance(kernel, SeparableKernel):
            raise TypeError("GLSolver needs a SeparableKernel")
        self.kernel = kernel
        self.n = kernel.rank
        self.segment = segment
        self.rtol, self.atol = rtol, atol
        self.cond_max = cond_max
        self.segments: list[_Segment] = []
        self._Q = np.vstack([np.zeros((self.n, self.n)), np.eye(self.n)])
        self._scale = np.ones(2 * self.n)

    def _rhs(self, y, z, scale):
        n = self.n
        Z = z.reshape(2 * n, n)
        a, b = self.kernel.a(y), self.kernel.b(y)
        k = -(a * scale[:n]) @ Z[:n] - (b * scale[n:]) @ Z[n:]
        return np.concatenate([np.outer(b / scale[:n], k),
                               -np.outer(a / scale[n:], k)]).ravel()

    def _extend(self, x: float) -> None:
        # Rows of Z grow or decay at different exponential rates, columns
        # align with the dominant mode.  Each unit segment integrates a
        # row-scaled copy and re-orthonormalises the columns at its end.
        while not self.segments or self.segments[-1].y1 < x:
            y0 = self.segments[-1].y1 if self.segments else 0.0
            y1 = y0 + self.segment
            scale = self._scale
            sol = solve_ivp(self._rhs, (y0, y1), self._Q.ravel(), method="DOP853",
                            rtol=self.rtol, atol=self.atol, dense_output=True,
                            args=(scale,))
            if sol.status != 0:
                raise RuntimeError(f"kernel integration failed: {sol.message}")
            Zend = sol.y[:, -1].reshape(2 * self.n, self.n)
            norms = np.abs(Zend).max(axis=1)
            # rows at round-off level must not be blown up to size one
            norms = np.maximum(norms, 1e-8 * norms.max())
            Q, R = np.linalg.qr(Zend / norms[:, None])
            self.segments.append(_Segment(y0, y1, scale, sol.sol, R))
            self._Q = Q
            self._scale = scale * norms

    def _seg_index(self, y: float) -> int:
        j = int(y // self.segment)
        return min(j, len(self.segments) - 1) if y >= self.segments[-1].y1 else j

    def _Zseg(self, y: float) -> np.ndarray:
        j = self._seg_index(y)
        seg = self.segments[j]
        return j, seg.scale[:, None] * seg.sol(y).reshape(2 * self.n, self.n)

    def _k_value(self, y: float, coefficients: list[np.ndarray]) -> float:
        j, Z = self._Zseg(y)
        v = np.concatenate([self.kernel.a(y), self.kernel.b(y)])
        return float(-(v @ Z) @ coefficients[j])

    def _local(self, x: float):
        self._extend(x)
        j = self._seg_index(x)
        seg = self.segments[j]
        n = self.n
        Zhat = seg.sol(x).reshape(2 * n, n)
        # Work in the row-scaled coordinates of the segment, where rows
        # and columns of the basis have size about one.
        Ghat = Zhat[n:]
        ahat = self.kernel.a(x) / seg.scale[n:]
        cs = np.abs(Zhat).max(axis=0)
        cs[cs == 0] = 1.0
        Gs = Ghat / cs[None, :]
        sv = np.linalg.svd(Gs, compute_uv=False)
        cond = float(1.0 / sv[-1]) if sv[-1] > 0 else math.inf
        if not np.isfinite(cond) or cond > self.cond_max:
            raise GLSingularError(x, cond)
        d = np.linalg.solve(Gs, ahat) / cs
        return j, seg.scale[:, None] * Zhat, d, cond

    def row(self, x: float) -> KernelRow:
        """Solve for ``K(x, .)``."""
        if not x > 0:
            raise ValueError("x must be positive")
        if self.n == 0:
            return KernelRow(self, x, [], 1.0)
        j, Z, d, cond = self._local(x)
        coeffs = [None] * (j + 1)
        coeffs[j] = d
        for i in range(j - 1, -1, -1):
            coeffs[i] = np.linalg.solve(self.segments[i].R_end, coeffs[i + 1])
        return KernelRow(self, x, coeffs, cond)

    def diagonal(self, x: float) -> float:
        """``K(x, x)``."""
        if self.n == 0:
            return 0.0
        j, Z, d, _ = self._local(x)
        v = np.concatenate([self.kernel.a(x), self.kernel.b(x)])
        return float(-(v @ Z) @ d)

    def diagonal_derivative(self, x: float) -> float:
        """``d/dx K(x, x)`` from the differentiated linear solve.

        With ``K(x, x) = -v(x).Z(x) c(x)`` and ``Z' = (-b; a) v^T Z`` the
        middle term vanishes (``v.(-b; a) = 0``), leaving
        ``-v'.Z c - v.Z c'`` where ``G c' = a' - G' c``.
        """
        if self.n == 0:
            return 0.0
        n = self.n
        j, Z, d, _ = self._local(x)
        a, b = self.kernel.a(x), self.kernel.b(x)
        da, db = self.kernel.da(x), self.kernel.db(x)
        v = np.concatenate([a, b])
        dv = np.concatenate([da, db])
        w = np.concatenate([-b, a])
        dZ = np.outer(w, v @ Z)
        G, dG = Z[n:], dZ[n:]
        dd = np.linalg.solve(G, da - dG @ d)
        return float(-(dv @ Z) @ d - (v @ Z) @ dd)


def gl_solve(f: Union[SeparableKernel, TabulatedKernel], x: float,
             solver: Optional[GLSolver] = None) -> Union[KernelRow, Callable]:
    """Kernel row ``K(x, .)``; Nyström for tabulated kernels."""
    if isinstance(f, TabulatedKernel):
        return nystrom_solve(f, x)
    solver = solver or GLSolver(f)
    return solver.row(x)


def gl_residual(f, row, x: float, ys: Sequence[float]) -> np.ndarray:
    """``K + f + int_0^x K(x,t) f(t,y) dt`` at ``ys`` by adaptive quadrature."""
    out = []
    for y in ys:
        def integrand(t):
            return row(t) * f(t, y)
        pts = [y] if 0 < y < x else None
        val = integrate.quad(integrand, 0.0, x, points=pts, epsabs=1e-14, epsrel=1e-13,
                             limit=400)[0]
        out.append(row(y) + f(x, y) + val)
    return np.array(out)


# --------------------------------------------------------------------------
# Nyström oracle
# --------------------------------------------------------------------------

class _ChebRow:
    def __init__(self, nodes, values, weights, x):
        self.nodes, self.values, self.weights, self.x = nodes, values, weights, x

    def __call__(self, y):
        return _barycentric(self.nodes, self.weights, self.values, np.asarray(y, float))


def _barycentric(nodes, weights, values, y):
    y_arr = np.atleast_1d(y)
    diff = y_arr[:, None] - nodes[None, :]
    exact = diff == 0
    diff[exact] = 1.0
    tmp = weights[None, :] / diff
    out = (tmp @ values) / tmp.sum(axis=1)
    rows, cols = np.nonzero(exact)
    out[rows] = values[cols]
    return out if np.ndim(y) else float(out[0])


def _interp_matrix(nodes, weights, pts):
    diff = pts[:, None] - nodes[None, :]
    exact = diff == 0
    diff[exact] = 1.0
    tmp = weights[None, :] / diff
    L = tmp / tmp.sum(axis=1, keepdims=True)
    rows, cols = np.nonzero(exact)
    L[rows] = 0.0
    L[rows, cols] = 1.0
    return L


def nystrom_solve(f, x: float, n: int = 200, order: int = 64) -> _ChebRow:
    """Dense collocation solve of the integral equation at fixed ``x``.

    ``K(x, .)`` is represented by its values at ``n`` Chebyshev points
    on ``[0, x]``; the integral is split at the collocation point (where
    ``f`` has a kink) and evaluated with Gauss-Legendre rules on each
    side.  Independent of the ODE route and used as its oracle.
    """
    j = np.arange(n)
    nodes = 0.5 * x * (1 - np.cos(np.pi * j / (n - 1)))
    weights = (-1.0) ** j
    weights[0] *= 0.5
    weights[-1] *= 0.5
    gx, gw = np.polynomial.legendre.leggauss(order)
    A = np.eye(n)
    rhs = np.empty(n)
    for i, y in enumerate(nodes):
        rhs[i] = -f(x, y)
        for lo, hi in ((0.0, y), (y, x)):
            if hi - lo <= 0:
                continue
            t = 0.5 * (hi - lo) * gx + 0.5 * (hi + lo)
            wts = 0.5 * (hi - lo) * gw * np.asarray(f(t, np.full_like(t, y)), float)
            A[i] += wts @ _interp_matrix(nodes, weights, t)
    values = np.linalg.solve(A, rhs)
    return _ChebRow(nodes, values, weights, x)


# --------------------------------------------------------------------------
# Potential
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class PotentialTable:
    x: np.ndarray
    q: np.ndarray
    error: np.ndarray
    singular: tuple = ()

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["x", "q", "error_estimate", "flag"])
        bad = set(self.singular)
        for k in range(len(self.x)):
            flag = "singular" if k in bad else ""
            wr.writerow([f"{self.x[k]:.12g}", f"{self.q[k]:.12g}",
                         f"{self.error[k]:.12g}", flag])
        return buf.getvalue()


def gl_potential(f: SeparableKernel, x_grid: Sequence[float], *, h: float = 1e-4,
                 solver: Optional[GLSolver] = None, strict: bool = True) -> PotentialTable:
    """``q(x) = 2 d/dx K(x, x)`` on ``x_grid``.

    The derivative comes from the differentiated coefficient solve; the
    error estimate is its distance to a Richardson-extrapolated central
    difference of ``K(x, x)`` with step ``h`` (forward near ``x = 0``).
    Rows where the linear system is singular raise
    :class:`GLSingularError`, or with ``strict=False`` are recorded in
    ``singular`` with NaN values.
    """
    if not isinstance(f, SeparableKernel):
        raise TypeError("gl_potential needs a SeparableKernel")
    solver = solver or GLSolver(f)
    xs = np.asarray(x_grid, float)
    q = np.empty(len(xs))
    err = np.empty(len(xs))
    singular = []
    diag = solver.diagonal
    for k, x in enumerate(xs):
        try:
            if x <= 0 and f.rank:
                # K(0, 0) = -f(0, 0); the linear solve needs x > 0
                analytic = None
            else:
                analytic = 2 * solver.diagonal_derivative(x)
            fd, _ = richardson_derivative(_diag_with_origin(f, diag), x, h, lower=0.0)
            fd *= 2
        except GLSingularError:
            if strict:
                raise
            singular.append(k)
            q[k] = err[k] = math.nan
            continue
        if analytic is None:
            q[k], err[k] = fd, abs(fd - 2 * _one_sided_fd(_diag_with_origin(f, diag), h))
        else:
            q[k], err[k] = analytic, abs(analytic - fd)
    return PotentialTable(xs, q, err, tuple(singular))


def _diag_with_origin(f: SeparableKernel, diag: Callable[[float], float]):
    def g(x):
        if x <= 0:
            return -float(f(0.0, 0.0))
        return diag(x)
    return g


def _one_sided_fd(g, h):
    return (-3 * g(0.0) + 4 * g(h) - g(2 * h)) / (2 * h)


class TabulatedPotential:
    """Cubic-spline potential with a fitted power-law tail.

    Beyond the table the potential continues as ``C x^p`` with ``p`` and
    ``C`` fitted on the last fifth of the table (log-log least squares).
    """

    def __init__(self, x: Sequence[float], q: Sequence[float]):
        self.x = np.asarray(x, float)
        self.q = np.asarray(q, float)
        self._spline = CubicSpline(self.x, self.q)
        tail = self.x >= self.x[0] + 0.8 * (self.x[-1] - self.x[0])
        xt, qt = self.x[tail], self.q[tail]
        if np.all(qt != 0) and np.all(np.sign(qt) == np.sign(qt[-1])) and xt[0] > 0:
            p, lc = np.polyfit(np.log(xt), np.log(np.abs(qt)), 1)
            self.tail_power = float(p)
            self.tail_coef = float(np.sign(qt[-1]) * math.exp(lc))
        else:
            self.tail_power, self.tail_coef = 0.0, 0.0
        self.x_max = float(self.x[-1])

    def __call__(self, x: float) -> float:
        x = abs(float(x))
        if x <= self.x_max:
            return float(self._spline(x))
        return self.tail_coef * x ** self.tail_power
