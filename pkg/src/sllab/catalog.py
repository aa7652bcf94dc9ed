"""Built-in closed forms, spectral measures and problems.

Three indefinite examples are shipped:

* ``sec5``: weight ``(3|x|+1)^(-4/3)``, no potential (odd sign function);
* ``sec6.1``: unit weight, potential ``6(x^4 - 6|x|)/(|x|^3 + 3)^2``;
* ``sec6.2``: unit weight, potential recovered by Gelfand-Levitan from
  ``tau(s) = 1 + (2/pi)(sqrt(s) - atan(sqrt(s)))``.

plus the free problem and two toy pairs.  Each entry is available as
closed-form ``M_+``/``M_-``, as half-line problems where the potential is
explicit, and as spectral measures where they are known.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .herglotz import Atom, Density, HerglotzFunction, SpectralMeasure
from .slode import HalfLineProblem

__all__ = ["ClosedPair", "CLOSED_FORMS", "closed_pair", "MEASURES", "measure",
           "problem_pair", "BUILTIN_FILES", "load_builtin", "builtin_names"]

SEC5_WEIGHT = "(3*abs(x)+1)^(-4/3)"
SEC61_POTENTIAL = "6*(x^4-6*abs(x))/((abs(x)^3+3)^2)"


@dataclass(frozen=True)
class ClosedPair:
    plus: str
    minus: str
    label: str

    def functions(self) -> tuple[HerglotzFunction, HerglotzFunction]:
        return (HerglotzFunction.from_text(self.plus, label=f"{self.label} M+"),
                HerglotzFunction.from_text(self.minus, label=f"{self.label} M-"))


CLOSED_FORMS: dict[str, ClosedPair] = {
    "sec5": ClosedPair("-1/lam + 1/sqrt(-lam)", "-1/lam - 1/sqrt(lam)", "sec5"),
    "sec6.1": ClosedPair("lam/(1 + lam*sqrt(-lam))", "lam/(1 - lam*sqrt(lam))", "sec6.1"),
    "sec6.1-dirichlet": ClosedPair("-1/lam - sqrt(-lam)", "-1/lam + sqrt(lam)",
                                   "sec6.1 Dirichlet"),
    "sec6.2": ClosedPair("-1/lam + 1/(1 + sqrt(-lam))", "-1/lam - 1/(1 + sqrt(lam))",
                         "sec6.2"),
    "free": ClosedPair("1/sqrt(-lam)", "-1/sqrt(lam)", "free"),
    "toy-roots": ClosedPair("-1/lam", "lam", "toy roots"),
}


def closed_pair(name: str) -> tuple[HerglotzFunction, HerglotzFunction]:
    return CLOSED_FORMS[name].functions()


def _sec61_plus() -> SpectralMeasure:
    return SpectralMeasure(
        atoms=(Atom(-1.0, 2.0 / 3.0),),
        density=Density("s^(5/2)/(pi*(1+s^3))", 0.0, math.inf, -0.5, (2.5, None)),
        label="sec6.1 tau+")


MEASURES = {
    "sec5": lambda: SpectralMeasure(
        atoms=(Atom(0.0, 1.0),),
        density=Density("1/(pi*sqrt(s))", 0.0, math.inf, -0.5, (-0.5, None)),
        label="sec5 tau"),
    "sec6.1-plus": _sec61_plus,
    "sec6.1-minus": lambda: _sec61_plus().reflected(),
    "sec6.1-dirichlet": lambda: SpectralMeasure(
        atoms=(Atom(0.0, 1.0),),
        density=Density("sqrt(s)/pi", 0.0, math.inf, 0.5, (0.5, None)),
        regularized=True, constant=-1.0 / math.sqrt(2.0), label="sec6.1 tau_inf"),
    "sec6.2": lambda: SpectralMeasure(
        atoms=(Atom(0.0, 1.0),),
        density=Density("sqrt(s)/(pi*(1+s))", 0.0, math.inf, -0.5, (0.5, None)),
        label="sec6.2 tau"),
    "free": lambda: SpectralMeasure(
        density=Density("1/(pi*sqrt(s))", 0.0, math.inf, -0.5, (-0.5, None)),
        label="free Neumann"),
}


def measure(name: str) -> SpectralMeasure:
    return MEASURES[name]()


def problem_pair(name: str, bc: str = "neumann",
                 potential_func=None) -> tuple[HalfLineProblem, HalfLineProblem]:
    """``(p_plus, p_minus)`` for a built-in problem.

    ``sec6.2`` needs the reconstructed potential as ``potential_func``.
    """
    if name == "sec5":
        w, q = SEC5_WEIGHT, "0"
    elif name == "sec6.1":
        w, q = "1", SEC61_POTENTIAL
    elif name == "free":
        w, q = "1", "0"
    elif name == "sec6.2":
        if potential_func is None:
            raise ValueError("sec6.2 needs the reconstructed potential")
        w, q = "1", "0"
    else:
        raise KeyError(name)
    return (HalfLineProblem(w, q, "+", bc, potential_func),
            HalfLineProblem(w, q, "-", bc, potential_func))


BUILTIN_FILES = {
    "paper-sec5": "sec5.json",
    "paper-sec6.1": "sec6_1.json",
    "paper-sec6.2": "sec6_2.json",
    "free": "free.json",
    "toy-roots": "toy_roots.json",
}


def builtin_names() -> list[str]:
    return sorted(BUILTIN_FILES)


def load_builtin(name: str) -> Optional[dict]:
    """Parsed JSON of a shipped problem file, or ``None`` if unknown."""
    fname = BUILTIN_FILES.get(name)
    if fname is None:
        return None
    text = resources.files("sllab").joinpath("problems", fname).read_text()
    return json.loads(text)
