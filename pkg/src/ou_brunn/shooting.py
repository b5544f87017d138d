"""One-dimensional shooting oracles for the first Dirichlet eigenvalue of -L.

The Ornstein-Uhlenbeck operator ``L u = u'' - x u'`` on an interval, and its
radial form ``u'' + ((n-1)/r - r) u'`` on a centred ball, are integrated with
fixed-step RK4.  The eigenvalue is located by bisection on the monotone
predicate "the shot solution has a zero in the half-open domain", which by
Sturm comparison switches exactly once at the first eigenvalue.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BracketError",
    "TruncationError",
    "OdeProblem",
    "OdeEigenResult",
    "solve_interval",
    "solve_halfline",
    "solve_radial",
    "DEFAULT_BRACKET",
]

DEFAULT_BRACKET = (1e-6, 50.0)
_DEFAULT_STEP = 1e-3


class BracketError(RuntimeError):
    """No switch of the zero-count predicate inside the eigenvalue bracket."""


class TruncationError(RuntimeError):
    """The half-line proxy moved by more than the tolerance when the wall was pushed out."""


@dataclass(frozen=True)
class OdeProblem:
    kind: str  # "interval" | "halfline" | "radial"
    a: float
    b: float
    dim: int = 1
    step: float = _DEFAULT_STEP
    bracket: tuple[float, float] = DEFAULT_BRACKET

    def __post_init__(self):
        if self.kind not in ("interval", "halfline", "radial"):
            raise ValueError(f"unknown problem kind {self.kind!r}")
        if not self.a < self.b:
            raise ValueError("need a < b")
        if self.step <= 0:
            raise ValueError("step must be positive")
        lo, hi = self.bracket
        if not 0 < lo < hi:
            raise ValueError("bracket must satisfy 0 < lo < hi")

    @property
    def nsteps(self) -> int:
        return max(200, int(math.ceil((self.b - self.a) / self.step)))


@dataclass
class OdeEigenResult:
    lam: float
    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    residual: float
    boundary_value: float
    problem: OdeProblem
    extra: dict = field(default_factory=dict)


def _rk4(problem: OdeProblem, lam: float, record: bool = False):
    """Integrate one shot; returns ``(has_zero, xs, us, vs)``."""
    n_steps = problem.nsteps
    if problem.kind == "radial":
        n = problem.dim
        dr = (problem.b - problem.a) / n_steps
        # regular singular point at r = 0: Taylor start one step out
        x = problem.a + dr
        u = 1.0 - lam * x * x / (2 * n)
        v = -lam * x / n
        n_steps -= 1

        def acc(x, u, v):
            return -((n - 1) / x - x) * v - lam * u

    else:
        dr = (problem.b - problem.a) / n_steps
        x, u, v = problem.a, 0.0, 1.0

        def acc(x, u, v):
            return x * v - lam * u

    xs, us, vs = ([x], [u], [v]) if record else (None, None, None)
    half = 0.5 * dr
    has_zero = False
    for _ in range(n_steps):
        a1 = acc(x, u, v)
        u2, v2 = u + half * v, v + half * a1
        a2 = acc(x + half, u2, v2)
        u3, v3 = u + half * v2, v + half * a2
        a3 = acc(x + half, u3, v3)
        u4, v4 = u + dr * v3, v + dr * a3
        a4 = acc(x + dr, u4, v4)
        u += dr / 6.0 * (v + 2 * v2 + 2 * v3 + v4)
        v += dr / 6.0 * (a1 + 2 * a2 + 2 * a3 + a4)
        x += dr
        if record:
            xs.append(x)
            us.append(u)
            vs.append(v)
        if u <= 0.0:
            has_zero = True
            if not record:
                break
    if record:
        return has_zero, np.array(xs), np.array(us), np.array(vs)
    return has_zero, None, None, None


def _ode_residual(problem: OdeProblem, lam: float, x, u, v) -> float:
    """Max ODE residual with ``u''`` from a sixth-order difference of the RK4 slopes."""
    dx = x[1] - x[0]
    dv = (v[6:] - 9 * v[5:-1] + 45 * v[4:-2] - 45 * v[2:-4] + 9 * v[1:-5] - v[:-6]) / (60 * dx)
    xm, um, vm = x[3:-3], u[3:-3], v[3:-3]
    if problem.kind == "radial":
        n = problem.dim
        res = dv + ((n - 1) / xm - xm) * vm + lam * um
        # the 1/r coefficient dominates the RK4 error in the Taylor start layer
        res = res[xm > 10 * dx]
    else:
        res = dv - xm * vm + lam * um
    return float(np.max(np.abs(res)) / np.max(np.abs(u)))


def _first_mode(problem: OdeProblem, tol: float) -> OdeEigenResult:
    lo, hi = problem.bracket
    if _rk4(problem, lo)[0]:
        raise BracketError(f"lower bracket {lo} already above the first eigenvalue")
    if not _rk4(problem, hi)[0]:
        raise BracketError(f"upper bracket {hi} below the first eigenvalue; widen it")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _rk4(problem, mid)[0]:
            hi = mid
        else:
            lo = mid
    lam = 0.5 * (lo + hi)
    # record the shot just below the eigenvalue: positive on the whole open domain
    _, x, u, v = _rk4(problem, lo, record=True)
    scale = np.max(u)
    u, v = u / scale, v / scale
    residual = _ode_residual(problem, lam, x, u, v)
    return OdeEigenResult(lam, x, u, v, residual, float(abs(u[-1])), problem)


def solve_interval(a: float, b: float, tol: float = 1e-9, step: float = _DEFAULT_STEP,
                   bracket: tuple[float, float] = DEFAULT_BRACKET) -> OdeEigenResult:
    """First eigenpair of ``u'' - x u' + lam u = 0`` on ``(a, b)`` with Dirichlet ends."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    return _first_mode(OdeProblem("interval", a, b, 1, step, bracket), tol)


def solve_halfline(a: float, T: float = 8.0, tol: float = 1e-9, step: float = _DEFAULT_STEP,
                   bracket: tuple[float, float] = DEFAULT_BRACKET) -> OdeEigenResult:
    """Half-line ``(-inf, a)`` approximated by ``(-T, a)``; checked against ``(-T-2, a)``."""
    if T < 6:
        raise ValueError("truncation T must be at least 6")
    if a <= -T + 1:
        raise ValueError("offset too close to the truncation wall; increase T")
    res = _first_mode(OdeProblem("halfline", -T, a, 1, step, bracket), tol)
    wider = _first_mode(OdeProblem("halfline", -T - 2.0, a, 1, step, bracket), tol)
    delta = abs(wider.lam - res.lam)
    res.extra["truncation_delta"] = delta
    if delta > max(tol, 1e-12) * 10:
        raise TruncationError(f"half-line eigenvalue moved by {delta:.3g} for T -> T+2; increase T")
    return res


def solve_radial(n: int, R: float, tol: float = 1e-9, step: float = _DEFAULT_STEP,
                 bracket: tuple[float, float] = DEFAULT_BRACKET) -> OdeEigenResult:
    """First eigenpair of the origin-centred ball of radius ``R`` in ``R^n`` (``n >= 2``)."""
    if int(n) != n or n < 2:
        raise ValueError("radial problems need n >= 2; use solve_interval in 1D")
    if R <= 0:
        raise ValueError("radius must be positive")
    return _first_mode(OdeProblem("radial", 0.0, R, int(n), step, bracket), tol)
