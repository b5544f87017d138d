"""Discrete checks of log-concavity and related shape properties of grid eigenfunctions.

All checks work on the core ``{u >= tau * max u}``; they return a
:class:`CheckReport` with the worst margin found and never raise on a
violated property.  Thresholds belong to the caller.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage

from .grid import GridFunction

__all__ = [
    "LogField",
    "CheckReport",
    "discrete_hessian",
    "core_hessians",
    "check_midpoint_logconcavity",
    "check_strong_logconcavity",
    "check_laplacian_sign",
    "check_starshaped_gradient",
]

DEFAULT_TAU = 0.01
# lattice layers next to a Dirichlet face dropped from Hessian-based checks
DEFAULT_BOUNDARY_LAYERS = 5


@dataclass(frozen=True, eq=False)
class LogField:
    """``W = -ln u`` restricted to the core ``{u >= tau max u}``.

    With ``boundary_layers = k`` the core also drops every node within ``k``
    lattice steps (chessboard metric) of a node outside the interior mask;
    the cut boundary faces perturb second differences of ``W`` there.
    """

    u: GridFunction
    tau: float = DEFAULT_TAU
    floor: float = 1e-300
    boundary_layers: int = 0

    @property
    def grid(self):
        return self.u.grid

    @property
    def core(self) -> np.ndarray:
        """Core mask on the full rectangular grid."""
        full = self.u.full()
        core = (full >= self.tau * full.max()) & (full > self.floor)
        if self.boundary_layers > 0:
            depth = ndimage.distance_transform_cdt(self.grid.mask, metric="chessboard")
            core &= depth > self.boundary_layers
        return core

    def full(self) -> np.ndarray:
        """``W`` on the rectangular grid, ``+inf`` outside the core."""
        full = self.u.full()
        core = self.core
        out = np.full(full.shape, np.inf)
        out[core] = -np.log(full[core])
        if not core.any():
            raise ValueError("empty core")
        return out


@dataclass
class CheckReport:
    check: str
    margin: float
    location: list | None
    violations: int = 0
    samples: int = 0
    h: float = float("nan")
    tau: float = float("nan")
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _point(grid, idx) -> list:
    return [float(ax[i]) for ax, i in zip(grid.axes, idx)]


def _stencil_ok(core: np.ndarray, diagonal: bool) -> np.ndarray:
    """Nodes whose full second-difference stencil lies in the core."""
    ok = core.copy()
    n = core.ndim
    offsets = itertools.product((-1, 0, 1), repeat=n) if diagonal else (
        tuple(s if k == ax else 0 for k in range(n)) for ax in range(n) for s in (-1, 1)
    )
    for off in offsets:
        shifted = np.zeros_like(core)
        src = tuple(slice(max(-o, 0), core.shape[k] - max(o, 0)) for k, o in enumerate(off))
        dst = tuple(slice(max(o, 0), core.shape[k] - max(-o, 0)) for k, o in enumerate(off))
        # shifted[x] = core[x + off]
        shifted[src] = core[dst]
        ok &= shifted
    return ok


def _hessian_field(W: np.ndarray, h: float) -> np.ndarray:
    """Central second differences everywhere inside the array, shape ``W.shape + (n, n)``."""
    n = W.ndim
    H = np.full(W.shape + (n, n), np.nan)
    inner = tuple(slice(1, -1) for _ in range(n))

    def sh(off):
        return W[tuple(slice(1 + o, W.shape[k] - 1 + o) for k, o in enumerate(off))]

    c = sh((0,) * n)
    for i in range(n):
        e = [0] * n
        e[i] = 1
        p, m = sh(tuple(e)), sh(tuple(-x for x in e))
        H[inner + (i, i)] = (p - 2 * c + m) / h**2
        for j in range(i + 1, n):
            f = [0] * n
            f[j] = 1
            pp = sh(tuple(a + b for a, b in zip(e, f)))
            pm = sh(tuple(a - b for a, b in zip(e, f)))
            mp = sh(tuple(-a + b for a, b in zip(e, f)))
            mm = sh(tuple(-a - b for a, b in zip(e, f)))
            H[inner + (i, j)] = H[inner + (j, i)] = (pp - pm - mp + mm) / (4 * h**2)
    return H


def discrete_hessian(W: LogField, node) -> np.ndarray | None:
    """Second-difference Hessian of ``W`` at a multi-index ``node``.

    Returns ``None`` when the 3^n stencil leaves the core.
    """
    node = tuple(int(i) for i in np.atleast_1d(node))
    full = W.full()
    n = full.ndim
    if any(i < 1 or i >= s - 1 for i, s in zip(node, full.shape)):
        return None
    patch = full[tuple(slice(i - 1, i + 2) for i in node)]
    if not np.all(np.isfinite(patch)):
        return None
    return _hessian_field(patch, W.grid.h)[(1,) * n]


def core_hessians(W: LogField) -> tuple[np.ndarray, np.ndarray]:
    """Hessians at every core node with a full stencil: ``(multi_indices, matrices)``."""
    full = W.full()
    ok = _stencil_ok(np.isfinite(full), diagonal=True)
    H = _hessian_field(np.where(np.isfinite(full), full, 0.0), W.grid.h)
    idx = np.nonzero(ok)
    return np.column_stack(idx), H[ok]


def _report(name, u: GridFunction, tau, margin, loc, **kw) -> CheckReport:
    return CheckReport(name, float(margin), loc, h=u.grid.h, tau=tau, **kw)


def check_midpoint_logconcavity(u: GridFunction, tau: float = DEFAULT_TAU, tol: float = 0.0,
                                max_pairs: int = 1_000_000, seed: int = 0) -> CheckReport:
    """``ln u(mid) >= (ln u(x) + ln u(y)) / 2 - tol`` over core pairs with a lattice midpoint.

    Pairs are enumerated exhaustively up to ``max_pairs``; beyond that a
    uniform sample of that size is drawn with a seeded generator.
    """
    full = u.full()
    core = full >= tau * full.max()
    with np.errstate(divide="ignore"):
        logu = np.log(full)
    idx = np.column_stack(np.nonzero(core))
    if len(idx) == 0:
        raise ValueError("empty core")
    # equal parity in every coordinate <=> integer midpoint
    parity = (idx % 2) @ (1 << np.arange(idx.shape[1]))
    classes = [idx[parity == p] for p in np.unique(parity)]
    sizes = np.array([len(c) * (len(c) - 1) // 2 for c in classes], dtype=float)
    total = int(sizes.sum())
    rng = np.random.default_rng(seed)

    worst, worst_loc, violations, checked = math.inf, None, 0, 0

    def consume(a, b):
        nonlocal worst, worst_loc, violations, checked
        mid = (a + b) // 2
        la = logu[tuple(a.T)]
        lb = logu[tuple(b.T)]
        lm = logu[tuple(mid.T)]
        margin = lm - 0.5 * (la + lb)
        violations += int(np.count_nonzero(margin < -tol))
        checked += len(margin)
        k = int(np.argmin(margin))
        if margin[k] < worst:
            worst = float(margin[k])
            worst_loc = [_point(u.grid, a[k]), _point(u.grid, b[k])]

    if total <= max_pairs:
        for c in classes:
            m = len(c)
            if m < 2:
                continue
            for start in range(0, m, 512):
                i = np.arange(start, min(start + 512, m))
                ii, jj = np.meshgrid(i, np.arange(m), indexing="ij")
                sel = jj > ii
                consume(c[ii[sel]], c[jj[sel]])
    else:
        which = rng.choice(len(classes), size=max_pairs, p=sizes / sizes.sum())
        for p, c in enumerate(classes):
            k = int(np.count_nonzero(which == p))
            if k == 0:
                continue
            a = rng.integers(0, len(c), size=k)
            b = (a + rng.integers(1, len(c), size=k)) % len(c)
            consume(c[a], c[b])
    return _report("midpoint_logconcavity", u, tau, worst, worst_loc, violations=violations,
                   samples=checked, extra={"tol": tol, "total_pairs": total})


def check_strong_logconcavity(u: GridFunction, tau: float = DEFAULT_TAU,
                              boundary_layers: int = DEFAULT_BOUNDARY_LAYERS) -> CheckReport:
    """Minimum over the core of the smallest eigenvalue of the discrete Hessian of ``-ln u``."""
    W = LogField(u, tau, boundary_layers=boundary_layers)
    idx, H = core_hessians(W)
    if len(H) == 0:
        raise ValueError("no core node has a full Hessian stencil")
    eig = np.linalg.eigvalsh(H)[:, 0]
    k = int(np.argmin(eig))
    return _report("strong_logconcavity", u, tau, eig[k], _point(u.grid, idx[k]),
                   violations=int(np.count_nonzero(eig <= 0)), samples=len(eig),
                   extra={"boundary_layers": boundary_layers})


def _core_interior(u: GridFunction, tau: float):
    full = u.full()
    core = full >= tau * full.max()
    ok = _stencil_ok(core, diagonal=False)
    return full, ok


def check_laplacian_sign(u: GridFunction, tau: float = DEFAULT_TAU) -> CheckReport:
    """Largest value of the (2n+1)-point Laplacian of ``u`` over the core."""
    full, ok = _core_interior(u, tau)
    h = u.grid.h
    lap = np.zeros_like(full)
    for ax in range(full.ndim):
        lap += np.roll(full, 1, axis=ax) + np.roll(full, -1, axis=ax) - 2 * full
    lap /= h**2
    vals = lap[ok]
    idx = np.column_stack(np.nonzero(ok))
    k = int(np.argmax(vals))
    return _report("laplacian_sign", u, tau, vals[k], _point(u.grid, idx[k]),
                   violations=int(np.count_nonzero(vals >= 0)), samples=len(vals))


def check_starshaped_gradient(u: GridFunction, tau: float = DEFAULT_TAU) -> CheckReport:
    """Largest value of ``<x, grad_h u(x)>`` (central differences) over the core."""
    full, ok = _core_interior(u, tau)
    h = u.grid.h
    mesh = np.meshgrid(*u.grid.axes, indexing="ij")
    radial = np.zeros_like(full)
    for ax in range(full.ndim):
        grad = (np.roll(full, -1, axis=ax) - np.roll(full, 1, axis=ax)) / (2 * h)
        radial += mesh[ax] * grad
    vals = radial[ok]
    idx = np.column_stack(np.nonzero(ok))
    k = int(np.argmax(vals))
    return _report("starshaped_gradient", u, tau, vals[k], _point(u.grid, idx[k]),
                   violations=int(np.count_nonzero(vals > 0)), samples=len(vals))
