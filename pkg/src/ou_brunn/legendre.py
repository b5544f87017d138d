"""Discrete Legendre-Fenchel transforms, sup-convolution of eigenfunctions, matrix lemma.

For positive functions ``u_0, u_1`` the sup-convolution

    u_t(x) = max { u_0(x_0)^(1-t) u_1(x_1)^t : x = (1-t) x_0 + t x_1 }

becomes, with ``w_i = -ln u_i``, an infimal convolution of ``w_0`` and
``w_1``, and for convex ``w_i`` that is ``((1-t) w_0^* + t w_1^*)^*``.
:func:`sup_convolution_fast` follows that route with exact separable
discrete conjugates; :func:`sup_convolution_direct` is the brute-force
pair search kept as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from .concavity import LogField, _stencil_ok, core_hessians
from .grid import Grid, GridFunction

__all__ = [
    "SlopeGrid",
    "conjugate_1d",
    "conjugate_grid",
    "conjugate_brute",
    "legendre_transform",
    "max_log_gradient",
    "log_samples",
    "conjugate_points",
    "sup_convolution_direct",
    "sup_convolution_fast",
    "hessian_conjugate_check",
    "trace_inverse_convexity",
    "random_spd",
]


@dataclass(frozen=True, eq=False)
class SlopeGrid:
    """Tensor grid of dual (gradient) variables, one sorted axis per dimension."""

    axes: tuple[np.ndarray, ...]

    @classmethod
    def uniform(cls, Y: float, count: int, dim: int) -> SlopeGrid:
        ax = np.linspace(-Y, Y, count)
        return cls(tuple(ax for _ in range(dim)))

    @classmethod
    def graded(cls, Y: float, dim: int, ds: float = 0.02, scale: float = 1.0) -> SlopeGrid:
        """``y = scale * sinh(s)`` on a uniform ``s`` grid: spacing grows like ``ds * |y|``.

        Near the boundary of the domain ``|grad w|`` and the curvature of
        ``w`` grow together, so relative spacing keeps the envelope error flat.
        """
        smax = math.asinh(Y / scale)
        k = int(math.ceil(smax / ds))
        ax = scale * np.sinh(np.linspace(-smax, smax, 2 * k + 1))
        return cls(tuple(ax for _ in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    @property
    def bound(self) -> float:
        return float(min(min(-a[0], a[-1]) for a in self.axes))

    @property
    def points(self) -> np.ndarray:
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1).reshape(-1, self.dim)


def conjugate_1d(x: np.ndarray, f: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``max_i (x_i y - f_i)`` for every ``y``; ``x`` strictly increasing, ``f`` finite.

    Only the lower convex hull of the points matters; for each ``y`` the
    maximiser is the hull vertex whose adjacent edge slopes bracket ``y``.
    """
    xs = np.asarray(x, dtype=float).tolist()
    fs = np.asarray(f, dtype=float).tolist()
    hull: list[int] = []
    for i in range(len(xs)):
        xi, fi = xs[i], fs[i]
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            if (fs[i1] - fs[i0]) * (xi - xs[i0]) >= (fi - fs[i0]) * (xs[i1] - xs[i0]):
                hull.pop()
            else:
                break
        hull.append(i)
    hx = np.array([xs[i] for i in hull])
    hf = np.array([fs[i] for i in hull])
    slopes = np.diff(hf) / np.diff(hx)
    k = np.searchsorted(slopes, y, side="left")
    return hx[k] * y - hf[k]


def conjugate_grid(axes, values: np.ndarray, slope_axes) -> np.ndarray:
    """Exact discrete conjugate of a tensor-grid function (``+inf`` marks missing nodes).

    The maximisation over ``x`` is done one coordinate at a time.
    """
    values = np.asarray(values, dtype=float)
    n = values.ndim
    if n == 1:
        fin = np.isfinite(values)
        if not fin.any():
            raise ValueError("empty core")
        return conjugate_1d(axes[0][fin], values[fin], slope_axes[0])
    if n != 2:
        raise ValueError("only 1D and 2D grids are supported")
    a1, a2 = axes
    b1, b2 = slope_axes
    g = np.full((len(a1), len(b2)), -np.inf)
    fin = np.isfinite(values)
    rows = np.nonzero(fin.any(axis=1))[0]
    if len(rows) == 0:
        raise ValueError("empty core")
    for i in rows:
        m = fin[i]
        g[i] = conjugate_1d(a2[m], values[i, m], b2)
    out = np.empty((len(b1), len(b2)))
    a1r = a1[rows]
    neg = -g[rows]
    for j in range(len(b2)):
        out[:, j] = conjugate_1d(a1r, neg[:, j], b1)
    return out


def conjugate_brute(points: np.ndarray, values: np.ndarray, slopes: np.ndarray, chunk: int = 4096,
                    return_argmax: bool = False):
    """``max_i (<x_i, y> - f_i)`` by direct enumeration, for validation.

    With ``return_argmax`` the index of the maximising sample is returned too.
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    slopes = np.atleast_2d(np.asarray(slopes, dtype=float))
    if len(points) == 0:
        raise ValueError("empty core")
    out = np.empty(len(slopes))
    arg = np.empty(len(slopes), dtype=np.int64)
    for s in range(0, len(slopes), chunk):
        y = slopes[s:s + chunk]
        m = y @ points.T - values[None, :]
        arg[s:s + chunk] = np.argmax(m, axis=1)
        out[s:s + chunk] = m[np.arange(len(y)), arg[s:s + chunk]]
    return (out, arg) if return_argmax else out


def _full_with_inf(f: GridFunction, core: np.ndarray | None) -> np.ndarray:
    full = f.full(fill=np.inf)
    if core is not None:
        full = np.where(core, full, np.inf)
    return full


def legendre_transform(f: GridFunction, slopes: SlopeGrid, core: np.ndarray | None = None,
                       method: str = "separable") -> np.ndarray:
    """Conjugate of ``f`` (``+inf`` outside ``core``) on the slope grid, shape ``slopes.shape``."""
    if slopes.dim != f.grid.dim:
        raise ValueError("slope grid dimension does not match")
    full = _full_with_inf(f, core)
    if method == "separable":
        return conjugate_grid(f.grid.axes, full, slopes.axes)
    if method == "brute":
        mesh = np.stack(np.meshgrid(*f.grid.axes, indexing="ij"), axis=-1)
        fin = np.isfinite(full)
        return conjugate_brute(mesh[fin], full[fin], slopes.points).reshape(slopes.shape)
    raise ValueError(f"unknown method {method!r}")


def _log_full(u: GridFunction, tau: float) -> np.ndarray:
    full = u.full()
    core = (full > 0) & (full >= tau * full.max())
    out = np.full(full.shape, np.inf)
    out[core] = -np.log(full[core])
    return out


def max_log_gradient(*us: GridFunction, tau: float = 0.0) -> float:
    """Largest one-sided difference quotient of ``-ln u`` between neighbouring core nodes."""
    best = 0.0
    for u in us:
        W = _log_full(u, tau)
        for ax in range(W.ndim):
            fin = np.isfinite(W)
            both = np.diff(fin.astype(np.int8), axis=ax) == 0
            lo = [slice(None)] * W.ndim
            lo[ax] = slice(0, -1)
            both &= fin[tuple(lo)]
            d = np.diff(np.where(fin, W, 0.0), axis=ax)[both] / u.grid.h
            if d.size:
                best = max(best, float(np.abs(d).max()))
    return best


def _check_lattice(*grids: Grid) -> None:
    g0 = grids[0]
    for g in grids[1:]:
        if g.dim != g0.dim or abs(g.h - g0.h) > 1e-12 * g0.h:
            raise ValueError("grids must share dimension and spacing")
        if any(abs(a - b) > 1e-12 for a, b in zip(g.shift, g0.shift)):
            raise ValueError("grids must share the lattice shift")


def _target_lookup(target: Grid, z: np.ndarray, window: float):
    """Target interior ordinal of the nearest lattice node to each ``z`` (``-1`` if none)."""
    h = target.h
    shift = np.asarray(target.shift)
    k = np.rint((z - shift) / h)
    dist = np.max(np.abs(z - (shift + k * h)), axis=1)
    rel = k.astype(np.int64) - target.lattice_offset
    inside = np.all((rel >= 0) & (rel < np.asarray(target.shape)), axis=1) & (dist <= window * h * (1 + 1e-9))
    out = np.full(len(z), -1, dtype=np.int64)
    index = target.index
    out[inside] = index[tuple(rel[inside].T)]
    return out


# fractions of the way from the last node to a cut boundary point at which
# the linear decay of u is sampled
BOUNDARY_SAMPLES = (0.5, 0.9, 0.99)


def log_samples(u: GridFunction, tau: float = 0.0, boundary: bool = True):
    """Points and values of ``w = -ln u``: core nodes plus boundary-decay samples.

    Near a cut face the discrete eigenfunction decays linearly to zero at
    the boundary point ``x + theta h e``; sampling that segment lets the
    sup-convolution reach target nodes that lie between the outermost nodes
    of the two bodies and the boundary of their combination.  Samples are
    only added for the full core (``tau = 0``).
    """
    grid = u.grid
    full = u.values
    core = (full > 0) & (full >= tau * full.max())
    pts = [grid.points[core]]
    vals = [-np.log(full[core])]
    if boundary and tau == 0.0:
        bi, bax, bsg, bfr = grid.boundary_faces
        keep = core[bi]
        bi, bax, bsg, bfr = bi[keep], bax[keep], bsg[keep], bfr[keep]
        rows = np.arange(len(bi))
        for s in BOUNDARY_SAMPLES:
            p = grid.points[bi].copy()
            p[rows, bax] += s * bfr * grid.h * bsg
            pts.append(p)
            vals.append(-np.log(full[bi] * (1.0 - s)))
    return np.concatenate(pts), np.concatenate(vals)


def _dedupe(points: np.ndarray, values: np.ndarray):
    """Keep the smallest value per (rounded) point, sorted lexicographically."""
    key = np.round(points, 12)
    order = np.lexsort(tuple(key[:, k] for k in reversed(range(key.shape[1]))) + (values,))
    # lexsort sorts by the last key first: points major, value minor
    order = np.lexsort((values,) + tuple(key[:, k] for k in reversed(range(key.shape[1]))))
    key, points, values = key[order], points[order], values[order]
    first = np.ones(len(key), dtype=bool)
    first[1:] = np.any(key[1:] != key[:-1], axis=1)
    return points[first], values[first]


def conjugate_points(points: np.ndarray, values: np.ndarray, slope_axes) -> np.ndarray:
    """Exact discrete conjugate of scattered samples on a tensor slope grid (1D or 2D).

    In 2D the samples are grouped by first coordinate; each group is
    conjugated in the second variable, then the groups are combined.
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(points) == 0:
        raise ValueError("empty core")
    points, values = _dedupe(points, values)
    n = points.shape[1]
    if n == 1:
        return conjugate_1d(points[:, 0], values, slope_axes[0])
    if n != 2:
        raise ValueError("only 1D and 2D samples are supported")
    b1, b2 = slope_axes
    key = np.round(points[:, 0], 12)
    starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    ends = np.r_[starts[1:], len(key)]
    g = np.empty((len(starts), len(b2)))
    for r, (s, e) in enumerate(zip(starts, ends)):
        g[r] = conjugate_1d(points[s:e, 1], values[s:e], b2)
    x1 = points[starts, 0]
    out = np.empty((len(b1), len(b2)))
    for j in range(len(b2)):
        out[:, j] = conjugate_1d(x1, -g[:, j], b1)
    return out


def _sample_slope_bound(points: np.ndarray, values: np.ndarray, h: float) -> float:
    """Largest slope between samples closer than ``1.01 h`` (a proxy for ``max |grad w|``)."""
    best = 0.0
    for k in range(points.shape[1]):
        # lexsort keys run minor to major: group by the other coordinates, then sort along k
        order = np.lexsort((points[:, k],) + tuple(points[:, j] for j in range(points.shape[1]) if j != k))
        p, v = points[order], values[order]
        dp = np.diff(p, axis=0)
        same = np.all(np.abs(np.delete(dp, k, axis=1)) < 1e-12, axis=1) & (np.abs(dp[:, k]) < 1.01 * h)
        if same.any():
            best = max(best, float(np.max(np.abs(np.diff(v)[same] / dp[same, k]))))
    return best


def _interp_samples_1d(points: np.ndarray, values: np.ndarray, xq: np.ndarray) -> np.ndarray:
    """Linear interpolation of ``ln u = -w`` between samples, ``-inf`` outside their span."""
    x, w = _dedupe(points, values)
    x = x[:, 0]
    out = np.full(len(xq), -np.inf)
    ok = (xq >= x[0] - 1e-12) & (xq <= x[-1] + 1e-12)
    out[ok] = -np.interp(xq[ok], x, w)
    return out


def sup_convolution_direct(u0: GridFunction, u1: GridFunction, t: float, target: Grid,
                           window: float = 0.5, interpolate: bool = False) -> GridFunction:
    """Brute-force sup-convolution on the lattice, ``O(N_0 N_1)``.

    Every pair of positive nodes ``(x_0, x_1)`` contributes
    ``u_0(x_0)^(1-t) u_1(x_1)^t`` to the target node nearest to
    ``(1-t) x_0 + t x_1`` when that node lies within ``window * h`` (sup
    norm).  With ``interpolate=True`` (1D only) every sample of one
    function (nodes and boundary-decay samples, see :func:`log_samples`) is
    paired with the exact partner point of each target node, the partner
    value coming from piecewise-linear interpolation of ``ln u``.  The
    result is then the sup-convolution of the log-linear interpolants; the
    rounding window is switched off because it biases values up by ``O(h)``.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    _check_lattice(u0.grid, u1.grid, target)
    if interpolate:
        if target.dim != 1:
            raise ValueError("interpolated pairs are implemented in 1D only")
        window = 0.0
    p0, p1 = u0.values > 0, u1.values > 0
    x0, x1 = u0.grid.points[p0], u1.grid.points[p1]
    l0, l1 = np.log(u0.values[p0]), np.log(u1.values[p1])
    best = np.full(target.size, -np.inf)
    for s in range(0, len(x0), 256):
        xa = x0[s:s + 256]
        z = ((1 - t) * xa[:, None, :] + t * x1[None, :, :]).reshape(-1, target.dim)
        val = ((1 - t) * l0[s:s + 256, None] + t * l1[None, :]).reshape(-1)
        k = _target_lookup(target, z, window)
        ok = k >= 0
        np.maximum.at(best, k[ok], val[ok])

    if interpolate and 0.0 < t < 1.0:
        xt = target.points[:, 0]
        s0, w0 = log_samples(u0)
        s1, w1 = log_samples(u1)
        # sample x_0 with partner x_1 = (x - (1-t) x_0) / t, and symmetrically
        xp = (xt[:, None] - (1 - t) * s0[None, :, 0]) / t
        cand = -(1 - t) * w0[None, :] + t * _interp_samples_1d(s1, w1, xp.ravel()).reshape(xp.shape)
        best = np.maximum(best, cand.max(axis=1))
        xp = (xt[:, None] - t * s1[None, :, 0]) / (1 - t)
        cand = -t * w1[None, :] + (1 - t) * _interp_samples_1d(s0, w0, xp.ravel()).reshape(xp.shape)
        best = np.maximum(best, cand.max(axis=1))
    return GridFunction(target, np.exp(best))


def _hull_halfplanes(points: np.ndarray):
    """Outer unit normals of the convex hull of 2D points (degenerate sets get a box)."""
    try:
        hull = ConvexHull(points)
        return hull.equations[:, :2]
    except Exception:
        return np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])


def _combined_hull_mask(target: Grid, c0: np.ndarray, c1: np.ndarray, t: float) -> np.ndarray:
    """Target nodes inside ``(1-t) conv(c0) + t conv(c1)``."""
    pts = target.points
    tol = 1e-9 * target.h
    if target.dim == 1:
        lo = (1 - t) * c0[:, 0].min() + t * c1[:, 0].min()
        hi = (1 - t) * c0[:, 0].max() + t * c1[:, 0].max()
        return (pts[:, 0] >= lo - tol) & (pts[:, 0] <= hi + tol)
    normals = np.vstack([_hull_halfplanes(c0), _hull_halfplanes(c1)])
    h_t = (1 - t) * (c0 @ normals.T).max(axis=0) + t * (c1 @ normals.T).max(axis=0)
    return np.all(pts @ normals.T <= h_t + tol, axis=1)


def _kink_axis(s0, w0, s1, w1, Y: float) -> np.ndarray:
    """Edge slopes of both 1D sample sets plus ``+-Y``.

    The conjugates are piecewise linear with kinks exactly there, so the
    back transform over this axis is exact.
    """
    edges = [np.array([-Y, Y])]
    for p, w in ((s0, w0), (s1, w1)):
        x, v = _dedupe(p, w)
        edges.append(np.diff(v) / np.diff(x[:, 0]))
    ax = np.unique(np.concatenate(edges))
    return ax[(ax >= -Y) & (ax <= Y)]


def sup_convolution_fast(u0: GridFunction, u1: GridFunction, t: float, target: Grid,
                         slopes: SlopeGrid | None = None, tau: float = 0.0) -> GridFunction:
    """Sup-convolution through Legendre conjugates of ``w_i = -ln u_i``.

    ``w_i`` is known on the samples of :func:`log_samples` and ``+inf``
    elsewhere; the result is ``exp(-((1-t) w_0^* + t w_1^*)^*)`` on target
    nodes inside the Minkowski combination of the sample hulls and zero
    elsewhere.  The default slope grid reaches ``Y = 2 max |grad_h w|``: in
    1D it is the set of kinks of the conjugates (exact), in 2D a graded
    tensor grid.  A supplied grid that is too small is rejected.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    _check_lattice(u0.grid, u1.grid, target)
    s0, w0 = log_samples(u0, tau)
    s1, w1 = log_samples(u1, tau)
    need = max(_sample_slope_bound(s0, w0, u0.grid.h), _sample_slope_bound(s1, w1, u1.grid.h))
    if slopes is None:
        Y = 2.0 * max(need, 1.0)
        if target.dim == 1:
            slopes = SlopeGrid((_kink_axis(s0, w0, s1, w1, Y),))
        else:
            slopes = SlopeGrid.graded(Y, 2, ds=0.04)
    if slopes.bound < need:
        raise ValueError(f"slope grid reaches {slopes.bound:.3g} but |grad w| is up to {need:.3g}")
    v0 = conjugate_points(s0, w0, slopes.axes)
    v1 = conjugate_points(s1, w1, slopes.axes)
    vt = (1 - t) * v0 + t * v1
    wt = conjugate_grid(slopes.axes, vt, target.axes)
    inside = _combined_hull_mask(target, s0, s1, t)
    vals = np.where(inside, np.exp(-wt[target.mask]), 0.0)
    return GridFunction(target, vals)


def hessian_conjugate_check(W: LogField, slopes: SlopeGrid | None = None, samples: int = 200,
                            reach: int = 2, seed: int = 0) -> dict:
    """Max of ``|| D^2 W(x) D^2 v(grad W(x)) - I ||_2`` over sampled core nodes, ``v = W^*``.

    ``D^2 W`` and ``grad W`` are central differences.  The discrete
    conjugate equals the smooth one minus a sawtooth that is periodic under
    the lattice image ``D^2 W(x) h Z^n``, so second differences of ``v`` are
    taken at the slope node nearest to ``grad W(x)`` with steps
    ``reach * D^2 W(x) h e_i``; the sawtooth then cancels.  With ``g(z) =
    v(y + D^2 W z)`` this gives ``D^2 W D^2 v = D^2 g (D^2 W)^-1``.  For
    ``reach = 1`` the identity holds exactly on any discretely convex data;
    larger reaches compare the Hessian of ``W`` at two scales, so the
    deviation measures discretisation error.  Samples whose
    gradient lies more than one slope spacing from every node, or whose
    stencil is maximised on the outer layer of the core, are skipped.
    """
    grid = W.grid
    h, n = grid.h, grid.dim
    full = W.full()
    idx, H = core_hessians(W)
    if len(H) == 0:
        raise ValueError("no core node with a full stencil")
    rng = np.random.default_rng(seed)
    pick = np.sort(rng.choice(len(idx), size=min(samples, len(idx)), replace=False))
    idx, H = idx[pick], H[pick]
    grads = np.empty((len(idx), n))
    for ax in range(n):
        e = np.zeros(n, dtype=int)
        e[ax] = 1
        grads[:, ax] = (full[tuple((idx + e).T)] - full[tuple((idx - e).T)]) / (2 * h)
    if slopes is None:
        kappa = np.linalg.eigvalsh(H)
        delta = max(0.05 * float(np.min(kappa[:, 0])) * h, 1e-9)
        Y = float(np.abs(grads).max()) + 2 * delta
        slopes = SlopeGrid.uniform(Y, 2 * int(math.ceil(Y / delta)) + 1, n)

    mesh = np.stack(np.meshgrid(*grid.axes, indexing="ij"), axis=-1)
    fin = np.isfinite(full)
    pts, vals = mesh[fin], full[fin]
    # maximisers on the outer core layer mean the stencil left the gradient image
    deep = _stencil_ok(fin, diagonal=True)[fin]
    offsets = np.array(list(np.ndindex(*(3,) * n))) - 1
    worst, skipped, used = 0.0, 0, 0
    worst_at = None
    for x_idx, Hx, g in zip(idx, H, grads):
        node = [int(np.argmin(np.abs(ax - gi))) for ax, gi in zip(slopes.axes, g)]
        if any(abs(ax[k] - gi) > (ax[1] - ax[0]) for ax, k, gi in zip(slopes.axes, node, g)):
            skipped += 1
            continue
        y0 = np.array([ax[k] for ax, k in zip(slopes.axes, node)])
        step = reach * h
        ys = y0 + (offsets * step) @ Hx.T
        v, arg = conjugate_brute(pts, vals, ys, return_argmax=True)
        if not deep[arg].all():
            skipped += 1
            continue
        v = v.reshape((3,) * n)
        D2g = np.empty((n, n))
        c = v[(1,) * n]
        for i in range(n):
            e = [1] * n
            e[i] = 2
            p = v[tuple(e)]
            e[i] = 0
            m = v[tuple(e)]
            D2g[i, i] = (p - 2 * c + m) / step**2
            for j in range(i + 1, n):
                def at(a, b):
                    e = [1] * n
                    e[i], e[j] = 1 + a, 1 + b
                    return v[tuple(e)]
                D2g[i, j] = D2g[j, i] = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * step * step)
        dev = float(np.linalg.norm(D2g @ np.linalg.inv(Hx) - np.eye(n), 2))
        used += 1
        if dev > worst:
            worst = dev
            worst_at = [float(a[i]) for a, i in zip(grid.axes, x_idx)]
    return {"max_deviation": worst, "location": worst_at, "samples": used, "skipped": skipped}


def _inv_small(M: np.ndarray) -> np.ndarray:
    n = M.shape[0]
    if n == 1:
        return np.array([[1.0 / M[0, 0]]])
    if n == 2:
        a, b, c, d = M[0, 0], M[0, 1], M[1, 0], M[1, 1]
        det = a * d - b * c
        return np.array([[d, -b], [-c, a]]) / det
    if n == 3:
        adj = np.empty((3, 3))
        for i in range(3):
            for j in range(3):
                minor = np.delete(np.delete(M, i, axis=0), j, axis=1)
                adj[j, i] = (-1) ** (i + j) * (minor[0, 0] * minor[1, 1] - minor[0, 1] * minor[1, 0])
        # Laplace expansion along the first row
        return adj / float(M[0] @ adj[:, 0])
    L = np.linalg.cholesky(M)
    Linv = np.linalg.solve(L, np.eye(n))
    return Linv.T @ Linv


def _require_spd(M: np.ndarray, name: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square")
    if not np.allclose(M, M.T, rtol=0, atol=1e-12 * max(1.0, np.abs(M).max())):
        raise ValueError(f"{name} is not symmetric")
    try:
        np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise ValueError(f"{name} is not positive definite") from None
    return M


def trace_inverse_convexity(A, B, t: float) -> tuple[float, float]:
    """``(tr(((1-t) A^-1 + t B^-1)^-1), (1-t) tr A + t tr B)``; convexity of ``tr(M^-1)`` gives lhs <= rhs."""
    A = _require_spd(A, "A")
    B = _require_spd(B, "B")
    if A.shape != B.shape:
        raise ValueError("A and B differ in shape")
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    mix = (1 - t) * _inv_small(A) + t * _inv_small(B)
    lhs = float(np.trace(_inv_small(mix)))
    rhs = (1 - t) * float(np.trace(A)) + t * float(np.trace(B))
    return lhs, rhs


def random_spd(rng: np.random.Generator, n: int, cond: float = 1e3) -> np.ndarray:
    """Random SPD matrix with log-uniform spectrum in ``[1/sqrt(cond), sqrt(cond)]``."""
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    lam = np.exp(rng.uniform(-0.5, 0.5, size=n) * math.log(cond))
    M = (q * lam) @ q.T
    return 0.5 * (M + M.T)
