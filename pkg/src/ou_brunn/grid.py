"""Finite-volume discretisation of the Ornstein-Uhlenbeck Dirichlet eigenproblem.

The operator is written in divergence form ``e^{|x|^2/2} div(e^{-|x|^2/2} grad u)``
so the stiffness matrix is a face-weighted graph Laplacian, symmetric by
construction.  Nodes sit on the lattice ``shift + h Z^n``; a face between an
interior node and an exterior one is shortened to the boundary crossing,
which only changes the diagonal and keeps the matrix symmetric.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy import ndimage
from scipy.sparse.linalg import factorized

from .bodies import ConvexBody, Interval

__all__ = [
    "GridError",
    "ConvergenceError",
    "ModeMixingError",
    "Grid",
    "GridFunction",
    "DiscreteOUForm",
    "EigenResult",
    "ToleranceBudget",
    "build_grid",
    "assemble",
    "first_eigenpair",
    "rayleigh_quotient",
    "solve_body",
    "converged_eigenvalue",
    "write_eigenfunction_csv",
]


# nodes closer than this fraction of h to the boundary are treated as exterior
MIN_FRACTION = 1e-3


class GridError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


class ModeMixingError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Grid:
    body: ConvexBody
    h: float
    axes: tuple[np.ndarray, ...]
    mask: np.ndarray
    shift: tuple[float, ...]
    # boundary faces: interior node index, axis, sign, crossing fraction in (0, 1]
    boundary_faces: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mask.shape

    @property
    def size(self) -> int:
        return int(self.mask.sum())

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    @property
    def multi_index(self) -> tuple[np.ndarray, ...]:
        return np.nonzero(self.mask)

    @property
    def points(self) -> np.ndarray:
        idx = self.multi_index
        return np.column_stack([ax[i] for ax, i in zip(self.axes, idx)])

    @property
    def index(self) -> np.ndarray:
        """Array of grid shape holding the interior ordinal, or -1 outside."""
        out = np.full(self.shape, -1, dtype=np.int64)
        out[self.mask] = np.arange(self.size)
        return out

    @property
    def lattice_offset(self) -> np.ndarray:
        """Integer lattice coordinate of ``axes[i][0]`` (nodes are ``shift + h k``)."""
        return np.array([int(round((ax[0] - s) / self.h)) for ax, s in zip(self.axes, self.shift)])


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} interior values, got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: Grid, f: Callable[[np.ndarray], np.ndarray]) -> GridFunction:
        return cls(grid, f(grid.points))

    def full(self, fill: float = 0.0) -> np.ndarray:
        """Values on the whole rectangular grid, ``fill`` outside the interior mask."""
        out = np.full(self.grid.shape, fill, dtype=float)
        out[self.grid.mask] = self.values
        return out


@dataclass(frozen=True, eq=False)
class DiscreteOUForm:
    grid: Grid
    stiffness: sp.csr_matrix
    mass: np.ndarray
    face_i: np.ndarray
    face_j: np.ndarray  # -1 marks a Dirichlet face
    face_w: np.ndarray

    def energy(self, values: np.ndarray) -> float:
        """``sum_faces w (u_i - u_j)^2`` with ``u = 0`` outside."""
        ui = values[self.face_i]
        uj = np.where(self.face_j >= 0, values[np.maximum(self.face_j, 0)], 0.0)
        return float(np.sum(self.face_w * (ui - uj) ** 2))


@dataclass(frozen=True, eq=False)
class EigenResult:
    lam: float
    u: GridFunction
    iterations: int
    residual: float
    h: float


@dataclass(frozen=True)
class ToleranceBudget:
    eps: float
    lam_coarse: float
    lam_fine: float
    safety: float = 2.0
    order: float = float("nan")

    def __post_init__(self):
        if self.safety < 2:
            raise ValueError("safety factor must be at least 2")


def build_grid(body: ConvexBody, h: float, shift: Sequence[float] | None = None) -> Grid:
    """Lattice nodes inside ``body`` with their boundary-face crossing fractions.

    Raises :class:`GridError` when the interior is empty or not 4-connected,
    both of which mean ``h`` is too coarse for the body.
    """
    if h <= 0:
        raise GridError("h must be positive")
    n = body.dim
    shift = tuple(float(s) for s in (shift if shift is not None else (0.0,) * n))
    if len(shift) != n:
        raise GridError("shift has the wrong dimension")
    lo, hi = body.bounding_box()
    axes = []
    for i in range(n):
        k0 = math.floor((lo[i] - 2 * h - shift[i]) / h)
        k1 = math.ceil((hi[i] + 2 * h - shift[i]) / h)
        axes.append(shift[i] + h * np.arange(k0, k1 + 1))
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    mask = np.asarray(body.contains(mesh.reshape(-1, n))).reshape(mesh.shape[:-1])

    steps = [(ax, sgn) for ax in range(n) for sgn in (1, -1)]
    # drop nodes sitting (almost) on the boundary; repeat since removal exposes new faces
    while True:
        drop = np.zeros_like(mask)
        for ax, sgn in steps:
            exposed = mask & ~np.roll(mask, -sgn, axis=ax)
            if not exposed.any():
                continue
            pts = mesh[exposed]
            d = np.zeros(n)
            d[ax] = sgn * h
            frac = body.exit_fraction(pts, np.broadcast_to(d, pts.shape))
            bad = np.zeros_like(mask)
            bad[exposed] = frac < MIN_FRACTION
            drop |= bad
        if not drop.any():
            break
        mask &= ~drop

    if not mask.any():
        raise GridError(f"empty interior mask at h={h}; refine the grid")
    structure = ndimage.generate_binary_structure(n, 1)
    _, ncomp = ndimage.label(mask, structure=structure)
    if ncomp != 1:
        raise GridError(f"interior mask has {ncomp} components at h={h}; refine the grid")

    index = np.full(mask.shape, -1, dtype=np.int64)
    index[mask] = np.arange(int(mask.sum()))
    bi, bax, bsg, bfr = [], [], [], []
    for ax, sgn in steps:
        exposed = mask & ~np.roll(mask, -sgn, axis=ax)
        if not exposed.any():
            continue
        pts = mesh[exposed]
        d = np.zeros(n)
        d[ax] = sgn * h
        frac = np.minimum(body.exit_fraction(pts, np.broadcast_to(d, pts.shape)), 1.0)
        bi.append(index[exposed])
        bax.append(np.full(len(frac), ax))
        bsg.append(np.full(len(frac), sgn))
        bfr.append(frac)
    faces = tuple(np.concatenate(a) for a in (bi, bax, bsg, bfr))
    mask.setflags(write=False)
    return Grid(body, float(h), tuple(axes), mask, shift, faces)


def assemble(grid: Grid) -> DiscreteOUForm:
    """Face-weighted stiffness ``A`` and lumped Gaussian mass ``M``.

    Interior faces carry ``exp(-|x_f|^2/2) h^(n-2)`` at the face midpoint ``x_f``;
    Dirichlet faces carry the same weight divided by the crossing fraction.
    """
    n, h = grid.dim, grid.h
    pts = grid.points
    index = grid.index
    idx = grid.multi_index
    scale = h ** (n - 2)

    fi, fj, fw = [], [], []
    for ax in range(n):
        # each interior face once: node -> its +ax neighbour
        nb = list(idx)
        nb[ax] = idx[ax] + 1
        inside = nb[ax] < grid.shape[ax]
        nb_idx = np.full(len(inside), -1)
        nb_idx[inside] = index[tuple(a[inside] for a in nb)]
        keep = nb_idx >= 0
        xf = pts[keep].copy()
        xf[:, ax] += 0.5 * h
        fi.append(np.nonzero(keep)[0])
        fj.append(nb_idx[keep])
        fw.append(np.exp(-0.5 * np.sum(xf * xf, axis=1)) * scale)

    bi, bax, bsg, bfr = grid.boundary_faces
    xf = pts[bi].copy()
    xf[np.arange(len(bi)), bax] += 0.5 * h * bsg
    fi.append(bi)
    fj.append(np.full(len(bi), -1))
    fw.append(np.exp(-0.5 * np.sum(xf * xf, axis=1)) * scale / bfr)

    face_i, face_j, face_w = (np.concatenate(a) for a in (fi, fj, fw))
    N = grid.size
    diag = np.bincount(face_i, weights=face_w, minlength=N)
    inner = face_j >= 0
    diag += np.bincount(face_j[inner], weights=face_w[inner], minlength=N)
    off_r = np.concatenate([face_i[inner], face_j[inner]])
    off_c = np.concatenate([face_j[inner], face_i[inner]])
    off_v = -np.concatenate([face_w[inner], face_w[inner]])
    A = sp.csr_matrix(
        (np.concatenate([diag, off_v]), (np.concatenate([np.arange(N), off_r]), np.concatenate([np.arange(N), off_c]))),
        shape=(N, N),
    )
    A.sum_duplicates()
    A.sort_indices()
    mass = np.exp(-0.5 * np.sum(pts * pts, axis=1)) * grid.cell_volume
    return DiscreteOUForm(grid, A, mass, face_i, face_j, face_w)


def rayleigh_quotient(form: DiscreteOUForm, f: GridFunction | np.ndarray) -> float:
    v = f.values if isinstance(f, GridFunction) else np.asarray(f, dtype=float)
    den = float(v @ (form.mass * v))
    if den == 0.0:
        raise ZeroDivisionError("Rayleigh quotient of the zero function")
    return float(v @ (form.stiffness @ v)) / den


def first_eigenpair(form: DiscreteOUForm, tol: float = 1e-10, maxiter: int = 1000) -> EigenResult:
    """Smallest eigenpair of ``A u = lam M u`` by inverse iteration.

    ``A`` is factorised once (sparse LU).  The iteration stops when the
    relative residual drops below ``tol``, or when the eigenvalue is
    stationary to round-off while the residual sits within a factor 100 of
    ``tol`` (fine grids hit a floating point floor near 1e-11).
    """
    A, m = form.stiffness, form.mass
    solve = factorized(sp.csc_matrix(A))
    x = np.ones(len(m)) / math.sqrt(m.sum())
    lam = float(x @ (A @ x))
    residual = math.inf
    still = 0
    for it in range(1, maxiter + 1):
        y = solve(m * x)
        x = y / math.sqrt(float(y @ (m * y)))
        lam_new = float(x @ (A @ x))
        r = A @ x - lam_new * (m * x)
        residual = float(np.linalg.norm(r) / np.linalg.norm(m * x))
        still = still + 1 if abs(lam_new - lam) <= 8 * np.finfo(float).eps * abs(lam_new) else 0
        lam = lam_new
        if residual <= tol or (still >= 2 and residual <= 100 * tol):
            break
    else:
        raise ConvergenceError(f"no convergence after {maxiter} iterations (residual {residual:.3g})")

    if x.sum() < 0:
        x = -x
    x = x / x.max()
    if x.min() < -tol:
        raise ModeMixingError(f"eigenvector has negative entries down to {x.min():.3g}")
    x = np.maximum(x, 0.0)
    return EigenResult(lam, GridFunction(form.grid, x), it, residual, form.grid.h)


_SOLVE_CACHE: dict = {}


def solve_body(body: ConvexBody, h: float, tol: float = 1e-10, cache: bool = True,
               shift: Sequence[float] | None = None) -> EigenResult:
    """Grid eigenpair of a body at spacing ``h`` (memoised per process)."""
    shift = None if shift is None else tuple(float(c) for c in shift)
    key = (body, float(h), float(tol), shift)
    if cache and key in _SOLVE_CACHE:
        return _SOLVE_CACHE[key]
    res = first_eigenpair(assemble(build_grid(body, h, shift)), tol)
    if cache:
        _SOLVE_CACHE[key] = res
    return res


def fitted_spacings(body: ConvexBody, h_seq: Sequence[float]) -> list[tuple[float, tuple | None]]:
    """``(h, shift)`` per level; intervals get a boundary-fitted lattice.

    For an interval of length ``L`` the first level uses ``n = ceil(L / h_0)``
    cells and each later level doubles ``n``, so both endpoints are lattice
    points and consecutive spacings halve exactly.  Off-lattice endpoints
    make the error depend on where the boundary falls between nodes, which
    scrambles the empirical order.  Other bodies keep the given spacings.
    """
    if not isinstance(body, Interval):
        return [(float(h), None) for h in h_seq]
    length = body.b - body.a
    n0 = math.ceil(length / h_seq[0] - 1e-9)
    return [(length / (n0 * 2 ** k), (body.a,)) for k in range(len(h_seq))]


def converged_eigenvalue(body: ConvexBody, h_seq: Sequence[float], tol: float = 1e-10,
                         safety: float = 2.0, min_order: float = 1.0) -> tuple[float, ToleranceBudget]:
    """Finest-grid eigenvalue and its error budget ``safety * |lam_h - lam_{h/2}|``.

    The empirical order ``log(d_k / d_{k+1}) / log(h_k / h_{k+1})`` of the
    successive differences must reach ``min_order``; differences at round-off
    level count as converged.
    """
    h_seq = [float(h) for h in h_seq]
    if len(h_seq) < 3:
        raise ValueError("need at least three spacings")
    if any(b >= a for a, b in zip(h_seq, h_seq[1:])):
        raise ValueError("h_seq must be strictly decreasing")
    levels = fitted_spacings(body, h_seq)
    lams = [solve_body(body, h, tol, shift=shift).lam for h, shift in levels]
    diffs = [abs(a - b) for a, b in zip(lams, lams[1:])]
    floor = 1e-9 * abs(lams[-1])
    orders = []
    for k in range(len(diffs) - 1):
        if diffs[k + 1] <= floor:
            orders.append(math.inf)
            continue
        if diffs[k] <= floor:
            raise ConvergenceError(f"stagnating differences {diffs} for {body!r}")
        orders.append(math.log(diffs[k] / diffs[k + 1]) / math.log(levels[k + 1][0] / levels[k + 2][0]))
    order = min(orders)
    if order < min_order:
        raise ConvergenceError(f"empirical order {order:.2f} < {min_order} for {body!r}: lams={lams}")
    budget = ToleranceBudget(safety * diffs[-1], lams[-2], lams[-1], safety, order)
    return lams[-1], budget


def write_eigenfunction_csv(u: GridFunction, path) -> None:
    names = ["x", "y"][: u.grid.dim] + ["u"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for p, v in zip(u.grid.points, u.values):
            w.writerow([repr(float(c)) for c in p] + [repr(float(v))])
