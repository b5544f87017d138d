"""Convex bodies in R^1 and R^2 described through their support functions.

Four concrete variants are provided: :class:`Interval`, :class:`Ball`,
:class:`Polygon` (H-representation with unit normals) and
:class:`SmoothBody` (trigonometric-polynomial support function).  All of
them are immutable and expose ``support``, ``contains`` and
``exit_fraction``; the module-level functions implement the Minkowski
algebra on top of those.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

__all__ = [
    "ConvexBody",
    "DirectionGrid",
    "Interval",
    "Ball",
    "Polygon",
    "SmoothBody",
    "support",
    "minkowski_combine",
    "minkowski_average",
    "contains",
    "mean_width",
    "rotate",
    "rotation_mean",
    "hausdorff_distance",
    "is_origin_symmetric",
    "sampled_polygon",
    "DEFAULT_DIRECTIONS",
]

DEFAULT_DIRECTIONS = 720
_SMOOTH_SAMPLES = 1440


@dataclass(frozen=True)
class DirectionGrid:
    """Uniform grid of unit directions (angles ``2*pi*k/count``) or ``{-1, +1}`` in 1D."""

    count: int = DEFAULT_DIRECTIONS
    dim: int = 2

    def __post_init__(self):
        if self.dim == 1:
            object.__setattr__(self, "count", 2)
        elif self.dim != 2:
            raise ValueError("only 1D and 2D direction grids are supported")
        elif self.count < 3:
            raise ValueError("need at least 3 directions in 2D")

    @property
    def angles(self) -> np.ndarray:
        if self.dim == 1:
            return np.array([math.pi, 0.0])
        return 2.0 * math.pi * np.arange(self.count) / self.count

    @property
    def vectors(self) -> np.ndarray:
        if self.dim == 1:
            return np.array([[-1.0], [1.0]])
        a = self.angles
        return np.column_stack([np.cos(a), np.sin(a)])

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights normalised to the sphere measure (they sum to one)."""
        return np.full(self.count, 1.0 / self.count)


def _as_dirs(dirs, dim: int) -> tuple[np.ndarray, tuple]:
    d = np.asarray(dirs, dtype=float)
    if dim == 1 and (d.ndim == 0 or d.shape[-1] != 1):
        d = d[..., None]
    if d.shape[-1] != dim:
        raise ValueError(f"direction dimension {d.shape[-1]} does not match body dimension {dim}")
    return d.reshape(-1, dim), d.shape[:-1]


class ConvexBody:
    """Base class: a bounded convex set with nonempty interior."""

    dim: int

    def support(self, dirs) -> np.ndarray | float:
        """Support function ``h(u) = sup_{x in K} <x, u>`` for an array of directions."""
        d, shape = _as_dirs(dirs, self.dim)
        out = self._support(d).reshape(shape)
        return float(out) if out.ndim == 0 else out

    def contains(self, x, slack: float = 0.0) -> np.ndarray | bool:
        """Membership test ``<x, u> <= h(u) + slack`` over the stored or sampled normals."""
        p, shape = _as_dirs(x, self.dim)
        out = self._contains(p, slack).reshape(shape)
        return bool(out) if out.ndim == 0 else out

    def exit_fraction(self, x: np.ndarray, step: np.ndarray) -> np.ndarray:
        """Smallest ``s >= 0`` with ``x + s*step`` on the boundary, for points ``x`` inside."""
        x = np.asarray(x, dtype=float).reshape(-1, self.dim)
        step = np.asarray(step, dtype=float).reshape(-1, self.dim)
        return self._exit_fraction(x, step)

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        eye = np.eye(self.dim)
        hi = self._support(eye)
        lo = -self._support(-eye)
        return lo, hi

    # halfplane view shared by polygons and sampled smooth bodies
    def _halfplane_exit(self, normals, offsets, x, step):
        slack = offsets[None, :] - x @ normals.T
        rate = step @ normals.T
        with np.errstate(divide="ignore", invalid="ignore"):
            s = np.where(rate > 0, slack / rate, np.inf)
        return np.clip(s.min(axis=1), 0.0, None)


@dataclass(frozen=True)
class Interval(ConvexBody):
    a: float
    b: float
    dim: int = field(default=1, init=False)

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"interval needs a < b, got ({self.a}, {self.b})")

    def _support(self, d):
        d = d[:, 0]
        return np.where(d >= 0, self.b * d, self.a * d)

    def _contains(self, p, slack):
        p = p[:, 0]
        return (p >= self.a - slack) & (p <= self.b + slack)

    def _exit_fraction(self, x, step):
        x, s = x[:, 0], step[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.where(s > 0, (self.b - x) / s, np.where(s < 0, (self.a - x) / s, np.inf))
        return np.clip(out, 0.0, None)


@dataclass(frozen=True)
class Ball(ConvexBody):
    radius: float
    center: tuple = (0.0, 0.0)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")
        c = tuple(float(v) for v in np.atleast_1d(self.center))
        if len(c) not in (1, 2):
            raise ValueError("ball center must be 1D or 2D")
        object.__setattr__(self, "center", c)

    @property
    def dim(self) -> int:
        return len(self.center)

    def _support(self, d):
        return self.radius * np.linalg.norm(d, axis=1) + d @ np.asarray(self.center)

    def _contains(self, p, slack):
        return np.linalg.norm(p - np.asarray(self.center), axis=1) <= self.radius + slack

    def _exit_fraction(self, x, step):
        y = x - np.asarray(self.center)
        a = np.einsum("ij,ij->i", step, step)
        b = 2.0 * np.einsum("ij,ij->i", y, step)
        c = np.einsum("ij,ij->i", y, y) - self.radius**2
        disc = np.sqrt(np.clip(b * b - 4 * a * c, 0.0, None))
        return np.clip((-b + disc) / (2 * a), 0.0, None)

    def as_interval(self) -> Interval:
        if self.dim != 1:
            raise ValueError("only a 1D ball is an interval")
        return Interval(self.center[0] - self.radius, self.center[0] + self.radius)


def _dedupe_normals(normals: np.ndarray, offsets: np.ndarray, tol: float = 1e-10):
    ang = np.mod(np.arctan2(normals[:, 1], normals[:, 0]), 2 * math.pi)
    order = np.argsort(ang, kind="stable")
    ang, normals, offsets = ang[order], normals[order], offsets[order]
    keep_n, keep_h, last = [], [], None
    for a, n, h in zip(ang, normals, offsets):
        if last is not None and abs(a - last) < tol:
            keep_h[-1] = min(keep_h[-1], h)
            continue
        keep_n.append(n)
        keep_h.append(h)
        last = a
    if len(keep_n) > 1 and abs(ang[0] + 2 * math.pi - last) < tol:
        keep_h[0] = min(keep_h[0], keep_h.pop())
        keep_n.pop()
    return np.array(keep_n), np.array(keep_h)


@dataclass(frozen=True, eq=False)
class Polygon(ConvexBody):
    """Bounded polygon ``{x : <n_k, x> <= h_k}`` with unit outer normals ``n_k``.

    Redundant halfplanes are accepted; they are reported by :attr:`redundant`.
    """

    normals: np.ndarray
    offsets: np.ndarray
    dim: int = field(default=2, init=False)

    def __post_init__(self):
        n = np.asarray(self.normals, dtype=float).reshape(-1, 2)
        h = np.asarray(self.offsets, dtype=float).reshape(-1)
        if len(n) != len(h):
            raise ValueError("normals and offsets differ in length")
        norms = np.linalg.norm(n, axis=1)
        if np.any(norms == 0):
            raise ValueError("zero normal")
        n, h = _dedupe_normals(n / norms[:, None], h / 1.0)
        n.setflags(write=False)
        h.setflags(write=False)
        object.__setattr__(self, "normals", n)
        object.__setattr__(self, "offsets", h)
        self.vertices  # validates boundedness and interior

    @classmethod
    def from_angles(cls, angles: Sequence[float], offsets: Sequence[float]) -> Polygon:
        a = np.asarray(angles, dtype=float)
        return cls(np.column_stack([np.cos(a), np.sin(a)]), offsets)

    @classmethod
    def box(cls, half_x: float, half_y: float | None = None) -> Polygon:
        half_y = half_x if half_y is None else half_y
        return cls([[1, 0], [0, 1], [-1, 0], [0, -1]], [half_x, half_y, half_x, half_y])

    def __eq__(self, other):
        return (
            isinstance(other, Polygon)
            and self.normals.shape == other.normals.shape
            and np.array_equal(self.normals, other.normals)
            and np.array_equal(self.offsets, other.offsets)
        )

    def __hash__(self):
        return hash((self.normals.tobytes(), self.offsets.tobytes()))

    def __repr__(self):
        return f"Polygon(m={len(self.offsets)})"

    @cached_property
    def vertices(self) -> np.ndarray:
        n, h = self.normals, self.offsets
        # Chebyshev centre: max r s.t. <n_k, c> + r <= h_k
        res = linprog(
            c=[0.0, 0.0, -1.0],
            A_ub=np.column_stack([n, np.ones(len(h))]),
            b_ub=h,
            bounds=[(None, None), (None, None), (0, None)],
            method="highs",
        )
        if res.status == 3:
            raise ValueError("polygon is unbounded")
        if res.status != 0 or res.x[2] <= 1e-12:
            raise ValueError("polygon has empty interior")
        hs = HalfspaceIntersection(np.column_stack([n, -h]), res.x[:2])
        pts = hs.intersections
        hull = ConvexHull(pts)
        return pts[hull.vertices]

    @cached_property
    def redundant(self) -> np.ndarray:
        """Mask of halfplanes that do not touch the polygon."""
        hv = (self.vertices @ self.normals.T).max(axis=0)
        scale = 1.0 + np.abs(self.offsets)
        return hv < self.offsets - 1e-9 * scale

    def _support(self, d):
        return (d @ self.vertices.T).max(axis=1)

    def _contains(self, p, slack):
        return np.all(p @ self.normals.T <= self.offsets + slack, axis=1)

    def _exit_fraction(self, x, step):
        return self._halfplane_exit(self.normals, self.offsets, x, step)


@dataclass(frozen=True, eq=False)
class SmoothBody(ConvexBody):
    """Body with support function ``h(t) = a0 + sum_k a_k cos(k t) + b_k sin(k t)``.

    ``coeffs`` is the flat sequence ``[a0, a1, b1, a2, b2, ...]``.
    """

    coeffs: np.ndarray
    dim: int = field(default=2, init=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).reshape(-1)
        if len(c) % 2 == 0:
            c = np.append(c, 0.0)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        curv = self.curvature_radius(np.linspace(0, 2 * math.pi, 4096, endpoint=False))
        if curv.min() <= 0:
            raise ValueError(f"h'' + h must be positive, min sampled value {curv.min():.3g}")

    def __eq__(self, other):
        return isinstance(other, SmoothBody) and np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self):
        return f"SmoothBody({self.coeffs.tolist()})"

    @property
    def degree(self) -> int:
        return (len(self.coeffs) - 1) // 2

    def _modes(self):
        k = np.arange(1, self.degree + 1)
        return k, self.coeffs[1::2], self.coeffs[2::2]

    def h(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        k, a, b = self._modes()
        kt = np.multiply.outer(theta, k)
        return self.coeffs[0] + np.cos(kt) @ a + np.sin(kt) @ b

    def dh(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        k, a, b = self._modes()
        kt = np.multiply.outer(theta, k)
        return np.cos(kt) @ (k * b) - np.sin(kt) @ (k * a)

    def curvature_radius(self, theta) -> np.ndarray:
        """``h + h''``: the radius of curvature at the boundary point with normal angle theta."""
        theta = np.asarray(theta, dtype=float)
        k, a, b = self._modes()
        kt = np.multiply.outer(theta, k)
        return self.coeffs[0] + np.cos(kt) @ ((1 - k**2) * a) + np.sin(kt) @ ((1 - k**2) * b)

    def boundary_points(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        h, dh = self.h(theta), self.dh(theta)
        c, s = np.cos(theta), np.sin(theta)
        return np.stack([h * c - dh * s, h * s + dh * c], axis=-1)

    @cached_property
    def _halfplanes(self):
        ang = 2 * math.pi * np.arange(_SMOOTH_SAMPLES) / _SMOOTH_SAMPLES
        return np.column_stack([np.cos(ang), np.sin(ang)]), self.h(ang)

    def _support(self, d):
        r = np.linalg.norm(d, axis=1)
        return r * self.h(np.arctan2(d[:, 1], d[:, 0]))

    def _contains(self, p, slack):
        n, h = self._halfplanes
        return np.all(p @ n.T <= h + slack, axis=1)

    def _exit_fraction(self, x, step):
        n, h = self._halfplanes
        return self._halfplane_exit(n, h, x, step)


def support(body: ConvexBody, direction) -> float | np.ndarray:
    return body.support(direction)


def contains(body: ConvexBody, x, slack: float = 0.0):
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    return body.contains(x, slack)


def sampled_polygon(body: ConvexBody, dirs: DirectionGrid | None = None) -> Polygon:
    """Circumscribed polygon whose normals are the direction grid."""
    dirs = dirs or DirectionGrid()
    if body.dim != 2:
        raise ValueError("sampled polygons are 2D only")
    v = dirs.vectors
    return Polygon(v, body.support(v))


def _to_smooth(body: ConvexBody) -> SmoothBody:
    if isinstance(body, SmoothBody):
        return body
    if isinstance(body, Ball):
        return SmoothBody([body.radius, body.center[0], body.center[1]])
    raise TypeError(f"cannot convert {type(body).__name__} to a smooth body")


def _as_1d(body: ConvexBody) -> Interval:
    return body.as_interval() if isinstance(body, Ball) else body


def minkowski_combine(t: float, body0: ConvexBody, body1: ConvexBody) -> ConvexBody:
    """The body ``(1-t) body0 + t body1``; its support is ``(1-t) h0 + t h1``."""
    if not 0.0 <= t <= 1.0:
        raise ValueError("t must lie in [0, 1]")
    if body0.dim != body1.dim:
        raise ValueError(f"dimension mismatch: {body0.dim} vs {body1.dim}")
    if t == 0.0:
        return body0
    if t == 1.0:
        return body1
    s = 1.0 - t
    if body0.dim == 1:
        a, b = _as_1d(body0), _as_1d(body1)
        return Interval(s * a.a + t * b.a, s * a.b + t * b.b)
    if isinstance(body0, Ball) and isinstance(body1, Ball):
        c = s * np.asarray(body0.center) + t * np.asarray(body1.center)
        return Ball(s * body0.radius + t * body1.radius, tuple(c))
    if isinstance(body0, Polygon) and isinstance(body1, Polygon):
        n = np.vstack([body0.normals, body1.normals])
        return Polygon(n, s * body0.support(n) + t * body1.support(n))
    if not isinstance(body0, Polygon) and not isinstance(body1, Polygon):
        c0, c1 = _to_smooth(body0).coeffs, _to_smooth(body1).coeffs
        size = max(len(c0), len(c1))
        c = s * np.pad(c0, (0, size - len(c0))) + t * np.pad(c1, (0, size - len(c1)))
        return SmoothBody(c)
    v = DirectionGrid().vectors
    return Polygon(v, s * body0.support(v) + t * body1.support(v))


def minkowski_average(bodies: Sequence[ConvexBody]) -> ConvexBody:
    """``(1/m)(K_1 + ... + K_m)`` by folding pairwise combinations."""
    if not bodies:
        raise ValueError("need at least one body")
    acc = bodies[0]
    for k, body in enumerate(bodies[1:], start=1):
        acc = minkowski_combine(1.0 / (k + 1), acc, body)
    return acc


def rotate(body: ConvexBody, angle: float) -> ConvexBody:
    """Rotate a 2D body about the origin."""
    if body.dim != 2:
        raise ValueError("rotation is defined for 2D bodies only")
    c, s = math.cos(angle), math.sin(angle)
    rot = np.array([[c, -s], [s, c]])
    if isinstance(body, Ball):
        return Ball(body.radius, tuple(rot @ np.asarray(body.center)))
    if isinstance(body, Polygon):
        return Polygon(body.normals @ rot.T, body.offsets)
    if isinstance(body, SmoothBody):
        k, a, b = body._modes()
        ca, sa = np.cos(k * angle), np.sin(k * angle)
        out = np.empty_like(body.coeffs)
        out[0] = body.coeffs[0]
        out[1::2] = a * ca - b * sa
        out[2::2] = a * sa + b * ca
        return SmoothBody(out)
    raise TypeError(type(body).__name__)


def rotation_mean(body: ConvexBody, rotations: Sequence[float]) -> ConvexBody:
    if body.dim != 2:
        raise ValueError("rotation means are defined for 2D bodies only")
    if len(rotations) < 1:
        raise ValueError("need at least one rotation")
    return minkowski_average([rotate(body, a) for a in rotations])


def _grid_for(body: ConvexBody, dirs: DirectionGrid | None) -> DirectionGrid:
    if dirs is None:
        return DirectionGrid(dim=body.dim)
    if dirs.dim != body.dim:
        raise ValueError("direction grid dimension does not match the body")
    return dirs


def mean_width(body: ConvexBody, dirs: DirectionGrid | None = None) -> float:
    """Mean width; exact in 2D (Cauchy: perimeter / pi) unless ``dirs`` is given."""
    if dirs is None:
        if isinstance(body, Interval):
            return body.b - body.a
        if isinstance(body, Ball):
            return 2.0 * body.radius
        if isinstance(body, SmoothBody):
            return 2.0 * float(body.coeffs[0])
        if isinstance(body, Polygon):
            v = body.vertices
            return float(np.sum(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1))) / math.pi
    dirs = _grid_for(body, dirs)
    v = dirs.vectors
    width = body.support(v) + body.support(-v)
    return float(dirs.weights @ width)


def hausdorff_distance(a: ConvexBody, b: ConvexBody, dirs: DirectionGrid | None = None) -> float:
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    v = _grid_for(a, dirs).vectors
    return float(np.max(np.abs(a.support(v) - b.support(v))))


def is_origin_symmetric(body: ConvexBody, tol: float = 1e-9, dirs: DirectionGrid | None = None) -> bool:
    v = _grid_for(body, dirs).vectors
    return bool(np.max(np.abs(body.support(v) - body.support(-v))) <= tol)
