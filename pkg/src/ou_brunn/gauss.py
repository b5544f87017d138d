"""Standard Gaussian density, Gaussian measure of convex bodies, half-space calibration."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bodies import ConvexBody

__all__ = [
    "GaussWeight",
    "gaussian_cdf",
    "gaussian_measure",
    "halfspace_offset_for_measure",
]

_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class GaussWeight:
    """Density ``(2 pi)^(-n/2) exp(-|x|^2 / 2)`` of the standard Gaussian in R^n."""

    dim: int

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        r2 = np.sum(x * x, axis=-1)
        return (2 * math.pi) ** (-self.dim / 2) * np.exp(-0.5 * r2)


def gaussian_cdf(a: float) -> float:
    """``Phi(a)``, using ``erfc`` so the lower tail keeps full relative accuracy."""
    return 0.5 * math.erfc(-a / _SQRT2)


def gaussian_measure(body: ConvexBody, resolution: float = 0.01, refine: int = 4) -> float:
    """Gaussian measure of a bounded convex body by tensor-grid midpoint quadrature.

    Cells whose corners are all inside count fully, cells with all corners
    and the centre outside are dropped (convexity makes this safe once the
    cell is small against the body), and the remaining boundary cells are
    split ``refine`` times per axis and evaluated by midpoints.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    n = body.dim
    lo, hi = body.bounding_box()
    counts = np.maximum(np.ceil((hi - lo) / resolution).astype(int), 1)
    step = (hi - lo) / counts
    phi = GaussWeight(n)

    axes = [lo[i] + step[i] * np.arange(counts[i] + 1) for i in range(n)]
    corner_grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    corner_in = body.contains(corner_grid.reshape(-1, n)).reshape(corner_grid.shape[:-1])

    mids = [0.5 * (ax[1:] + ax[:-1]) for ax in axes]
    mid_grid = np.stack(np.meshgrid(*mids, indexing="ij"), axis=-1)
    mid_in = body.contains(mid_grid.reshape(-1, n)).reshape(mid_grid.shape[:-1])

    if n == 1:
        corners = [corner_in[:-1], corner_in[1:]]
    else:
        corners = [corner_in[:-1, :-1], corner_in[1:, :-1], corner_in[:-1, 1:], corner_in[1:, 1:]]
    all_in = np.logical_and.reduce(corners)
    any_in = np.logical_or.reduce(corners) | mid_in
    boundary = any_in & ~all_in

    cell = float(np.prod(step))
    total = float(np.sum(phi(mid_grid[all_in]))) * cell

    centres = mid_grid[boundary]
    if len(centres):
        offs = (np.arange(refine) + 0.5) / refine - 0.5
        sub = np.stack(np.meshgrid(*([offs] * n), indexing="ij"), axis=-1).reshape(-1, n) * step
        pts = (centres[:, None, :] + sub[None, :, :]).reshape(-1, n)
        inside = body.contains(pts)
        total += float(np.sum(phi(pts[inside]))) * cell / refine**n
    return total


def halfspace_offset_for_measure(mass: float, tol: float = 1e-12) -> float:
    """Offset ``a`` of the half-space ``{x_1 < a}`` whose Gaussian measure is ``mass``."""
    if not 0.0 < mass < 1.0:
        raise ValueError(f"mass must lie in (0, 1), got {mass}")
    lo, hi = -1.0, 1.0
    while gaussian_cdf(lo) > mass:
        lo *= 2.0
    while gaussian_cdf(hi) < mass:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = gaussian_cdf(mid)
        if abs(val - mass) <= tol:
            return mid
        if val < mass:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-15 * max(1.0, abs(mid)):
            break
    return 0.5 * (lo + hi)
