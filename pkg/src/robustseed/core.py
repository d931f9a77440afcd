"""Geometry, the incremental distance cache and the clustering objectives.

Every seeder and every metric in the package is expressed through the few
quantities defined here:

* ``kmeans_cost``: sum over points of the squared distance to the nearest center.
* ``robust_cost``: the same sum after discarding the ``z`` largest terms.
* ``thresholded_potential``: the per-point squared distances clipped at
  ``eta * robust_cost / z`` and summed.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


@dataclass
class PointSet:
    """Dense ``(n, d)`` coordinates plus optional ground-truth outlier indices."""

    points: np.ndarray
    true_outliers: Optional[frozenset] = None

    def __post_init__(self) -> None:
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"points must be a non-empty 2-D array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points contain NaN or Inf")
        self.points = pts
        if self.true_outliers is not None:
            idx = list(self.true_outliers)
            if len(set(idx)) != len(idx):
                raise ValueError("true_outliers contains duplicates")
            if any(i < 0 or i >= pts.shape[0] for i in idx):
                raise ValueError("true_outliers index out of range")
            self.true_outliers = frozenset(int(i) for i in idx)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.n


def as_points(X) -> np.ndarray:
    if isinstance(X, PointSet):
        return X.points
    return PointSet(X).points


@dataclass
class CostParams:
    z: int
    eta: float = 1.0

    def __post_init__(self) -> None:
        if self.z < 0:
            raise ValueError("z must be >= 0")
        if not self.eta > 0:
            raise ValueError("eta must be > 0")

    def threshold(self, rho: float) -> float:
        """Clip level ``eta * rho / z`` (``inf`` when eta is infinite)."""
        if self.z == 0:
            raise ValueError("threshold undefined for z = 0")
        if np.isinf(self.eta):
            return np.inf
        return self.eta * rho / self.z


@dataclass
class SeedingState:
    """Chosen centers, the nearest-center squared distances and the robust cost.

    ``d2_cache`` starts at ``+inf`` for an empty center set; ``robust_cost``
    is only meaningful once ``iteration >= 1``.
    """

    z: int
    d2_cache: np.ndarray
    center_indices: list = field(default_factory=list)
    robust_cost: float = np.inf

    @classmethod
    def empty(cls, n: int, z: int) -> "SeedingState":
        if not 0 <= z < n:
            raise ValueError(f"need 0 <= z < n, got z={z}, n={n}")
        return cls(z=z, d2_cache=np.full(n, np.inf))

    @property
    def iteration(self) -> int:
        return len(self.center_indices)

    def copy(self) -> "SeedingState":
        return SeedingState(
            z=self.z,
            d2_cache=self.d2_cache.copy(),
            center_indices=list(self.center_indices),
            robust_cost=self.robust_cost,
        )


def squared_distance(a, b) -> float:
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape[0]} vs {b.shape[0]}")
    diff = a - b
    return float(diff @ diff)


def sq_dists_to(points: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Squared distance of every row of ``points`` to the single point ``c``."""
    diff = points - c
    return np.einsum("ij,ij->i", diff, diff)


def min_sq_dists(X, centers) -> np.ndarray:
    """Per-point squared distance to the nearest of ``centers`` (an ``(m, d)`` array)."""
    pts = as_points(X)
    C = np.atleast_2d(np.asarray(centers, dtype=np.float64))
    if C.shape[0] == 0:
        raise ValueError("center set is empty")
    if C.shape[1] != pts.shape[1]:
        raise ValueError(f"dimension mismatch: points d={pts.shape[1]}, centers d={C.shape[1]}")
    out = sq_dists_to(pts, C[0])
    for c in C[1:]:
        np.minimum(out, sq_dists_to(pts, c), out=out)
    return out


def kmeans_cost(X, centers) -> float:
    return float(min_sq_dists(X, centers).sum())


def trimmed_sum(d2: np.ndarray, z: int) -> float:
    """Sum of ``d2`` after dropping its ``z`` largest entries, via O(n) selection."""
    n = d2.shape[0]
    if not 0 <= z < n:
        raise ValueError(f"need 0 <= z < n, got z={z}, n={n}")
    if z == 0:
        return float(d2.sum())
    keep = n - z
    return float(np.partition(d2, keep - 1)[:keep].sum())


def trimmed_sum_sorted(d2: np.ndarray, z: int) -> float:
    """Sort-based reference for :func:`trimmed_sum`."""
    n = d2.shape[0]
    if not 0 <= z < n:
        raise ValueError(f"need 0 <= z < n, got z={z}, n={n}")
    return float(np.sort(d2)[: n - z].sum())


def robust_cost(X, centers, z: int) -> float:
    return trimmed_sum(min_sq_dists(X, centers), z)


def robust_cost_reference(X, centers, z: int) -> float:
    return trimmed_sum_sorted(min_sq_dists(X, centers), z)


def update_cache(state: SeedingState, X, new_center: int) -> SeedingState:
    """Add ``new_center`` to ``state`` in place and return it."""
    pts = as_points(X)
    n = pts.shape[0]
    if not 0 <= new_center < n:
        raise IndexError(f"center index {new_center} out of range for n={n}")
    np.minimum(state.d2_cache, sq_dists_to(pts, pts[new_center]), out=state.d2_cache)
    # exact zero even if the arithmetic above produced -0.0 or rounding noise
    state.d2_cache[new_center] = 0.0
    state.center_indices.append(int(new_center))
    state.robust_cost = trimmed_sum(state.d2_cache, state.z)
    return state


def state_from_centers(X, center_indices: Iterable[int], z: int) -> SeedingState:
    pts = as_points(X)
    state = SeedingState.empty(pts.shape[0], z)
    for c in center_indices:
        update_cache(state, pts, c)
    return state


def _check_potential_args(state: SeedingState, params: CostParams) -> None:
    if params.z < 1:
        raise ValueError("thresholded potential needs z >= 1")
    if state.iteration < 1:
        raise ValueError("state has no centers")


def thresholded_potential(X, state: SeedingState, params: CostParams) -> float:
    """``sum_x min(d2(x), eta * rho / z)`` for the current center set."""
    _check_potential_args(state, params)
    tau = params.threshold(robust_cost_of_state(state, params.z))
    return float(np.minimum(state.d2_cache, tau).sum())


def robust_cost_of_state(state: SeedingState, z: int) -> float:
    if z == state.z:
        return state.robust_cost
    return trimmed_sum(state.d2_cache, z)


def potential_witness(X, state: SeedingState, params: CostParams) -> tuple[np.ndarray, int]:
    """Indices whose cached squared distance is within the clip level, and the excluded count.

    For this ``Y`` the potential splits as
    ``cost_Y(S) + |X \\ Y| * eta * rho / z``.
    """
    _check_potential_args(state, params)
    tau = params.threshold(robust_cost_of_state(state, params.z))
    inside = state.d2_cache <= tau
    Y = np.flatnonzero(inside)
    return Y, int(inside.size - Y.size)


def subset_cost(X, subset: Sequence[int], centers) -> float:
    """k-means cost of the points ``X[subset]`` against ``centers``."""
    pts = as_points(X)
    idx = np.asarray(subset, dtype=np.intp)
    if idx.size == 0:
        return 0.0
    return kmeans_cost(pts[idx], centers)
