"""Seeding algorithms: outlier-robust thresholded D^2 sampling and four baselines.

All seeders return dataset indices, never recomputed means. Each takes a
``numpy.random.Generator``; runs with the same generator state are identical.

``on_weights`` hooks receive ``(iteration, weights)`` right before every
weighted draw (iteration counts from 1, first weighted draw is iteration 2).
They exist for tests that compare weight vectors between seeders.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

import numpy as np

from .core import SeedingState, as_points, min_sq_dists, sq_dists_to, update_cache

WeightHook = Callable[[int, np.ndarray], None]


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


@dataclass
class RobustSeedConfig:
    z: int
    eta: float = 1.0
    t: Optional[int] = None
    k: Optional[int] = None
    c: Optional[float] = None
    rng_seed: Optional[int] = None

    def __post_init__(self) -> None:
        if self.t is None:
            if self.k is None:
                raise ValueError("give t, or k (optionally with the bi-criteria factor c)")
            self.t = bicriteria_t(self.k, self.c or 0.0)
        if self.t < 1:
            raise ValueError("t must be >= 1")
        if self.z < 1:
            raise ValueError("robust seeding needs z >= 1")
        if not self.eta > 0:
            raise ValueError("eta must be > 0")


@dataclass
class TkmConfig:
    z: int
    beta: float
    cost_guess: float
    t: int

    def __post_init__(self) -> None:
        if self.z < 1:
            raise ValueError("TKM++ needs z >= 1")
        if not self.beta > 0:
            raise ValueError("beta must be > 0")
        if not self.cost_guess > 0:
            raise ValueError("cost_guess must be > 0")
        if self.t < 1:
            raise ValueError("t must be >= 1")


@dataclass
class RkmConfig:
    k: int
    alpha: float = 0.5
    delta: float = 0.1
    rng_seed: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError("alpha must lie in [0, 1]")
        if not 0.0 < self.delta < 1.0:
            raise ValueError("delta must lie in (0, 1)")
        if self.k < 1:
            raise ValueError("k must be >= 1")

    @property
    def m(self) -> int:
        # guard against 1/0.1 style float noise pushing ceil up by one
        return math.ceil(round(self.k / self.delta, 9))


def bicriteria_t(k: int, c: float) -> int:
    """Number of iterations ``(1 + c) * k`` rounded up."""
    if k < 1 or c < 0:
        raise ValueError("need k >= 1 and c >= 0")
    return math.ceil(round((1.0 + c) * k, 9))


def _check_count(k: int, n: int, what: str = "k") -> None:
    if k < 1:
        raise ValueError(f"{what} must be >= 1")
    if k > n:
        raise ValueError(f"{what}={k} exceeds the number of points n={n}")


def draw_index(weights: np.ndarray, rng: np.random.Generator, chosen: np.ndarray) -> int:
    """Draw an index with probability proportional to ``weights``.

    Falls back to a uniform draw over unchosen indices when every weight is zero.
    """
    cum = np.cumsum(weights)
    total = cum[-1]
    if not (total > 0 and np.isfinite(total)):
        return int(rng.choice(np.flatnonzero(~chosen)))
    u = rng.random() * total
    idx = int(np.searchsorted(cum, u, side="right"))
    return min(idx, weights.shape[0] - 1)


def random_seed(X, k: int, rng) -> list[int]:
    pts = as_points(X)
    _check_count(k, pts.shape[0])
    return [int(i) for i in make_rng(rng).choice(pts.shape[0], size=k, replace=False)]


def _d2_loop(
    pts: np.ndarray,
    t: int,
    z: int,
    rng: np.random.Generator,
    weight_fn: Callable[[SeedingState], np.ndarray],
    first: Optional[int],
    on_weights: Optional[WeightHook],
) -> SeedingState:
    n = pts.shape[0]
    _check_count(t, n, "t")
    state = SeedingState.empty(n, z)
    chosen = np.zeros(n, dtype=bool)
    for i in range(1, t + 1):
        if i == 1:
            idx = int(rng.integers(n)) if first is None else int(first)
        else:
            w = weight_fn(state)
            if on_weights is not None:
                on_weights(i, w)
            idx = draw_index(w, rng, chosen)
        chosen[idx] = True
        update_cache(state, pts, idx)
    return state


def kmeanspp_state(
    X, k: int, rng, z: int = 0, first: Optional[int] = None, on_weights: Optional[WeightHook] = None
) -> SeedingState:
    """k-means++ (plain D^2 sampling), returning the full seeding state."""
    return _d2_loop(as_points(X), k, z, make_rng(rng), lambda s: s.d2_cache, first, on_weights)


def kmeanspp_seed(
    X, k: int, rng, first: Optional[int] = None, on_weights: Optional[WeightHook] = None
) -> list[int]:
    return kmeanspp_state(X, k, rng, first=first, on_weights=on_weights).center_indices


def robust_seed(
    X,
    cfg: RobustSeedConfig,
    rng=None,
    first: Optional[int] = None,
    on_weights: Optional[WeightHook] = None,
) -> SeedingState:
    """Thresholded D^2 sampling.

    Iteration 1 picks uniformly; every later iteration picks ``x`` with
    probability proportional to ``min(d2(x), eta * rho / z)`` where ``rho`` is
    the robust cost of the centers chosen so far in this run. No external
    cost estimate is used.
    """
    pts = as_points(X)
    n = pts.shape[0]
    if not cfg.z < n:
        raise ValueError(f"need z < n, got z={cfg.z}, n={n}")
    rng = make_rng(cfg.rng_seed if rng is None else rng)
    eta, z = cfg.eta, cfg.z

    def weights(state: SeedingState) -> np.ndarray:
        tau = np.inf if np.isinf(eta) else eta * state.robust_cost / z
        return np.minimum(state.d2_cache, tau)

    return _d2_loop(pts, cfg.t, z, rng, weights, first, on_weights)


def tkmpp_seed(
    X,
    cfg: TkmConfig,
    rng,
    first: Optional[int] = None,
    on_weights: Optional[WeightHook] = None,
) -> SeedingState:
    """D^2 sampling clipped at the fixed level ``beta * cost_guess / z``."""
    pts = as_points(X)
    if not cfg.z < pts.shape[0]:
        raise ValueError(f"need z < n, got z={cfg.z}, n={pts.shape[0]}")
    tau = cfg.beta * cfg.cost_guess / cfg.z
    return _d2_loop(
        pts, cfg.t, cfg.z, make_rng(rng), lambda s: np.minimum(s.d2_cache, tau), first, on_weights
    )


def rkmpp_seed(
    X,
    cfg: RkmConfig,
    z: int,
    rng=None,
    on_weights: Optional[WeightHook] = None,
) -> list[int]:
    """Mixture sampling of ``ceil(k / delta)`` candidates, then weighted k-means++ over them.

    Phase 1 draws candidates one at a time from
    ``alpha / n + (1 - alpha) * d2(x) / sum(d2)``, without repeats.
    Phase 2 weights each candidate by how many points it is nearest to and
    runs weighted D^2 sampling on the candidates to keep ``k`` of them.
    ``z`` is accepted for interface symmetry; the method does not use it.
    """
    pts = as_points(X)
    n = pts.shape[0]
    m = cfg.m
    _check_count(cfg.k, n)
    _check_count(m, n, "ceil(k/delta)")
    rng = make_rng(cfg.rng_seed if rng is None else rng)

    d2 = np.full(n, np.inf)
    chosen = np.zeros(n, dtype=bool)
    candidates: list[int] = []
    for i in range(1, m + 1):
        if i == 1:
            idx = int(rng.integers(n))
        else:
            total = d2.sum()
            unif = (~chosen) / (n - len(candidates))
            if total > 0:
                p = cfg.alpha * unif + (1.0 - cfg.alpha) * (d2 / total)
            else:
                p = unif
            if on_weights is not None:
                on_weights(i, p)
            idx = draw_index(p, rng, chosen)
        chosen[idx] = True
        candidates.append(idx)
        np.minimum(d2, sq_dists_to(pts, pts[idx]), out=d2)
        d2[idx] = 0.0

    cand = np.asarray(candidates)
    cpts = pts[cand]
    nearest = _nearest_center(pts, cpts)
    mult = np.bincount(nearest, minlength=m).astype(np.float64)
    picked = _weighted_kmeanspp(cpts, mult, cfg.k, rng)
    return [int(cand[j]) for j in picked]


def _nearest_center(pts: np.ndarray, centers: np.ndarray) -> np.ndarray:
    best = sq_dists_to(pts, centers[0])
    arg = np.zeros(pts.shape[0], dtype=np.intp)
    for j in range(1, centers.shape[0]):
        dj = sq_dists_to(pts, centers[j])
        closer = dj < best
        best[closer] = dj[closer]
        arg[closer] = j
    return arg


def _weighted_kmeanspp(
    pts: np.ndarray, weights: np.ndarray, k: int, rng: np.random.Generator
) -> list[int]:
    m = pts.shape[0]
    chosen = np.zeros(m, dtype=bool)
    d2 = np.full(m, np.inf)
    out: list[int] = []
    for i in range(k):
        w = weights if i == 0 else weights * d2
        w = np.where(chosen, 0.0, w)
        idx = draw_index(w, rng, chosen)
        chosen[idx] = True
        out.append(idx)
        np.minimum(d2, sq_dists_to(pts, pts[idx]), out=d2)
        d2[idx] = 0.0
    return out


class Algorithm(str, Enum):
    RAND = "RAND"
    KMPP = "KMPP"
    TKMPP = "TKMPP"
    RKMPP = "RKMPP"
    ROBUST = "ROBUST"

    @classmethod
    def parse(cls, name) -> "Algorithm":
        if isinstance(name, cls):
            return name
        key = str(name).upper().replace("+", "P").replace("-", "").replace("_", "")
        aliases = {"RANDOM": "RAND", "KMEANSPP": "KMPP", "THISWORK": "ROBUST"}
        key = aliases.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown algorithm {name!r}") from None

    @property
    def label(self) -> str:
        return {
            "RAND": "RAND",
            "KMPP": "KM++",
            "TKMPP": "TKM++",
            "RKMPP": "RKM++",
            "ROBUST": "This work",
        }[self.value]


@dataclass
class SeedParams:
    """Union of every seeder's knobs, used by :func:`seed`."""

    k: int
    z: int = 0
    t: Optional[int] = None
    eta: float = 1.0
    c: Optional[float] = None
    beta: float = 1.0
    cost_guess: Optional[float] = None
    alpha: float = 0.5
    delta: float = 0.1

    @property
    def n_centers(self) -> int:
        if self.t is not None:
            return self.t
        return bicriteria_t(self.k, self.c or 0.0)


def seed(X, algorithm, params: SeedParams, rng) -> list[int]:
    alg = Algorithm.parse(algorithm)
    rng = make_rng(rng)
    t = params.n_centers
    if alg is Algorithm.RAND:
        return random_seed(X, t, rng)
    if alg is Algorithm.KMPP:
        return kmeanspp_seed(X, t, rng)
    if alg is Algorithm.ROBUST:
        return robust_seed(X, RobustSeedConfig(z=params.z, eta=params.eta, t=t), rng).center_indices
    if alg is Algorithm.TKMPP:
        if params.cost_guess is None:
            raise ValueError("TKM++ needs a cost_guess")
        cfg = TkmConfig(z=params.z, beta=params.beta, cost_guess=params.cost_guess, t=t)
        return tkmpp_seed(X, cfg, rng).center_indices
    if alg is Algorithm.RKMPP:
        return rkmpp_seed(X, RkmConfig(k=t, alpha=params.alpha, delta=params.delta), params.z, rng)
    raise ValueError(f"unknown algorithm {algorithm!r}")  # pragma: no cover


def lloyd_refine(X, centers, z: int = 0) -> np.ndarray:
    """One trimmed Lloyd pass: assign the ``n - z`` nearest points, return the new means.

    A center that receives no inlier keeps its position.
    """
    pts = as_points(X)
    C = np.atleast_2d(np.asarray(centers, dtype=np.float64)).copy()
    nearest = _nearest_center(pts, C)
    d2 = min_sq_dists(pts, C)
    keep = np.ones(pts.shape[0], dtype=bool)
    if z > 0:
        keep[np.argsort(d2, kind="stable")[-z:]] = False
    for j in range(C.shape[0]):
        members = keep & (nearest == j)
        if members.any():
            C[j] = pts[members].mean(axis=0)
    return C
