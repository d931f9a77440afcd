"""Outlier marking, precision/recall, run summaries and exact small-instance oracles."""
from __future__ import annotations

import itertools
import statistics
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import as_points, kmeans_cost, sq_dists_to

ORACLE_MAX_N = 12
ORACLE_MAX_K = 3
ORACLE_MAX_Z = 2


@dataclass
class ClusteringResult:
    center_indices: list
    predicted_outliers: frozenset
    inlier_cost: float
    assignments: np.ndarray  # position in center_indices per point, -1 for outliers
    d2: np.ndarray = field(repr=False, default=None)

    @property
    def inliers(self) -> np.ndarray:
        return np.flatnonzero(self.assignments >= 0)


def mark_outliers(X, centers: Sequence[int], z: int) -> ClusteringResult:
    """Mark the ``z`` points farthest from their nearest center as outliers.

    Among equal distances the higher index is marked first.
    """
    pts = as_points(X)
    centers = [int(c) for c in centers]
    if not centers:
        raise ValueError("center set is empty")
    res = mark_outliers_at(pts, pts[centers], z, _zero=centers)
    res.center_indices = centers
    return res


def mark_outliers_at(X, center_points, z: int, _zero: Sequence[int] = ()) -> ClusteringResult:
    """Same as :func:`mark_outliers` for arbitrary center coordinates (e.g. after Lloyd)."""
    pts = as_points(X)
    n = pts.shape[0]
    if not 0 <= z < n:
        raise ValueError(f"need 0 <= z < n, got z={z}, n={n}")
    C = np.atleast_2d(np.asarray(center_points, dtype=np.float64))
    if C.shape[0] == 0:
        raise ValueError("center set is empty")
    best = sq_dists_to(pts, C[0])
    assign = np.zeros(n, dtype=np.intp)
    for j in range(1, C.shape[0]):
        dj = sq_dists_to(pts, C[j])
        closer = dj < best
        best[closer] = dj[closer]
        assign[closer] = j
    for j, c in enumerate(_zero):
        best[c] = 0.0
        assign[c] = j
    if z > 0:
        # primary key: distance descending, secondary: index descending
        order = np.lexsort((-np.arange(n), -best))
        outliers = order[:z]
        assign[outliers] = -1
    else:
        outliers = np.empty(0, dtype=np.intp)
    return ClusteringResult(
        center_indices=[],
        predicted_outliers=frozenset(int(i) for i in outliers),
        inlier_cost=float(best[assign >= 0].sum()),
        assignments=assign,
        d2=best,
    )


def precision_recall(
    true_outliers: Iterable[int], predicted_outliers: Iterable[int]
) -> tuple[Optional[float], Optional[float]]:
    """``(|T & P| / |P|, |T & P| / |T|)``; a ratio with an empty denominator is ``None``."""
    truth = set(true_outliers)
    pred = set(predicted_outliers)
    hit = len(truth & pred)
    precision = hit / len(pred) if pred else None
    recall = hit / len(truth) if truth else None
    return precision, recall


@dataclass
class OracleSolution:
    opt_cost: float
    opt_outliers: frozenset
    opt_partition: list  # list of index lists, one per nonempty cluster
    opt_means: np.ndarray


@lru_cache(maxsize=None)
def restricted_growth_strings(m: int, k: int) -> np.ndarray:
    """All set partitions of ``m`` items into at most ``k`` blocks, as label arrays."""
    if m == 0:
        return np.zeros((1, 0), dtype=np.int8)
    out = []
    labels = [0] * m

    def rec(i: int, top: int) -> None:
        if i == m:
            out.append(labels.copy())
            return
        for lab in range(min(top + 2, k)):
            labels[i] = lab
            rec(i + 1, max(top, lab))

    labels[0] = 0
    rec(1, 0)
    return np.asarray(out, dtype=np.int8)


def _partition_costs(P: np.ndarray, labels: np.ndarray, k: int) -> np.ndarray:
    """Within-group sum of squares for every labeling row, vectorised over rows."""
    sq = np.einsum("ij,ij->i", P, P)
    total = np.zeros(labels.shape[0])
    for g in range(k):
        member = (labels == g).astype(np.float64)
        cnt = member.sum(axis=1)
        sums = member @ P
        ssq = member @ sq
        with np.errstate(invalid="ignore", divide="ignore"):
            sse = ssq - np.einsum("ij,ij->i", sums, sums) / cnt
        total += np.where(cnt > 0, sse, 0.0)
    return total


def _groups_and_means(P: np.ndarray, inlier_idx: np.ndarray, labels: np.ndarray):
    groups, means = [], []
    for g in np.unique(labels):
        members = inlier_idx[labels == g]
        groups.append(sorted(int(i) for i in members))
        means.append(P[labels == g].mean(axis=0))
    return groups, np.asarray(means)


def _exact_group_cost(P: np.ndarray, labels: np.ndarray) -> float:
    cost = 0.0
    for g in np.unique(labels):
        block = P[labels == g]
        diff = block - block.mean(axis=0)
        cost += float(np.einsum("ij,ij->", diff, diff))
    return cost


def brute_force_oracle(X, k: int, z: int) -> OracleSolution:
    """Exact minimiser of the robust objective by exhaustive enumeration.

    Every size-``z`` outlier subset is paired with every partition of the
    remaining points into at most ``k`` groups; centers are group means.
    Near-ties from the vectorised screen are re-scored with centred sums.
    """
    pts = as_points(X)
    n = pts.shape[0]
    if n > ORACLE_MAX_N or k > ORACLE_MAX_K or z > ORACLE_MAX_Z:
        raise ValueError(
            f"instance too large for the exhaustive oracle "
            f"(n={n}<={ORACLE_MAX_N}, k={k}<={ORACLE_MAX_K}, z={z}<={ORACLE_MAX_Z} required)"
        )
    if k < 1 or not 0 <= z < n:
        raise ValueError("need k >= 1 and 0 <= z < n")

    labelings = restricted_growth_strings(n - z, k)
    candidates = []
    for out in itertools.combinations(range(n), z):
        inl = np.setdiff1d(np.arange(n), np.asarray(out, dtype=np.intp))
        costs = _partition_costs(pts[inl], labelings, k)
        lo = costs.min()
        for row in np.flatnonzero(costs <= lo + 1e-9 * max(1.0, abs(lo))):
            candidates.append((out, inl, labelings[row]))

    best = None
    for out, inl, lab in candidates:
        c = _exact_group_cost(pts[inl], lab)
        if best is None or c < best[0]:
            best = (c, out, inl, lab)
    cost, out, inl, lab = best
    groups, means = _groups_and_means(pts[inl], inl, lab)
    return OracleSolution(
        opt_cost=cost,
        opt_outliers=frozenset(int(i) for i in out),
        opt_partition=groups,
        opt_means=means,
    )


@dataclass
class BandReport:
    size: int
    mean_cost: float  # cost of A about its own mean
    cost_to_S: float  # cost of A against S
    mu_to_S: float  # squared distance from the mean of A to S
    band_size: int  # |B|
    hypothesis: bool
    mu_bound_ok: Optional[bool] = None
    band_ok: Optional[bool] = None

    @property
    def counterexample(self) -> bool:
        return self.hypothesis and not (self.mu_bound_ok and self.band_ok)


def band_check(A, S, rtol: float = 1e-12) -> BandReport:
    """Evaluate the approximate-uniformity bound for a point set ``A`` and centers ``S``.

    When ``cost(A, S) >= 64 cost(A, mean)`` both conclusions are checked:
    ``d2(mean, S) >= 31 / |A| * cost(A, mean)`` and ``|B| >= 25/31 |A|`` where
    ``B`` holds the points with ``d2(x, S)`` inside ``[d2(mean, S)/3, 7 d2(mean, S)/3]``.
    ``rtol`` absorbs floating-point rounding at exact equality.
    """
    A = as_points(A)
    S = np.atleast_2d(np.asarray(S, dtype=np.float64))
    mu = A.mean(axis=0)
    mean_cost = kmeans_cost(A, mu[None, :])
    d2x = _min_d2(A, S)
    cost_to_S = float(d2x.sum())
    mu_to_S = float(_min_d2(mu[None, :], S)[0])
    lo, hi = mu_to_S / 3.0, 7.0 * mu_to_S / 3.0
    slack = rtol * max(mu_to_S, 1e-300)
    band = int(np.count_nonzero((d2x >= lo - slack) & (d2x <= hi + slack)))
    size = A.shape[0]
    rep = BandReport(size, mean_cost, cost_to_S, mu_to_S, band, hypothesis=cost_to_S >= 64 * mean_cost)
    if rep.hypothesis:
        rep.mu_bound_ok = mu_to_S * (1 + rtol) >= 31.0 / size * mean_cost
        rep.band_ok = 31 * band >= 25 * size
    return rep


def _min_d2(P: np.ndarray, S: np.ndarray) -> np.ndarray:
    out = sq_dists_to(P, S[0])
    for s in S[1:]:
        np.minimum(out, sq_dists_to(P, s), out=out)
    return out


@dataclass
class RunRecord:
    result: ClusteringResult
    precision: Optional[float]
    recall: Optional[float]
    seconds: float


@dataclass
class MetricsReport:
    runs: int
    cost_min: float
    cost_avg: float
    cost_med: float
    precision_max: Optional[float]
    precision_avg: Optional[float]
    precision_med: Optional[float]
    recall_max: Optional[float]
    recall_avg: Optional[float]
    recall_med: Optional[float]
    time_avg: float


def _max_avg_med(values: list) -> tuple:
    vals = [v for v in values if v is not None]
    if not vals:
        return None, None, None
    return max(vals), statistics.fmean(vals), statistics.median(vals)


def summarize(runs: Sequence[RunRecord]) -> MetricsReport:
    if not runs:
        raise ValueError("cannot summarize an empty run list")
    costs = [r.result.inlier_cost for r in runs]
    pmax, pavg, pmed = _max_avg_med([r.precision for r in runs])
    rmax, ravg, rmed = _max_avg_med([r.recall for r in runs])
    return MetricsReport(
        runs=len(runs),
        cost_min=min(costs),
        cost_avg=statistics.fmean(costs),
        cost_med=statistics.median(costs),
        precision_max=pmax,
        precision_avg=pavg,
        precision_med=pmed,
        recall_max=rmax,
        recall_avg=ravg,
        recall_med=rmed,
        time_avg=statistics.fmean(r.seconds for r in runs),
    )
