"""Synthetic planted instances, CSV ingestion and the real-data outlier labeling recipes."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .core import PointSet, as_points


class Provenance(str, Enum):
    SYNTHETIC = "synthetic"
    SMALL_CLASS = "small_class"
    INJECTED_NOISE = "injected_noise"
    RAW = "raw"


@dataclass
class LabeledDataset:
    points: PointSet
    true_outliers: frozenset
    provenance: Provenance = Provenance.RAW
    class_labels: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = self.points.n
        self.true_outliers = frozenset(int(i) for i in self.true_outliers)
        if any(i < 0 or i >= n for i in self.true_outliers):
            raise ValueError("true_outliers index out of range")
        self.points.true_outliers = self.true_outliers

    @property
    def X(self) -> np.ndarray:
        return self.points.points

    def manifest(self, **extra) -> dict:
        out = {
            "provenance": self.provenance.value,
            "n": self.points.n,
            "d": self.points.d,
            "n_true_outliers": len(self.true_outliers),
        }
        out.update(self.meta)
        out.update(extra)
        return out


@dataclass
class SyntheticSpec:
    n: int = 1000
    d: int = 2
    k: int = 20
    z: int = 25
    side: float = 100.0
    sigma: float = 1.0
    rng_seed: Optional[int] = 0

    def __post_init__(self) -> None:
        if self.k < 1 or self.n < self.k:
            raise ValueError("need 1 <= k <= n")
        if self.z < 0 or self.d < 1:
            raise ValueError("need z >= 0 and d >= 1")
        if not (self.side > 0 and self.sigma >= 0):
            raise ValueError("side must be > 0 and sigma >= 0")

    def cluster_sizes(self) -> list[int]:
        base, extra = divmod(self.n, self.k)
        return [base + (1 if j < extra else 0) for j in range(self.k)]


def generate_synthetic(spec: SyntheticSpec, rng=None) -> LabeledDataset:
    """Planted Gaussian clusters in a hypercube plus uniformly placed outliers.

    ``k + z`` points are drawn uniformly in ``[0, side]^d``; the first ``k``
    become cluster means and receive Gaussian points, the other ``z`` are the
    outliers, appended at the end.
    """
    rng = np.random.default_rng(spec.rng_seed) if rng is None else rng
    anchors = rng.uniform(0.0, spec.side, size=(spec.k + spec.z, spec.d))
    means, outliers = anchors[: spec.k], anchors[spec.k :]
    sizes = spec.cluster_sizes()
    blocks = [m + spec.sigma * rng.standard_normal((s, spec.d)) for m, s in zip(means, sizes)]
    labels = np.concatenate([np.full(s, j) for j, s in enumerate(sizes)] + [np.full(spec.z, -1)])
    pts = np.vstack(blocks + [outliers])
    return LabeledDataset(
        points=PointSet(pts),
        true_outliers=frozenset(range(spec.n, spec.n + spec.z)),
        provenance=Provenance.SYNTHETIC,
        class_labels=labels,
        meta={"synthetic": asdict(spec), "means": means.tolist()},
    )


def load_csv(
    path: Union[str, Path],
    numeric_columns: Optional[Sequence[Union[int, str]]] = None,
    label_column: Optional[Union[int, str]] = None,
    header: bool = False,
    delimiter: Optional[str] = ",",
) -> LabeledDataset:
    """Read a delimited text file into a dense point set.

    Columns are addressed by 0-based position, or by name when ``header`` is
    set. ``numeric_columns=None`` takes every column except the label.
    ``delimiter=None`` splits on runs of whitespace.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        if delimiter is None:
            rows = [line.split() for line in fh if line.strip()]
        else:
            rows = [r for r in csv.reader(fh, delimiter=delimiter) if r and any(c.strip() for c in r)]
    if header:
        if not rows:
            raise ValueError(f"{path}: missing header row")
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
    else:
        names = None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    width = len(rows[0])
    first_data_row = 2 if header else 1
    for r, row in enumerate(rows):
        if len(row) != width:
            raise ValueError(
                f"{path}: row {r + first_data_row} has {len(row)} fields, expected {width}"
            )

    def resolve(col) -> int:
        if isinstance(col, str) and not col.lstrip("-").isdigit():
            if names is None:
                raise ValueError(f"column {col!r} given by name but header=False")
            return names.index(col)
        i = int(col)
        if not -width <= i < width:
            raise ValueError(f"column {col} out of range for {width} fields")
        return i % width

    lab = resolve(label_column) if label_column is not None else None
    cols = (
        [c for c in range(width) if c != lab]
        if numeric_columns is None
        else [resolve(c) for c in numeric_columns]
    )
    pts = np.empty((len(rows), len(cols)))
    for j, c in enumerate(cols):
        try:
            col = np.asarray([row[c] for row in rows], dtype=np.float64)
        except ValueError:
            col = None
        if col is None or not np.all(np.isfinite(col)):
            _raise_bad_cell(path, rows, c, names, first_data_row)
        pts[:, j] = col
    labels = np.asarray([row[lab].strip() for row in rows]) if lab is not None else None
    return LabeledDataset(
        points=PointSet(pts),
        true_outliers=frozenset(),
        class_labels=labels,
        meta={"source": str(path), "columns": cols},
    )


def _raise_bad_cell(path, rows, c, names, first_data_row) -> None:
    for r, row in enumerate(rows):
        cell = row[c].strip()
        try:
            val = float(cell)
        except ValueError:
            val = None
        if val is None or not math.isfinite(val):
            raise ValueError(
                f"{path}: row {r + first_data_row}, column {names[c] if names else c}: "
                f"cannot parse {cell!r} as a finite number"
            )


def write_csv(path: Union[str, Path], ds: LabeledDataset, header: bool = True) -> None:
    """Write coordinates plus an ``is_outlier`` column (and ``label`` when present)."""
    path = Path(path)
    X = ds.X
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if header:
            cols = [f"x{j}" for j in range(X.shape[1])] + ["is_outlier"]
            if ds.class_labels is not None:
                cols.append("label")
            w.writerow(cols)
        for i, row in enumerate(X):
            out = [repr(float(v)) for v in row] + [int(i in ds.true_outliers)]
            if ds.class_labels is not None:
                out.append(ds.class_labels[i])
            w.writerow(out)


def write_manifest(path: Union[str, Path], manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


def zscore_normalize(X) -> PointSet:
    """Per-column ``(x - mean) / std`` with the population std; constant columns are only centred."""
    pts = as_points(X)
    if pts.shape[0] < 2:
        raise ValueError("need at least 2 points to normalize")
    mean = pts.mean(axis=0)
    std = pts.std(axis=0)
    # a constant column can leave rounding residue of order eps * |mean|
    constant = std <= 1e-12 * np.maximum(np.abs(mean), 1.0)
    out = (pts - mean) / np.where(constant, 1.0, std)
    out[:, constant] = 0.0
    true = X.true_outliers if isinstance(X, PointSet) else None
    return PointSet(out, true)


def label_small_classes(
    X,
    class_labels: Sequence,
    major_classes: Optional[Sequence] = None,
    min_fraction: Optional[float] = None,
) -> LabeledDataset:
    """Mark every point whose class is not a major class as a true outlier.

    Give either the explicit ``major_classes`` or ``min_fraction``, in which case
    classes holding less than that share of the points are the outliers.
    """
    pts = X if isinstance(X, PointSet) else PointSet(X)
    labels = np.asarray(class_labels)
    if labels.shape[0] != pts.n:
        raise ValueError("class_labels length does not match the number of points")
    if (major_classes is None) == (min_fraction is None):
        raise ValueError("give exactly one of major_classes or min_fraction")
    if major_classes is not None:
        major = set(major_classes)
        if not major:
            raise ValueError("major_classes is empty")
    else:
        values, counts = np.unique(labels, return_counts=True)
        major = {v for v, c in zip(values.tolist(), counts) if c >= min_fraction * pts.n}
    keep = np.isin(labels, np.asarray(sorted(major, key=str), dtype=labels.dtype))
    return LabeledDataset(
        points=PointSet(pts.points),
        true_outliers=frozenset(np.flatnonzero(~keep).tolist()),
        provenance=Provenance.SMALL_CLASS,
        class_labels=labels,
        meta={"major_classes": sorted(map(str, major))},
    )


def smallest_classes(class_labels: Sequence, count: int) -> list:
    """The ``count`` least populated class labels (ties by label order)."""
    values, counts = np.unique(np.asarray(class_labels), return_counts=True)
    order = np.lexsort((values, counts))
    return values[order[:count]].tolist()


def inject_gaussian_noise(
    X,
    rng,
    fraction: Optional[float] = None,
    count: Optional[int] = None,
    noise_sigma: Union[float, np.ndarray, None] = None,
    class_labels: Optional[np.ndarray] = None,
) -> LabeledDataset:
    """Add independent Gaussian noise to a random subset of points and label it.

    ``noise_sigma=None`` uses five times each column's population std.
    """
    pts = as_points(X)
    n = pts.shape[0]
    if (fraction is None) == (count is None):
        raise ValueError("give exactly one of fraction or count")
    if count is None:
        count = int(round(fraction * n))
    if not 0 < count < n:
        raise ValueError(f"need 0 < count < n, got count={count}, n={n}")
    if noise_sigma is None:
        noise_sigma = 5.0 * pts.std(axis=0)
    sigma = np.broadcast_to(np.asarray(noise_sigma, dtype=np.float64), (pts.shape[1],))
    if np.any(sigma < 0):
        raise ValueError("noise_sigma must be >= 0")
    chosen = np.sort(rng.choice(n, size=count, replace=False))
    out = pts.copy()
    out[chosen] += rng.standard_normal((count, pts.shape[1])) * sigma
    return LabeledDataset(
        points=PointSet(out),
        true_outliers=frozenset(chosen.tolist()),
        provenance=Provenance.INJECTED_NOISE,
        class_labels=class_labels,
        meta={"noise_count": count, "noise_sigma": sigma.tolist()},
    )


# Column layouts of the public files used by the real-data recipes.
SHUTTLE_FEATURES = list(range(9))
SHUTTLE_LABEL = 9
SHUTTLE_MAJOR = ["1", "2", "3", "4", "5"]
KDD_CATEGORICAL_OR_BINARY = {1, 2, 3, 6, 11, 20, 21}
KDD_FEATURES = [c for c in range(41) if c not in KDD_CATEGORICAL_OR_BINARY]
KDD_LABEL = 41
KDD_MAJOR = ["normal.", "neptune.", "smurf."]
SKIN_FEATURES = [0, 1, 2]
SKIN_LABEL = 3

RECIPES = ("shuttle-small", "shuttle-noise", "kdd-small", "skin-noise")


def prepare(recipe: str, path: Union[str, Path], seed: int = 0, noise_sigma=None) -> LabeledDataset:
    """Apply one of the named real-data recipes to a raw downloaded file."""
    rng = np.random.default_rng(seed)
    if recipe == "shuttle-small":
        raw = load_csv(path, SHUTTLE_FEATURES, SHUTTLE_LABEL, delimiter=None)
        ds = label_small_classes(raw.points, raw.class_labels, major_classes=SHUTTLE_MAJOR)
    elif recipe == "shuttle-noise":
        raw = load_csv(path, SHUTTLE_FEATURES, SHUTTLE_LABEL, delimiter=None)
        ds = inject_gaussian_noise(
            raw.points, rng, count=1000, noise_sigma=noise_sigma, class_labels=raw.class_labels
        )
    elif recipe == "kdd-small":
        raw = load_csv(path, KDD_FEATURES, KDD_LABEL)
        ds = label_small_classes(
            zscore_normalize(raw.points), raw.class_labels, major_classes=KDD_MAJOR
        )
    elif recipe == "skin-noise":
        raw = load_csv(path, SKIN_FEATURES, SKIN_LABEL, delimiter="\t")
        ds = inject_gaussian_noise(
            raw.points, rng, fraction=0.025, noise_sigma=noise_sigma, class_labels=raw.class_labels
        )
    else:
        raise ValueError(f"unknown recipe {recipe!r}; choose from {', '.join(RECIPES)}")
    ds.meta.update({"recipe": recipe, "source": str(path), "seed": seed})
    return ds
