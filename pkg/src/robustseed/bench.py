"""Experiment runner: repetitions, timing of the seeding phase and table output."""
from __future__ import annotations

import csv
import io
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .core import robust_cost
from .data import LabeledDataset, SyntheticSpec, generate_synthetic, load_csv, prepare
from .evaluate import RunRecord, mark_outliers, mark_outliers_at, precision_recall, summarize
from .seeding import Algorithm, SeedParams, kmeanspp_seed, lloyd_refine, make_rng, seed

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
TABLE_ORDER = [Algorithm.RAND, Algorithm.KMPP, Algorithm.TKMPP, Algorithm.RKMPP, Algorithm.ROBUST]


@dataclass
class DatasetSource:
    """Where an experiment's points come from.

    ``kind`` is ``synthetic`` (uses ``synthetic``), ``recipe`` (raw file plus a
    named labeling recipe) or ``csv`` (a file written by ``gen``/``prep`` with
    an ``is_outlier`` column).
    """

    kind: str = "synthetic"
    synthetic: Optional[SyntheticSpec] = None
    path: Optional[str] = None
    recipe: Optional[str] = None
    seed: int = 0

    @classmethod
    def from_dict(cls, raw: dict) -> "DatasetSource":
        raw = dict(raw)
        syn = raw.pop("synthetic", None)
        if isinstance(syn, dict):
            syn = SyntheticSpec(**syn)
        src = cls(synthetic=syn, **raw)
        if src.kind == "synthetic" and src.synthetic is None:
            src.synthetic = SyntheticSpec()
        return src

    def load(self) -> LabeledDataset:
        if self.kind == "synthetic":
            return generate_synthetic(self.synthetic)
        if self.kind == "recipe":
            return prepare(self.recipe, self.path, seed=self.seed)
        if self.kind == "csv":
            return load_labeled_csv(self.path)
        raise ValueError(f"unknown dataset kind {self.kind!r}")


def load_labeled_csv(path) -> LabeledDataset:
    """Read a CSV produced by ``gen``/``prep`` (header, ``x*`` columns, ``is_outlier``)."""
    with open(path, newline="", encoding="utf-8") as fh:
        names = next(csv.reader(fh))
    coords = [c for c in names if c.startswith("x")]
    raw = load_csv(path, coords, header=True)
    flags = load_csv(path, ["is_outlier"], header=True).X[:, 0]
    return LabeledDataset(
        points=raw.points,
        true_outliers=frozenset(np.flatnonzero(flags > 0).tolist()),
        meta={"source": str(path)},
    )


@dataclass
class ExperimentConfig:
    algorithm: str
    k: int
    z: int
    dataset: DatasetSource = field(default_factory=DatasetSource)
    t: Optional[int] = None
    eta: Optional[float] = None
    beta: Optional[float] = None
    eta_from_beta: str = "inverse"  # eta = 1/beta ("inverse") or eta = beta ("equal")
    alpha: float = 0.5
    delta: float = 0.1
    c: Optional[float] = None
    cost_guess: Optional[float] = None
    n_marked: Optional[int] = None  # predicted outlier count, defaults to z
    repetitions: int = 10
    base_seed: int = 0
    lloyd: bool = False
    name: Optional[str] = None

    def __post_init__(self) -> None:
        if isinstance(self.dataset, dict):
            self.dataset = DatasetSource.from_dict(self.dataset)
        self.validate()

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**raw)

    @property
    def alg(self) -> Algorithm:
        return Algorithm.parse(self.algorithm)

    def validate(self) -> None:
        alg = self.alg
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.k < 1 or self.z < 0:
            raise ValueError("need k >= 1 and z >= 0")
        if self.n_marked is not None and self.n_marked < 0:
            raise ValueError("n_marked must be >= 0")
        if alg in (Algorithm.ROBUST, Algorithm.TKMPP) and self.z < 1:
            raise ValueError(f"{alg.label} needs z >= 1")
        if alg is Algorithm.ROBUST:
            if self.eta is None and self.beta is None:
                raise ValueError("robust seeding needs eta (or beta with an eta mapping)")
            if self.eta_from_beta not in ("inverse", "equal"):
                raise ValueError("eta_from_beta must be 'inverse' or 'equal'")
            if self.resolved_eta() <= 0:
                raise ValueError("eta must be > 0")
        if alg is Algorithm.TKMPP and (self.beta is None or self.beta <= 0):
            raise ValueError("TKM++ needs beta > 0")
        if alg is Algorithm.RKMPP and not (0 <= self.alpha <= 1 and 0 < self.delta < 1):
            raise ValueError("RKM++ needs alpha in [0, 1] and delta in (0, 1)")
        if self.t is not None and self.t < 1:
            raise ValueError("t must be >= 1")
        if self.c is not None and self.c < 0:
            raise ValueError("c must be >= 0")

    def resolved_eta(self) -> float:
        if self.eta is not None:
            return float(self.eta)
        return 1.0 / self.beta if self.eta_from_beta == "inverse" else float(self.beta)

    def seed_params(self, cost_guess: Optional[float] = None) -> SeedParams:
        alg = self.alg
        return SeedParams(
            k=self.k,
            z=self.z,
            t=self.t,
            c=self.c,
            eta=self.resolved_eta() if alg is Algorithm.ROBUST else 1.0,
            beta=self.beta if self.beta is not None else 1.0,
            cost_guess=cost_guess,
            alpha=self.alpha,
            delta=self.delta,
        )

    def param_echo(self) -> str:
        alg = self.alg
        parts = [f"k={self.k}", f"z={self.z}"]
        if self.t is not None or self.c is not None:
            parts.append(f"t={self.seed_params().n_centers}")
        if alg is Algorithm.ROBUST:
            if self.beta is not None:
                parts.append(f"beta={self.beta:g}")
            parts.append(f"eta={self.resolved_eta():g}")
        elif alg is Algorithm.TKMPP:
            parts.append(f"beta={self.beta:g}")
        elif alg is Algorithm.RKMPP:
            parts.append(f"alpha={self.alpha:g}")
            parts.append(f"delta={self.delta:g}")
        if self.n_marked is not None and self.n_marked != self.z:
            parts.append(f"marked={self.n_marked}")
        return " ".join(parts)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["dataset"] = asdict(self.dataset)
        return out


@dataclass
class TableRow:
    method: str
    params: str
    precision_max: Optional[float] = None
    precision_avg: Optional[float] = None
    precision_med: Optional[float] = None
    recall_max: Optional[float] = None
    recall_avg: Optional[float] = None
    recall_med: Optional[float] = None
    cost_min: Optional[float] = None
    cost_avg: Optional[float] = None
    cost_med: Optional[float] = None
    time_s: Optional[float] = None
    runs: int = 0
    error: Optional[str] = None

    COLUMNS = (
        "precision_max", "precision_avg", "precision_med",
        "recall_max", "recall_avg", "recall_med",
        "cost_min", "cost_avg", "cost_med",
        "time_s",
    )  # fmt: skip


def _guess_cost(X, cfg: ExperimentConfig, rep_seed: int) -> float:
    """Robust cost of a k-means++ run with a seed derived from the repetition seed."""
    centers = kmeanspp_seed(X, cfg.k, np.random.default_rng([rep_seed, 1]))
    guess = robust_cost(X, X[centers], cfg.z)
    # a zero guess would make the clip level zero everywhere
    return guess if guess > 0 else 1.0


def run_repetition(X: np.ndarray, truth: frozenset, cfg: ExperimentConfig, r: int) -> RunRecord:
    rep_seed = cfg.base_seed + r
    guess = cfg.cost_guess
    if cfg.alg is Algorithm.TKMPP and guess is None:
        guess = _guess_cost(X, cfg, rep_seed)
    params = cfg.seed_params(cost_guess=guess)
    rng = make_rng(rep_seed)
    start = time.perf_counter()
    centers = seed(X, cfg.alg, params, rng)
    seconds = time.perf_counter() - start
    marked = cfg.z if cfg.n_marked is None else cfg.n_marked
    if cfg.lloyd:
        res = mark_outliers_at(X, lloyd_refine(X, X[centers], marked), marked)
        res.center_indices = centers
    else:
        res = mark_outliers(X, centers, marked)
    precision, recall = precision_recall(truth, res.predicted_outliers)
    return RunRecord(res, precision, recall, seconds)


def run_experiment(
    cfg: ExperimentConfig,
    dataset: Optional[LabeledDataset] = None,
    threads: int = 1,
    records: Optional[list] = None,
) -> TableRow:
    """Run every repetition of ``cfg`` and summarize it into one table row.

    Repetition ``r`` uses seed ``base_seed + r`` so the thread count never
    changes the numbers. ``records`` (if given) receives the raw run records.
    """
    cfg.validate()
    ds = dataset if dataset is not None else cfg.dataset.load()
    X = ds.X
    truth = ds.true_outliers
    n = X.shape[0]
    marked = cfg.z if cfg.n_marked is None else cfg.n_marked
    if marked >= n or cfg.z >= n:
        raise ValueError(f"z={cfg.z} (marked {marked}) must be < n={n}")
    if cfg.seed_params().n_centers > n:
        raise ValueError(f"cannot choose {cfg.seed_params().n_centers} centers from {n} points")

    def one(r: int) -> RunRecord:
        return run_repetition(X, truth, cfg, r)

    reps = range(cfg.repetitions)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(one, reps))
    else:
        runs = [one(r) for r in reps]
    if records is not None:
        records.extend(runs)
    rep = summarize(runs)
    return TableRow(
        method=cfg.name or cfg.alg.label,
        params=cfg.param_echo(),
        precision_max=rep.precision_max,
        precision_avg=rep.precision_avg,
        precision_med=rep.precision_med,
        recall_max=rep.recall_max,
        recall_avg=rep.recall_avg,
        recall_med=rep.recall_med,
        cost_min=rep.cost_min,
        cost_avg=rep.cost_avg,
        cost_med=rep.cost_med,
        time_s=rep.time_avg,
        runs=rep.runs,
    )


def table_configs(
    dataset: DatasetSource,
    k: int,
    z: int,
    beta: float,
    alpha: float = 0.5,
    delta: float = 0.1,
    repetitions: int = 10,
    base_seed: int = 0,
    eta_mappings: Sequence[str] = ("inverse",),
    n_marked: Optional[int] = None,
) -> list[ExperimentConfig]:
    """The five methods in table order; one robust row per requested eta mapping."""
    common = dict(
        k=k, z=z, dataset=dataset, repetitions=repetitions, base_seed=base_seed, n_marked=n_marked
    )
    out = [
        ExperimentConfig(algorithm="RAND", **common),
        ExperimentConfig(algorithm="KMPP", **common),
        ExperimentConfig(algorithm="TKMPP", beta=beta, **common),
        ExperimentConfig(algorithm="RKMPP", alpha=alpha, delta=delta, **common),
    ]
    for mapping in eta_mappings:
        name = "This work" if len(eta_mappings) == 1 else f"This work (eta={'1/beta' if mapping == 'inverse' else 'beta'})"
        out.append(
            ExperimentConfig(algorithm="ROBUST", beta=beta, eta_from_beta=mapping, name=name, **common)
        )
    return out


def run_suite(
    configs: Sequence[ExperimentConfig], threads: int = 1, cache_datasets: bool = True
) -> list[TableRow]:
    """Run each config in turn; a failing config yields a row with ``error`` set."""
    rows = []
    cache: dict = {}
    for cfg in configs:
        try:
            key = json.dumps(asdict(cfg.dataset), sort_keys=True, default=str)
            if cache_datasets and key in cache:
                ds = cache[key]
            else:
                ds = cfg.dataset.load()
                if cache_datasets:
                    cache[key] = ds
            rows.append(run_experiment(cfg, ds, threads=threads))
        except Exception as exc:  # noqa: BLE001 - one bad row must not stop the suite
            log.warning("config %s failed: %s", cfg.name or cfg.algorithm, exc)
            rows.append(TableRow(method=cfg.name or str(cfg.algorithm), params="", error=str(exc)))
    return rows


def load_suite(path) -> list[ExperimentConfig]:
    raw = json.loads(Path(path).read_text())
    if not isinstance(raw, list):
        raise ValueError("suite file must hold a JSON list of experiment configs")
    return [ExperimentConfig.from_dict(item) for item in raw]


def _row_dict(row: TableRow, timing: bool) -> dict:
    out = {f.name: getattr(row, f.name) for f in fields(TableRow)}
    if not timing:
        out.pop("time_s")
    return out


def format_rows(
    rows: Sequence[TableRow], fmt: str = "markdown", cost_scale: float = 1.0, timing: bool = True
) -> str:
    """Render rows as ``json`` (raw values), ``csv`` or ``markdown``.

    ``cost_scale`` divides the cost columns in csv/markdown only, like the
    "costs are multiples of 10^4" convention of published tables.
    """
    if fmt == "json":
        doc = {
            "schema_version": SCHEMA_VERSION,
            "rows": [_row_dict(r, timing) for r in rows],
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    cols = [c for c in TableRow.COLUMNS if timing or c != "time_s"]

    def cell(row: TableRow, c: str) -> str:
        v = getattr(row, c)
        if v is None:
            return "n/a"
        if c.startswith("cost"):
            return f"{v / cost_scale:.4g}"
        if c == "time_s":
            return f"{v:.3g}"
        return f"{v:.2f}"

    header = ["method", "params"] + cols
    body = [
        [r.method, r.params] + (["ERROR: " + r.error] + [""] * (len(cols) - 1) if r.error else [cell(r, c) for c in cols])
        for r in rows
    ]
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(body)
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(b) + " |" for b in body]
        note = f"\ncosts divided by {cost_scale:g}\n" if cost_scale != 1.0 else "\n"
        return "\n".join(lines) + note
    raise ValueError(f"unknown format {fmt!r}")


def rows_from_json(text: str) -> list[TableRow]:
    doc = json.loads(text)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ValueError("unsupported schema version")
    return [TableRow(**r) for r in doc["rows"]]


def synthetic_source(n=1000, d=2, k=20, z=25, seed=0, side=100.0, sigma=1.0) -> DatasetSource:
    return DatasetSource(
        kind="synthetic",
        synthetic=SyntheticSpec(n=n, d=d, k=k, z=z, side=side, sigma=sigma, rng_seed=seed),
    )
