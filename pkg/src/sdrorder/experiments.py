"""Monte Carlo experiment runner, summaries and result files.

A run is described by an :class:`ExperimentConfig`.  Each replicate gets its
own :class:`~sdrorder.simgen.RngStream` keyed by ``(seed, replicate)`` and
returns plain :class:`ReplicateResult` rows, so replicates can run in any
order on any number of workers and still produce the same table.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import logging
import os
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .data import load_csv, slice_continuous, train_test_split
from .discriminant import cer, fit_classifier
from .errors import EmptyInput, ValidationError
from .kernels import DEFAULT_GAMMA, METHODS, Z_CONVENTIONS, KernelSpec, build_kernel
from .linalg import gev_solve
from .metrics import subspace_distance
from .ordering import project, reorder_and_truncate, score, write_scores_csv
from .simgen import (
    CLASSIFICATION_TAGS,
    REGRESSION_TAGS,
    RngStream,
    generate,
    make_config,
    make_regression,
)

log = logging.getLogger(__name__)

SAMPLE_CRITERIA = ("EIGENVALUE", "T", "F")
BASELINE_CRITERION = "NONE"
REPLICATE_COLUMNS = ("config", "n", "replicate", "method", "criterion", "metric", "value", "baseline")
SUMMARY_COLUMNS = ("config", "n", "method", "criterion", "metric", "count", "median", "q25", "q75", "min", "max")


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved description of one experiment.

    ``sizes`` are per-class training sizes for classification
    configurations and total sample sizes for regression configurations.
    ``d`` of ``None`` means the true dimension of the configuration.
    """

    tag: str = "Q1"
    methods: tuple = ("PCA", "SAVE", "SIR2", "SSDR")
    criteria: tuple = ("EIGENVALUE", "T")
    classifier: str = "auto"
    d: int | None = None
    h_count: int = 5
    sizes: tuple = (51, 100, 250)
    replicates: int = 100
    seed: int = 20240601
    gamma: float = DEFAULT_GAMMA
    pool_size: int = 1000
    p: int = 50
    # reference-configuration variants, see README
    pca_scatter: str = "pooled"
    z_convention: str = "table"
    workers: int = 1
    out_dir: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "tag", str(self.tag).upper())
        object.__setattr__(self, "methods", tuple(m.upper() for m in self.methods))
        object.__setattr__(self, "criteria", tuple(c.upper() for c in self.criteria))
        object.__setattr__(self, "classifier", str(self.classifier).upper())
        object.__setattr__(self, "sizes", tuple(int(s) for s in self.sizes))
        self.validate()

    @property
    def is_regression(self):
        return self.tag in REGRESSION_TAGS

    def validate(self):
        if self.tag not in CLASSIFICATION_TAGS + REGRESSION_TAGS:
            raise ValidationError(f"tag: unknown configuration {self.tag!r}")
        bad = [m for m in self.methods if m not in METHODS]
        if bad or not self.methods:
            raise ValidationError(f"methods: unknown or empty {bad or self.methods}")
        bad = [c for c in self.criteria if c not in SAMPLE_CRITERIA]
        if bad or not self.criteria:
            raise ValidationError(f"criteria: unknown or empty {bad or self.criteria}")
        if self.is_regression and "T" in self.criteria:
            raise ValidationError("criteria: T needs a binary response")
        if self.classifier not in ("AUTO", "LDA", "QDA", "NONE"):
            raise ValidationError(f"classifier: {self.classifier!r}")
        if self.replicates < 1:
            raise ValidationError("replicates: must be at least 1")
        if self.d is not None and not 1 <= self.d <= self.p:
            raise ValidationError(f"d: must lie in 1..{self.p}")
        if self.h_count < 2:
            raise ValidationError("h_count: must be at least 2")
        if self.gamma < 0:
            raise ValidationError("gamma: must be non-negative")
        if not self.sizes or min(self.sizes) < 2:
            raise ValidationError("sizes: need at least one size >= 2")
        if not self.is_regression and max(self.sizes) >= self.pool_size:
            raise ValidationError("pool_size: must exceed every training size")
        if self.workers < 1:
            raise ValidationError("workers: must be at least 1")
        if self.pca_scatter not in ("marginal", "pooled"):
            raise ValidationError("pca_scatter: 'marginal' or 'pooled'")
        if self.z_convention not in Z_CONVENTIONS:
            raise ValidationError(f"z_convention: one of {Z_CONVENTIONS}")

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, doc):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise ValidationError(f"unknown config keys: {unknown}")
        doc = dict(doc)
        for key in ("methods", "criteria", "sizes"):
            if key in doc and isinstance(doc[key], str):
                doc[key] = tuple(v.strip() for v in doc[key].split(",") if v.strip())
            elif key in doc:
                doc[key] = tuple(doc[key])
        return cls(**doc)

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(read_config_doc(path))


def read_config_doc(path):
    """Raw JSON object of a config file, not yet validated."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: {exc}") from None
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: top level must be an object")
    return doc


@dataclass(frozen=True)
class ReplicateResult:
    config: str
    n: int
    replicate: int
    method: str
    criterion: str
    metric: str
    value: float
    baseline: float = float("nan")
    wall_time: float = field(default=0.0, compare=False)

    def row(self):
        return (self.config, self.n, self.replicate, self.method, self.criterion, self.metric,
                self.value, self.baseline)


def _check_range(value, what):
    if not (0.0 <= value <= 1.0):
        raise ValidationError(f"{what} = {value!r} lies outside [0, 1]")
    return value


def training_split(h_count, n):
    """Per-class training counts; every class gets ``n`` rows for LDA and QDA alike."""
    return (int(n),) * h_count


def _kernel_spec(cfg, method):
    return KernelSpec(method, cfg.gamma, cfg.h_count, pca_scatter=cfg.pca_scatter,
                      z_convention=cfg.z_convention)


def _classification_replicate(cfg, index):
    t0 = time.perf_counter()
    rng = RngStream(cfg.seed, index)
    spec = make_config(cfg.tag, cfg.p, rng)
    pool = generate(spec, cfg.pool_size, rng)
    kind = spec.classifier if cfg.classifier == "AUTO" else cfg.classifier
    d = spec.d if cfg.d is None else cfg.d
    out = []
    for n in cfg.sizes:
        counts = training_split(spec.h_count, n)
        train = np.zeros(pool.n, dtype=bool)
        for h, nh in enumerate(counts, start=1):
            rows = np.flatnonzero(pool.y == h)
            train[rows[:nh]] = True
        xtr, ytr = pool.x[train], pool.y[train]
        xte, yte = pool.x[~train], pool.y[~train]
        base = float("nan")
        if kind != "NONE":
            base = _check_range(cer(fit_classifier(kind, xtr, ytr, cfg.gamma), xte, yte), "baseline CER")
            out.append(ReplicateResult(cfg.tag, n, index, kind, BASELINE_CRITERION, "CER", base, base))
        for method in cfg.methods:
            kspec = _kernel_spec(cfg, method)
            pair = build_kernel(kspec, xtr, ytr)
            basis = gev_solve(pair.m, pair.n)  # shared by every criterion
            for crit in cfg.criteria:
                reduced = reorder_and_truncate(basis, score(basis, crit, xtr, ytr), d, method)
                if kind == "NONE":
                    value, metric = subspace_distance(spec.basis, reduced), "D"
                else:
                    clf = fit_classifier(kind, project(reduced, xtr), ytr, cfg.gamma)
                    value, metric = cer(clf, project(reduced, xte), yte), "CER"
                out.append(ReplicateResult(cfg.tag, n, index, method, crit, metric,
                                           _check_range(value, metric), base))
    elapsed = time.perf_counter() - t0
    return [dataclasses.replace(r, wall_time=elapsed) for r in out]


def _subspace_replicate(cfg, index):
    t0 = time.perf_counter()
    rng = RngStream(cfg.seed, index)
    spec = make_regression(cfg.tag, cfg.p, rng)
    truth = spec.basis
    d = truth.shape[1] if cfg.d is None else cfg.d
    out = []
    for n in cfg.sizes:
        data = generate(spec, n, rng)
        slices = slice_continuous(data.y, cfg.h_count)
        for method in cfg.methods:
            kspec = _kernel_spec(cfg, method)
            pair = build_kernel(kspec, data.x, slices)
            basis = gev_solve(pair.m, pair.n)
            for crit in cfg.criteria:
                reduced = reorder_and_truncate(basis, score(basis, crit, data.x, slices), d, method)
                value = _check_range(subspace_distance(truth, reduced), "D")
                out.append(ReplicateResult(cfg.tag, n, index, method, crit, "D", value))
    elapsed = time.perf_counter() - t0
    return [dataclasses.replace(r, wall_time=elapsed) for r in out]


def _run(cfg, worker):
    indices = range(cfg.replicates)
    if cfg.workers == 1:
        chunks = [worker(cfg, i) for i in indices]
    else:
        from joblib import Parallel, delayed

        # joblib returns results in submission order
        chunks = Parallel(n_jobs=cfg.workers)(delayed(worker)(cfg, i) for i in indices)
    return [r for chunk in chunks for r in chunk]


def _rows_sorted(rows):
    # replicate-major within each size, independent of scheduling
    return sorted(rows, key=lambda r: (r.n, r.replicate))


def run_classification_experiment(cfg):
    if cfg.is_regression:
        raise ValidationError(f"tag: {cfg.tag} is a regression configuration")
    return _rows_sorted(_run(cfg, _classification_replicate))


def run_subspace_experiment(cfg):
    """Subspace distance to the truth at the true dimension.

    Works for regression configurations and, with ``classifier='none'``,
    for the classification ones.
    """
    if cfg.is_regression:
        return _rows_sorted(_run(cfg, _subspace_replicate))
    cfg = dataclasses.replace(cfg, classifier="NONE")
    return _rows_sorted(_run(cfg, _classification_replicate))


def run_experiment(cfg):
    if cfg.is_regression or cfg.classifier == "NONE":
        return run_subspace_experiment(cfg)
    return run_classification_experiment(cfg)


def summarize(rows):
    """Median, quartiles and range per (config, n, method, criterion, metric) cell."""
    rows = list(rows)
    if not rows:
        raise EmptyInput("no rows to summarize")
    cells = {}
    for r in rows:
        cells.setdefault((r.config, r.n, r.method, r.criterion, r.metric), []).append(r.value)
    out = []
    for key, values in cells.items():
        v = np.asarray(values, dtype=float)
        q25, med, q75 = np.percentile(v, [25, 50, 75])
        out.append(dict(zip(SUMMARY_COLUMNS, key + (v.size, med, q25, q75, v.min(), v.max()))))
    return out


def summary_lookup(summary, method, criterion, n=None, stat="median"):
    for cell in summary:
        if cell["method"] == method and cell["criterion"] == criterion and (n is None or cell["n"] == n):
            return cell[stat]
    raise KeyError((method, criterion, n))


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_replicates_csv(path, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPLICATE_COLUMNS)
        for r in rows:
            w.writerow([_fmt(v) for v in r.row()])


def write_summary_csv(path, summary):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for cell in summary:
            w.writerow([_fmt(cell[c]) for c in SUMMARY_COLUMNS])


def provenance(cfg):
    import numpy
    import scipy

    return {
        "config": cfg.to_dict() if hasattr(cfg, "to_dict") else cfg,
        "seed": getattr(cfg, "seed", None),
        "software": {
            "sdrorder": __version__,
            "python": platform.python_version(),
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
        },
        "rng": "numpy Philox keyed by SeedSequence([seed, replicate]); normals by Box-Muller",
    }


def write_boxplot_svg(path, rows):
    """One panel per (config, n); one box per (method, criterion).

    The full-feature classifier is drawn as a dashed horizontal line at its
    median, not as a box.  Each box carries an SVG id ``box-<config>-<n>-<method>-<criterion>``.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    panels = {}
    for r in rows:
        panels.setdefault((r.config, r.n), {}).setdefault((r.method, r.criterion), []).append(r.value)
    keys = sorted(panels)
    fig, axes = plt.subplots(1, len(keys), figsize=(4.0 + 2.2 * len(keys), 4.2), squeeze=False)
    try:
        for ax, key in zip(axes[0], keys):
            cells = panels[key]
            boxes = [k for k in cells if k[1] != BASELINE_CRITERION]
            labels = [m if c == "EIGENVALUE" else f"{m}_{c}" for m, c in boxes]
            art = ax.boxplot([cells[k] for k in boxes], widths=0.6, patch_artist=True, sym="")
            for patch, (m, c) in zip(art["boxes"], boxes):
                patch.set_gid(f"box-{key[0]}-{key[1]}-{m}-{c}")
                patch.set_facecolor("SkyBlue" if c == "EIGENVALUE" else "Tan")
            for (m, c), values in cells.items():
                if c == BASELINE_CRITERION:
                    ax.axhline(float(np.median(values)), color="grey", linestyle="--", linewidth=1)
            ax.set_xticks(range(1, len(labels) + 1))
            ax.set_xticklabels(labels, rotation=35, fontsize=8)
            ax.set_title(f"{key[0]}, n = {key[1]}", fontsize=10)
            metric = next(iter(r.metric for r in rows if (r.config, r.n) == key))
            ax.set_ylabel(metric)
            ax.grid(axis="y", linestyle="--", color="lightgrey", alpha=0.8)
        fig.tight_layout()
        with matplotlib.rc_context({"svg.hashsalt": "sdrorder"}):
            fig.savefig(path, format="svg", metadata={"Date": None})
    finally:
        plt.close(fig)


def emit_outputs(rows, summary, out_dir, cfg=None):
    """Write replicates.csv, summary.csv, config.json and boxplot.svg (only with rows)."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "replicates": os.path.join(out_dir, "replicates.csv"),
        "summary": os.path.join(out_dir, "summary.csv"),
        "config": os.path.join(out_dir, "config.json"),
    }
    write_replicates_csv(paths["replicates"], rows)
    write_summary_csv(paths["summary"], summary)
    with open(paths["config"], "w", encoding="utf-8") as fh:
        json.dump(provenance(cfg) if cfg is not None else {}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if rows:
        paths["boxplot"] = os.path.join(out_dir, "boxplot.svg")
        write_boxplot_svg(paths["boxplot"], rows)
        # timings change between runs, so they stay out of replicates.csv
        paths["timings"] = os.path.join(out_dir, "timings.csv")
        with open(paths["timings"], "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("n", "replicate", "wall_time"))
            seen = set()
            for r in rows:
                if (r.n, r.replicate) not in seen:
                    seen.add((r.n, r.replicate))
                    w.writerow((r.n, r.replicate, f"{r.wall_time:.6f}"))
    return paths


def simulate(cfg):
    """Run ``cfg`` and write its outputs when ``cfg.out_dir`` is set."""
    rows = run_experiment(cfg)
    summary = summarize(rows)
    if cfg.out_dir:
        emit_outputs(rows, summary, cfg.out_dir, cfg)
    return rows, summary


# CSV data path

@dataclass(frozen=True)
class CsvPipelineConfig:
    train_csv: str
    test_csv: str | None = None
    split: float | None = None
    split_seed: int = 0
    response_column: object = -1
    response_kind: str = "binary"
    has_header: bool = True
    method: str = "SIR2"
    criterion: str = "auto"
    classifier: str = "auto"
    d: int = 1
    d_max: int | None = None
    h_count: int = 5
    gamma: float = DEFAULT_GAMMA
    force_gamma: bool = False
    pca_scatter: str = "marginal"
    z_convention: str = "sandwich"
    out_dir: str | None = None

    def resolved_criterion(self):
        crit = self.criterion.upper()
        if crit == "AUTO":
            return "T" if self.response_kind == "binary" else "F"
        if crit == "T" and self.response_kind != "binary":
            raise ValidationError("criterion: T needs a binary response")
        if crit not in SAMPLE_CRITERIA:
            raise ValidationError(f"criterion: unknown {self.criterion!r}")
        return crit

    def resolved_classifier(self):
        kind = self.classifier.upper()
        if self.response_kind == "continuous":
            return "NONE"
        return "QDA" if kind == "AUTO" else kind


def _groups_for(data, h_count):
    return slice_continuous(data.y, h_count) if data.kind == "continuous" else data.y


def run_csv_pipeline(cfg):
    """Fit on training data, score and reorder every direction, evaluate on test data.

    Returns a report dictionary.  With ``out_dir`` set it also writes the
    per-direction scores, the reduced training/test coordinates and the
    report itself.
    """
    crit = cfg.resolved_criterion()
    kind = cfg.resolved_classifier()
    train = load_csv(cfg.train_csv, cfg.response_column, cfg.response_kind, cfg.has_header)
    if cfg.test_csv:
        test = load_csv(cfg.test_csv, cfg.response_column, cfg.response_kind, cfg.has_header)
    elif cfg.split is not None:
        train, test = train_test_split(train, cfg.split, cfg.split_seed)
    else:
        test = None
    if test is not None and test.p != train.p:
        raise ValidationError(f"test data has {test.p} predictors, training data {train.p}")
    if test is not None and test.x.shape == train.x.shape and np.array_equal(test.x, train.x):
        log.warning("test data are identical to training data; error rates are resubstitution estimates")
    if not 1 <= cfg.d <= train.p:
        raise ValidationError(f"d: must lie in 1..{train.p}")

    groups = _groups_for(train, cfg.h_count)
    kspec = KernelSpec(cfg.method.upper(), cfg.gamma, cfg.h_count, cfg.force_gamma, cfg.pca_scatter,
                       cfg.z_convention)
    force = cfg.force_gamma or train.p >= train.n
    if force != cfg.force_gamma:
        kspec = dataclasses.replace(kspec, force_gamma=True)
    pair = build_kernel(kspec, train.x, groups)
    basis = gev_solve(pair.m, pair.n)
    scores = score(basis, crit, train.x, groups)
    reduced = reorder_and_truncate(basis, scores, cfg.d, kspec.method)
    report = {
        "method": kspec.method,
        "criterion": crit,
        "classifier": kind,
        "d": cfg.d,
        "n_train": train.n,
        "n_test": 0 if test is None else test.n,
        "p": train.p,
        "selected_directions": [int(i) + 1 for i in reduced.indices],
        "eigenvalues": [float(v) for v in basis.values],
        "scores": [float(s) for s in scores.scores],
        "ranks": [int(r) for r in scores.ranks],
    }
    if kind != "NONE" and test is not None:
        clf = fit_classifier(kind, project(reduced, train.x), train.y, cfg.gamma)
        report["test_cer"] = cer(clf, project(reduced, test.x), test.y)
        if cfg.d_max:
            sweep = []
            for d in range(1, min(cfg.d_max, train.p) + 1):
                red = reorder_and_truncate(basis, scores, d, kspec.method)
                c = fit_classifier(kind, project(red, train.x), train.y, cfg.gamma)
                sweep.append({"d": d, "test_cer": cer(c, project(red, test.x), test.y)})
            report["d_sweep"] = sweep
    if cfg.out_dir:
        os.makedirs(cfg.out_dir, exist_ok=True)
        write_scores_csv(os.path.join(cfg.out_dir, "scores.csv"), basis, scores)
        write_reduced_csv(os.path.join(cfg.out_dir, "reduced_train.csv"), project(reduced, train.x), train)
        if test is not None:
            write_reduced_csv(os.path.join(cfg.out_dir, "reduced_test.csv"), project(reduced, test.x), test)
        with open(os.path.join(cfg.out_dir, "report.json"), "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


def write_reduced_csv(path, z, data):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"z{j + 1}" for j in range(z.shape[1])] + ["y"])
        for zi, yi in zip(z, data.y):
            if data.kind == "continuous":
                label = format(float(yi), ".17g")
            elif data.class_names:
                label = data.class_names[int(yi) - 1]
            else:
                label = str(int(yi))
            w.writerow([format(float(v), ".17g") for v in zi] + [label])


def median_table(summary, metric=None):
    """``{(n, method, criterion): median}`` convenience view."""
    return {
        (c["n"], c["method"], c["criterion"]): c["median"]
        for c in summary
        if metric is None or c["metric"] == metric
    }
