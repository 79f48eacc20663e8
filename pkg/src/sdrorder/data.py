"""Datasets, CSV ingestion, response slicing and per-group moments."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateResponse,
    GroupTooSmall,
    MissingValue,
    ParseError,
    SingleClassResponse,
    TooFewObservations,
    ValidationError,
)
from .linalg import spd_sqrt_and_invsqrt

log = logging.getLogger(__name__)

RESPONSE_KINDS = ("binary", "categorical", "continuous")


@dataclass(frozen=True)
class LabeledDataset:
    """``n x p`` predictors plus a response.

    For ``binary``/``categorical`` responses ``y`` holds integer labels
    ``1..H`` and ``class_names`` the original label for each code.
    """

    x: np.ndarray
    y: np.ndarray
    kind: str
    class_names: tuple = ()
    feature_names: tuple = ()

    def __post_init__(self):
        if self.kind not in RESPONSE_KINDS:
            raise ValidationError(f"unknown response kind {self.kind!r}")
        if self.x.ndim != 2 or self.y.shape != (self.x.shape[0],):
            raise ValidationError("x must be n x p and y must have n entries")
        if not (np.all(np.isfinite(self.x)) and np.all(np.isfinite(self.y))):
            raise MissingValue("dataset contains missing or non-finite values")

    @property
    def n(self):
        return self.x.shape[0]

    @property
    def p(self):
        return self.x.shape[1]

    @property
    def h_count(self):
        return 0 if self.kind == "continuous" else int(self.y.max())

    def class_counts(self):
        if self.kind == "continuous":
            return {}
        labels, counts = np.unique(self.y, return_counts=True)
        return {int(h): int(c) for h, c in zip(labels, counts)}


@dataclass(frozen=True)
class SliceAssignment:
    h_count: int
    membership: np.ndarray
    boundaries: np.ndarray

    def sizes(self):
        return np.bincount(self.membership, minlength=self.h_count + 1)[1:]


@dataclass(frozen=True)
class GroupMoments:
    counts: np.ndarray
    priors: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    pooled: np.ndarray
    grand_mean: np.ndarray
    marginal: np.ndarray
    ddof: int = 1
    labels: tuple = field(default=())

    @property
    def h_count(self):
        return len(self.counts)

    @property
    def p(self):
        return self.means.shape[1]


def encode_labels(raw):
    """Map raw labels to codes ``1..H``.

    Numeric labels are coded in ascending numeric order; any non-numeric
    label switches to first-appearance order.
    """
    raw = [str(v).strip() for v in raw]
    try:
        numeric = [float(v) for v in raw]
    except ValueError:
        numeric = None
    if numeric is not None:
        uniq = sorted(set(numeric))
        codes = {v: i + 1 for i, v in enumerate(uniq)}
        names = tuple(raw[numeric.index(v)] for v in uniq)
        return np.array([codes[v] for v in numeric], dtype=int), names
    order = list(dict.fromkeys(raw))
    codes = {v: i + 1 for i, v in enumerate(order)}
    return np.array([codes[v] for v in raw], dtype=int), tuple(order)


def load_csv(path, response_column=-1, response_kind="binary", has_header=True):
    """Read a dataset from CSV.

    ``response_column`` is a header name or a 0-based index (negative indices
    count from the right).  All other columns must be numeric.
    """
    if response_kind not in RESPONSE_KINDS:
        raise ValidationError(f"response_kind must be one of {RESPONSE_KINDS}")
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    header = None
    if has_header:
        if not rows:
            raise ParseError(f"{path}: empty file")
        header, rows = [c.strip() for c in rows[0]], rows[1:]
    if not rows:
        raise ParseError(f"{path}: no data rows")
    width = len(rows[0])
    for i, r in enumerate(rows):
        if len(r) != width:
            raise ParseError(f"{path}: row {i + 1} has {len(r)} cells, expected {width}", row=i + 1)
    if isinstance(response_column, str) and not response_column.lstrip("-").isdigit():
        if header is None or response_column not in header:
            raise ValidationError(f"response column {response_column!r} not found in header")
        rcol = header.index(response_column)
    else:
        rcol = int(response_column)
        if rcol < 0:
            rcol += width
        if not 0 <= rcol < width:
            raise ValidationError(f"response column index {response_column} out of range")
    if width < 2:
        raise ParseError(f"{path}: need at least one predictor column")

    pcols = [c for c in range(width) if c != rcol]
    x = np.empty((len(rows), len(pcols)))
    offset = 2 if has_header else 1
    for i, r in enumerate(rows):
        for k, c in enumerate(pcols):
            cell = r[c].strip()
            if cell == "" or cell.upper() in ("NA", "NAN"):
                raise MissingValue(f"{path}: missing value at row {i + offset}, column {c}", i + offset, c)
            try:
                x[i, k] = float(cell)
            except ValueError:
                raise ParseError(
                    f"{path}: non-numeric cell {cell!r} at row {i + offset}, column {c}", i + offset, c
                ) from None
    raw_y = [r[rcol].strip() for r in rows]
    for i, v in enumerate(raw_y):
        if v == "" or v.upper() in ("NA", "NAN"):
            raise MissingValue(f"{path}: missing response at row {i + offset}", i + offset, rcol)

    names = tuple(header[c] for c in pcols) if header else ()
    if response_kind == "continuous":
        try:
            y = np.array([float(v) for v in raw_y])
        except ValueError as exc:
            raise ParseError(f"{path}: non-numeric response ({exc})") from None
        ds = LabeledDataset(x, y, "continuous", feature_names=names)
    else:
        y, class_names = encode_labels(raw_y)
        if len(class_names) < 2:
            raise SingleClassResponse(f"{path}: response has a single class")
        if response_kind == "binary" and len(class_names) != 2:
            raise ValidationError(f"{path}: binary response has {len(class_names)} classes")
        ds = LabeledDataset(x, y, response_kind, class_names, names)
    log.info("loaded %s: n=%d p=%d classes=%s", path, ds.n, ds.p, ds.class_counts())
    return ds


def save_csv(path, dataset, response_name="y"):
    """Write with a header row; predictors first, response last, 17 significant digits."""
    names = dataset.feature_names or tuple(f"x{j + 1}" for j in range(dataset.p))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(names) + [response_name])
        for xi, yi in zip(dataset.x, dataset.y):
            if dataset.kind == "continuous":
                label = format(float(yi), ".17g")
            elif dataset.class_names:
                label = dataset.class_names[int(yi) - 1]
            else:
                label = str(int(yi))
            w.writerow([format(float(v), ".17g") for v in xi] + [label])


def slice_continuous(y, h_count):
    """Equal-frequency slicing of a continuous response into ``h_count`` slices.

    Observations are sorted; slice ``k`` nominally takes sorted positions
    ``[floor((k-1) n / H), floor(k n / H))``.  A boundary falling inside a
    run of tied values is moved up so that the whole run stays in the lower
    slice.
    """
    y = np.asarray(y, dtype=float).ravel()
    n = y.size
    if h_count < 2:
        raise ValidationError("need at least two slices")
    if n < 2 * h_count:
        raise TooFewObservations(f"n={n} is below 2*H={2 * h_count}")
    if np.unique(y).size < h_count:
        raise DegenerateResponse(f"fewer than {h_count} distinct response values")
    ys = np.sort(y, kind="stable")
    cuts = []
    start = 0
    for k in range(1, h_count):
        end = max(start + 2, (k * n) // h_count)
        while end < n and ys[end] == ys[end - 1]:
            end += 1
        if end > n - 2 * (h_count - k):
            raise DegenerateResponse("ties leave too few observations for the upper slices")
        cuts.append(ys[end - 1])
        start = end
    boundaries = np.array(cuts)
    membership = np.searchsorted(boundaries, y, side="left") + 1
    return SliceAssignment(h_count, membership.astype(int), boundaries)


def group_labels(groups):
    if isinstance(groups, SliceAssignment):
        return groups.membership
    return np.asarray(groups)


def group_moments(x, groups, ddof=1):
    """Per-group counts, priors, means and covariances plus pooled/marginal.

    ``groups`` is a label vector with codes ``1..H`` or a
    :class:`SliceAssignment`.  The pooled covariance is the prior-weighted
    average of the group covariances; the marginal one uses all rows.
    """
    x = np.asarray(x, dtype=float)
    labels = group_labels(groups)
    if labels.shape != (x.shape[0],):
        raise ValidationError("group labels must have one entry per row")
    codes = np.unique(labels)
    counts, means, covs = [], [], []
    for h in codes:
        xh = x[labels == h]
        if xh.shape[0] < 2:
            raise GroupTooSmall(f"group {h} has {xh.shape[0]} observation(s)")
        mh = xh.mean(axis=0)
        dh = xh - mh
        counts.append(xh.shape[0])
        means.append(mh)
        covs.append(dh.T @ dh / (xh.shape[0] - ddof))
    counts = np.array(counts)
    priors = counts / counts.sum()
    means = np.array(means)
    covs = np.array(covs)
    pooled = np.einsum("h,hij->ij", priors, covs)
    grand = x.mean(axis=0)
    dx = x - grand
    marginal = dx.T @ dx / (x.shape[0] - ddof)
    return GroupMoments(
        counts, priors, means, covs, pooled, grand, marginal, ddof, tuple(codes.tolist())
    )


def standardize(x, sx, center=None):
    """Rows ``sx^{-1/2} (x_i - center)``; ``center`` defaults to the column means."""
    x = np.asarray(x, dtype=float)
    center = x.mean(axis=0) if center is None else np.asarray(center, dtype=float)
    _, invsqrt = spd_sqrt_and_invsqrt(sx)
    return (x - center) @ invsqrt


def train_test_split(dataset, fraction, seed):
    """Random split; ``fraction`` of the rows go to the training set."""
    if not 0.0 < fraction < 1.0:
        raise ValidationError("split fraction must lie strictly between 0 and 1")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0])))
    perm = rng.permutation(dataset.n)
    cut = int(round(fraction * dataset.n))
    tr, te = np.sort(perm[:cut]), np.sort(perm[cut:])

    def take(idx):
        return LabeledDataset(
            dataset.x[idx], dataset.y[idx], dataset.kind, dataset.class_names, dataset.feature_names
        )

    return take(tr), take(te)
