"""Command line entry point: ``sdrorder {simulate,reduce,classify,distance,oer}``.

Exit codes: 0 on success, 1 for rejected input, 2 for numerical or I/O failures.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from .data import load_csv, slice_continuous
from .discriminant import OerInputs1D, mc_oer_oracle, oer_1d, oer_lda_full
from .errors import NumericalError, SdrError, ValidationError
from .experiments import (
    CsvPipelineConfig,
    ExperimentConfig,
    read_config_doc,
    run_csv_pipeline,
    simulate,
    write_reduced_csv,
)
from .kernels import DEFAULT_GAMMA, METHODS, Z_CONVENTIONS, KernelSpec, build_kernel
from .linalg import gev_solve, read_matrix_csv, write_matrix_csv
from .metrics import subspace_distance
from .ordering import project, reorder_and_truncate, score, write_scores_csv

log = logging.getLogger("sdrorder")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(f"{self.prog}: {message}")


def _csv_list(text):
    return tuple(v.strip() for v in text.split(",") if v.strip())


def _int_list(text):
    try:
        return tuple(int(v) for v in _csv_list(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return np.array([float(v) for v in _csv_list(text)])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _response_column(text):
    return int(text) if text.lstrip("-").isdigit() else text


def build_parser():
    p = _Parser(prog="sdrorder", description="Criterion-ordered sufficient dimension reduction")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run a named simulation configuration")
    s.add_argument("--config", help="JSON file with ExperimentConfig keys; flags override it")
    s.add_argument("--tag", help="Q1..Q3, L1..L3 or D1..D3")
    s.add_argument("--sizes", type=_int_list)
    s.add_argument("--methods", type=_csv_list)
    s.add_argument("--criteria", type=_csv_list)
    s.add_argument("--classifier", choices=("auto", "LDA", "QDA", "none"))
    s.add_argument("--d", type=int)
    s.add_argument("--slices", type=int, dest="h_count")
    s.add_argument("--replicates", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--gamma", type=float)
    s.add_argument("--pool-size", type=int, dest="pool_size")
    s.add_argument("--p", type=int)
    s.add_argument("--pca-scatter", choices=("marginal", "pooled"), dest="pca_scatter")
    s.add_argument("--z-convention", choices=Z_CONVENTIONS, dest="z_convention")
    s.add_argument("--workers", type=int)
    s.add_argument("--out", dest="out_dir", help="output directory")

    def data_args(a):
        a.add_argument("--response-column", type=_response_column, default=-1)
        a.add_argument("--response-kind", choices=("binary", "categorical", "continuous"), default="binary")
        a.add_argument("--no-header", action="store_true")
        a.add_argument("--method", choices=METHODS, default="SIR2")
        a.add_argument("--criterion", choices=("auto", "EIGENVALUE", "T", "F"), default="auto")
        a.add_argument("--d", type=int, default=1)
        a.add_argument("--slices", type=int, default=5)
        a.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
        a.add_argument("--force-gamma", action="store_true")
        a.add_argument("--pca-scatter", choices=("marginal", "pooled"), default="marginal")
        a.add_argument("--z-convention", choices=Z_CONVENTIONS, default="sandwich")

    r = sub.add_parser("reduce", help="reduce a CSV dataset to its top-ranked directions")
    r.add_argument("input")
    r.add_argument("output", help="CSV of reduced coordinates")
    r.add_argument("--scores", help="optional CSV of per-direction scores and ranks")
    r.add_argument("--dump-kernel", help="prefix for CSV dumps of the kernel pair")
    data_args(r)

    c = sub.add_parser("classify", help="fit on training CSV, report test error")
    c.add_argument("train")
    c.add_argument("test", nargs="?")
    c.add_argument("--split", type=float, help="training fraction when no test file is given")
    c.add_argument("--split-seed", type=int, default=0)
    c.add_argument("--classifier", choices=("auto", "LDA", "QDA"), default="auto")
    c.add_argument("--d-max", type=int, help="also report test error for every d up to this value")
    c.add_argument("--out", dest="out_dir")
    data_args(c)

    d = sub.add_parser("distance", help="subspace distance between two basis CSV files")
    d.add_argument("a")
    d.add_argument("b")

    o = sub.add_parser("oer", help="closed-form Bayes error of two equal-prior Gaussians")
    o.add_argument("--mu1", type=_float_list, required=True)
    o.add_argument("--mu2", type=_float_list, required=True)
    o.add_argument("--sigma1", type=float, help="standard deviation, 1D case")
    o.add_argument("--sigma2", type=float, help="standard deviation, 1D case")
    o.add_argument("--cov", help="CSV covariance matrix shared by both classes")
    o.add_argument("--mc", type=int, default=0, help="also run a Monte Carlo check with this many samples")
    o.add_argument("--seed", type=int, default=0)
    return p


def _cmd_simulate(args):
    doc = {}
    if args.config:
        doc = read_config_doc(args.config)
    for key in ("tag", "sizes", "methods", "criteria", "classifier", "d", "h_count", "replicates",
                "seed", "gamma", "pool_size", "p", "pca_scatter", "z_convention", "workers", "out_dir"):
        value = getattr(args, key)
        if value is not None:
            doc[key] = value
    cfg = ExperimentConfig.from_dict(doc)
    rows, summary = simulate(cfg)
    for cell in summary:
        label = cell["method"] if cell["criterion"] in ("EIGENVALUE", "NONE") else f"{cell['method']}_{cell['criterion']}"
        print(f"{cell['config']}\tn={cell['n']}\t{label}\t{cell['metric']} median={cell['median']:.4f}")
    if cfg.out_dir:
        print(f"wrote {cfg.out_dir}")
    return 0


def _cmd_reduce(args):
    data = load_csv(args.input, args.response_column, args.response_kind, not args.no_header)
    groups = slice_continuous(data.y, args.slices) if data.kind == "continuous" else data.y
    crit = args.criterion.upper()
    if crit == "AUTO":
        crit = "T" if data.kind == "binary" else "F"
    if crit == "T" and data.kind != "binary":
        raise ValidationError("criterion T needs a binary response")
    spec = KernelSpec(args.method, args.gamma, args.slices, args.force_gamma, args.pca_scatter,
                      args.z_convention)
    pair = build_kernel(spec, data.x, groups)
    if args.dump_kernel:
        write_matrix_csv(args.dump_kernel + "_M.csv", pair.m)
        write_matrix_csv(args.dump_kernel + "_N.csv", pair.n)
    basis = gev_solve(pair.m, pair.n)
    scores = score(basis, crit, data.x, groups)
    reduced = reorder_and_truncate(basis, scores, args.d, args.method)
    z = project(reduced, data.x)
    write_reduced_csv(args.output, z, data)
    if args.scores:
        write_scores_csv(args.scores, basis, scores)
    print("direction\teigenvalue\tscore\trank")
    for j, (lam, sc, rk) in enumerate(zip(basis.values, scores.scores, scores.ranks), start=1):
        print(f"{j}\t{lam:.6g}\t{sc:.6g}\t{rk}")
    return 0


def _cmd_classify(args):
    if args.test is None and args.split is None:
        raise ValidationError("give a test CSV or --split")
    cfg = CsvPipelineConfig(
        train_csv=args.train, test_csv=args.test, split=args.split, split_seed=args.split_seed,
        response_column=args.response_column, response_kind=args.response_kind,
        has_header=not args.no_header, method=args.method, criterion=args.criterion,
        classifier=args.classifier, d=args.d, d_max=args.d_max, h_count=args.slices,
        gamma=args.gamma, force_gamma=args.force_gamma, pca_scatter=args.pca_scatter,
        z_convention=args.z_convention,
        out_dir=args.out_dir,
    )
    report = run_csv_pipeline(cfg)
    brief = {k: v for k, v in report.items() if k not in ("eigenvalues", "scores", "ranks")}
    print(json.dumps(brief, indent=2, sort_keys=True))
    return 0


def _cmd_distance(args):
    print(format(subspace_distance(read_matrix_csv(args.a), read_matrix_csv(args.b)), ".17g"))
    return 0


def _cmd_oer(args):
    if args.cov:
        value = oer_lda_full(args.mu1, args.mu2, read_matrix_csv(args.cov))
        print(format(value, ".17g"))
        return 0
    if args.mu1.size != 1 or args.mu2.size != 1 or args.sigma1 is None or args.sigma2 is None:
        raise ValidationError("1D mode needs scalar --mu1/--mu2 plus --sigma1 and --sigma2; otherwise pass --cov")
    inputs = OerInputs1D(float(args.mu1[0]), float(args.mu2[0]), args.sigma1, args.sigma2)
    print(format(oer_1d(inputs), ".17g"))
    if args.mc:
        est, se = mc_oer_oracle(inputs, args.mc, args.seed)
        print(f"monte carlo {est:.6f} (se {se:.2e})")
    return 0


COMMANDS = {
    "simulate": _cmd_simulate,
    "reduce": _cmd_reduce,
    "classify": _cmd_classify,
    "distance": _cmd_distance,
    "oer": _cmd_oer,
}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (NumericalError, SdrError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
