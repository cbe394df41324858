"""Command-line interface.

Subcommands: ``fit``, ``evaluate``, ``predict``, ``bipartivity``,
``pathweights`` and ``replay``.  Exit status is 0 on success, 1 for input
errors and 2 for numerical failures.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bipartivity import assess
from .errors import ConvergenceError, DomainError, FitError, ParseError
from .evaluation import TABLE_METHODS, EvalConfig, format_csv, format_table, run_experiment
from .graph import biadjacency, read_bipartite, read_unipartite, split_edges
from .kernels import FAMILIES, OddNeumann, Sinh, taylor_weights, top_n, transform_from_record
from .learning import DEFAULT_DEGREE, FitTargets, build_targets, fit_all
from .sparse import SparseMatrix, SvdModel, truncated_svd

log = logging.getLogger("oddlink")

FIT_FAMILIES = "sinh,neumann,poly,nnpoly,reduction"


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _families(text, allowed):
    names = [f.strip() for f in text.split(",") if f.strip()]
    bad = [f for f in names if f not in allowed]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown families: {', '.join(bad)}")
    return names


def _write(path, text):
    Path(path).write_text(text)
    log.info("wrote %s", path)


def _write_manifest(outdir, args, argv, inputs):
    config = {k: v for k, v in vars(args).items() if k not in ("func", "verbose")}
    manifest = {
        "command": args.command,
        "argv": list(argv),
        "inputs": [str(p) for p in inputs],
        "config": config,
        "version": __version__,
    }
    _write(Path(outdir) / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True, default=str) + "\n")


def _outdir(args):
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _read_graph(args, path):
    return read_bipartite(path, has_weight=args.weighted, has_timestamp=args.timestamped)


def _read_targets(path):
    sigma, target = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.strip().split(",")
            if not line.strip() or parts[0] == "sigma":
                continue
            try:
                sigma.append(float(parts[0]))
                target.append(float(parts[1]))
            except (ValueError, IndexError):
                raise ParseError(f"bad target row {line.strip()!r}", lineno) from None
    if not sigma:
        raise ParseError(f"{path}: no target pairs")
    order = np.argsort(-np.abs(sigma), kind="stable")
    return FitTargets(np.array(sigma)[order], np.array(target)[order], len(sigma))


def cmd_fit(args, argv):
    out = _outdir(args)
    model = None
    if args.targets:
        targets = _read_targets(args.targets)
        inputs = [args.targets]
    else:
        if not args.input:
            raise InputError("fit needs --input or --targets")
        g = _read_graph(args, args.input)
        inputs = [args.input]
        by_time = g.timestamps is not None
        inner = split_edges(g, args.inner_fraction, args.seed, by_time)
        k = min(args.k, g.left_count, g.right_count)
        inner_model = truncated_svd(biadjacency(inner.train), k, seed=args.seed)
        holdout = SparseMatrix.from_coo(inner_model.shape, inner.test_edges[:, 0], inner.test_edges[:, 1])
        targets = build_targets(inner_model, holdout)
        model = truncated_svd(biadjacency(g), k, seed=args.seed)
        model.save(out / "model.tsv", g.left_labels, g.right_labels)
    reports = fit_all(args.families, targets, threads=args.threads, degree=args.degree)
    failed = []
    for r in reports:
        _write(out / f"{r.family}.fit", r.to_record())
        if r.error:
            failed.append(r)
            continue
        _write(out / f"{r.family}_curve.csv", r.curve_csv())
        print(f"{r.family}\tresidual={r.residual:.6g}\t{r.transform!r}")
    _write_manifest(out, args, argv, inputs)
    for r in failed:
        print(f"{r.family}\tfailed: {r.error}", file=sys.stderr)
    return 2 if failed and len(failed) == len(reports) else 0


def cmd_evaluate(args, argv):
    out = _outdir(args)
    config = EvalConfig(
        test_fraction=args.test_fraction,
        inner_fraction=args.inner_fraction,
        seed=args.seed,
        k=args.k,
        candidate_cap=args.candidate_cap,
        candidate_ratio=args.negatives_ratio,
        methods=tuple(args.families),
        users=args.users,
        degree=args.degree,
        threads=args.threads,
    )
    reports = []
    for path in args.input:
        if not os.path.exists(path):
            raise FileNotFoundError(path)
        reports.append(run_experiment(path, config, name=Path(path).stem,
                                      has_weight=args.weighted, has_timestamp=args.timestamped))
    methods = list(config.methods)
    _write(out / "results.csv", format_csv(reports, methods))
    table = format_table(reports, methods)
    _write(out / "results.txt", table)
    details = [{
        "dataset": r.dataset, "nodes": r.nodes, "edges": r.edges, "map": r.maps,
        "params": r.params, "errors": r.errors, "timing": r.timing, "rank": r.rank,
        "seed": r.seed, "users_evaluated": r.users_evaluated, "users_skipped": r.users_skipped,
        "transform_reused": r.transform_reused,
    } for r in reports]
    _write(out / "report.json", json.dumps(details, indent=2, default=str) + "\n")
    _write_manifest(out, args, argv, args.input)
    sys.stdout.write(table)
    for r in reports:
        for method, err in r.errors.items():
            print(f"{r.dataset}\t{method}\terror: {err}", file=sys.stderr)
    return 0


def cmd_predict(args, argv):
    model, left_labels, right_labels = SvdModel.load(args.model)
    transform = transform_from_record(Path(args.transform).read_text())
    g = _read_graph(args, args.input)
    if left_labels is None:
        left_labels, right_labels = g.left_labels, g.right_labels
    if (len(left_labels), len(right_labels)) != model.shape:
        raise InputError("model labels do not match its dimensions")
    left_index = {lab: i for i, lab in enumerate(left_labels)}
    right_index = {lab: i for i, lab in enumerate(right_labels)}
    known = {}
    for u, w in g.edges:
        lu, lw = g.left_labels[u], g.right_labels[w]
        if lu not in left_index or lw not in right_index:
            raise InputError(f"edge ({lu}, {lw}) not covered by the model")
        known.setdefault(left_index[lu], set()).add(right_index[lw])
    if args.all:
        nodes = range(model.shape[0])
    else:
        if args.node not in left_index:
            raise InputError(f"unknown node label {args.node!r}")
        nodes = [left_index[args.node]]
    lines = []
    for u in nodes:
        for w, s in top_n(model, transform, u, args.top, known.get(u, ())):
            lines.append(f"{left_labels[u]}\t{right_labels[w]}\t{s:.6g}")
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_bipartivity(args, argv):
    out = Path(args.output_dir) if args.output_dir else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for path in args.input:
        g = read_unipartite(path)
        rep = assess(g, m_top=args.m_top, m_bottom=args.m_bottom, fraction=args.test_fraction,
                     seed=args.seed, threshold=args.threshold)
        print(rep.summary(Path(path).name))
        if out:
            _write(out / f"{Path(path).stem}_bipartivity.csv", rep.curve_csv())
    if out:
        _write_manifest(out, args, argv, args.input)
    return 0


def cmd_pathweights(args, argv):
    cls = {"sinh": Sinh, "neumann": OddNeumann}
    columns = [taylor_weights(cls[f](args.alpha, args.beta), args.max_power) for f in args.family]
    rows = ["power," + ",".join(args.family)]
    for i, (power, _) in enumerate(columns[0]):
        rows.append(f"{power}," + ",".join(f"{col[i][1]:.6g}" for col in columns))
    text = "\n".join(rows) + "\n"
    if args.output:
        _write(args.output, text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_replay(args, argv):
    manifest = json.loads(Path(args.manifest).read_text())
    stored = list(manifest["argv"])
    if args.output_dir:
        stored += ["--output-dir", args.output_dir]
    return main(stored)


def build_parser():
    p = _Parser(prog="oddlink", description="Bipartite link prediction with odd spectral transformations.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, output_dir=True):
        sp.add_argument("--seed", type=int, default=1)
        sp.add_argument("--weighted", action="store_true", help="input has a weight column (ignored)")
        sp.add_argument("--timestamped", action="store_true", help="input has a timestamp column")
        sp.add_argument("--threads", type=int, default=1)
        if output_dir:
            sp.add_argument("--output-dir", default=".")

    sp = sub.add_parser("fit", help="learn transformation parameters")
    sp.add_argument("--input")
    sp.add_argument("--targets", help="CSV of sigma,target pairs instead of a graph")
    sp.add_argument("--k", type=int, default=32)
    sp.add_argument("--inner-fraction", type=float, default=0.3)
    sp.add_argument("--degree", type=int, default=DEFAULT_DEGREE)
    sp.add_argument("--families", type=lambda s: _families(s, FAMILIES), default=FIT_FAMILIES.split(","))
    common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("evaluate", help="holdout MAP evaluation")
    sp.add_argument("--input", nargs="+", required=True)
    sp.add_argument("--k", type=int, default=32)
    sp.add_argument("--test-fraction", type=float, default=0.3)
    sp.add_argument("--inner-fraction", type=float, default=0.3)
    sp.add_argument("--degree", type=int, default=DEFAULT_DEGREE)
    sp.add_argument("--families", type=lambda s: _families(s, set(TABLE_METHODS)),
                    default=list(TABLE_METHODS))
    sp.add_argument("--candidate-cap", type=int)
    sp.add_argument("--negatives-ratio", type=float,
                    help="rank each user's test items against this many sampled non-edges per test item")
    sp.add_argument("--users", choices=("left", "right"), default="left")
    common(sp)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("predict", help="top-n predictions from a fitted model")
    sp.add_argument("--model", required=True)
    sp.add_argument("--transform", required=True, help="a .fit record written by 'fit'")
    sp.add_argument("--input", required=True, help="training edge list (its edges are excluded)")
    who = sp.add_mutually_exclusive_group(required=True)
    who.add_argument("--node")
    who.add_argument("--all", action="store_true")
    sp.add_argument("--top", type=int, default=10)
    sp.add_argument("--output")
    common(sp, output_dir=False)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("bipartivity", help="detect near-bipartite unipartite networks")
    sp.add_argument("input", nargs="+")
    sp.add_argument("--m-top", type=int, default=16)
    sp.add_argument("--m-bottom", type=int, default=16)
    sp.add_argument("--test-fraction", type=float, default=0.3)
    sp.add_argument("--threshold", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--output-dir")
    sp.set_defaults(func=cmd_bipartivity)

    sp = sub.add_parser("pathweights", help="path weights of odd transformations")
    sp.add_argument("--family", type=lambda s: _families(s, {"sinh", "neumann"}), default=["sinh", "neumann"])
    sp.add_argument("--alpha", type=float, required=True)
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--max-power", type=int, default=9)
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_pathweights)

    sp = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    sp.add_argument("manifest")
    sp.add_argument("--output-dir")
    sp.set_defaults(func=cmd_replay)
    return p


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # usage errors exit 1; --help and --version exit 0
        return exc.code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, argv)
    except (ConvergenceError, DomainError, FitError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"oddlink: numerical error: {exc}", file=sys.stderr)
        return 2
    except (ParseError, InputError, OSError, KeyError, ValueError) as exc:
        print(f"oddlink: input error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
