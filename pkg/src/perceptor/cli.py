"""Command-line entry point: ``perceptor <subcommand> [flags]``.

Every CSV output starts with ``#`` provenance lines (version, command line,
seed) followed by a header row; JSON reports carry the same information
under ``"provenance"``.  Exit codes: 0 ok, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shlex
import sys

import numpy as np
import scipy

from . import __version__
from .analysis import (compensate, empirical_accuracy, fit_bias_line, kendall_tau,
                       noise_sweep, pearson, subproblem_scatter)
from .errors import InputError, NumericalError
from .esn import EsnConfig, run_esn
from .io import format_csv, read_labeled, read_matrix
from .shallow import grid_search, load_dataset
from .stats import (ActivationSet, ReadoutPerceptron, avg_correlation, compute_sums,
                    estimate_moments)
from .synth import DEFAULT_MU, DEFAULT_RHO, DEFAULT_SIGMA, sweep_surface
from .theory import predict

METHODS = {"eq1": "eq1", "eq2": "eq2", "eq3-mc": "eq3_mc", "kde": "eq2_kde"}


def _number(tok: str) -> float:
    tok = tok.strip()
    if tok.startswith("2^"):
        return 2.0 ** float(tok[2:])
    return float(tok)


def parse_list(text: str, cast=float) -> list:
    """``"1,3,5"``, ``"0..10"`` (inclusive, step 1) or ``"start:stop:step"``."""
    out = []
    for part in text.split(","):
        part = part.strip()
        if ".." in part:
            lo, hi = part.split("..")
            if lo.startswith("2^") and hi.startswith("2^"):
                out += [2.0 ** k for k in range(int(lo[2:]), int(hi[2:]) + 1)]
            else:
                out += list(range(int(lo), int(hi) + 1))
        elif part.count(":") == 2:
            a, b, s = (float(t) for t in part.split(":"))
            out += list(np.round(np.arange(a, b + s / 2, s), 10))
        elif part:
            out.append(_number(part))
    if not out:
        raise argparse.ArgumentTypeError(f"empty list {text!r}")
    return [cast(v) for v in out]


def _ints(text):
    return parse_list(text, int)


def _floats(text):
    return parse_list(text, float)


def default_threads() -> int:
    env = os.environ.get("PERCEPTOR_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def provenance(argv, seed) -> list[str]:
    return [f"perceptor {__version__} (numpy {np.__version__}, scipy {scipy.__version__})",
            "command: perceptor " + shlex.join(argv),
            f"seed: {seed}"]


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_readout(args, n_classes=None) -> ReadoutPerceptron:
    w = read_matrix(args.weights)
    bias = read_matrix(args.bias).ravel() if getattr(args, "bias", None) else None
    return ReadoutPerceptron(w, bias, args.similarity)


def _load_acts(path, readout) -> ActivationSet:
    x, y = read_labeled(path)
    if x.shape[1] != readout.dim:
        raise InputError(f"{path}: activation dim {x.shape[1]} != readout dim {readout.dim}")
    return ActivationSet(x, y, readout.n_classes)


def cmd_predict(args, argv):
    readout = _load_readout(args)
    acts = _load_acts(args.activations, readout)
    sums = compute_sums(acts, readout)
    stats = estimate_moments(sums, args.priors)
    methods = args.method or ["eq2"]
    report = {
        "provenance": provenance(argv, args.seed),
        "n_classes": readout.n_classes,
        "dim": readout.dim,
        "counts": [int(c) for c in stats.counts],
        "predictions": {},
    }
    for m in methods:
        rep = predict(stats, METHODS[m], sums=sums, samples=args.mc_samples, seed=args.seed,
                      bandwidth=args.bandwidth)
        report["predictions"][m] = rep.to_dict()
    try:
        report["avg_correlation"] = avg_correlation(stats)
    except (InputError, NumericalError):
        report["avg_correlation"] = None
    if args.with_empirical:
        per_class, overall = empirical_accuracy(acts, readout)
        report["empirical"] = {"per_class": [None if np.isnan(a) else float(a)
                                             for a in per_class],
                               "aggregate": overall}
    _emit(json.dumps(report, indent=2) + "\n", args.out)


def cmd_esn(args, argv):
    cfg = EsnConfig(n=args.n, d=args.d, kappa=args.kappa, delays=tuple(args.delays),
                    train_len=args.train_len, test_len=args.test_len, seed=args.seed,
                    readout=args.readout, ridge_lambda=args.lam, similarity=args.similarity,
                    amplitudes=tuple(args.amplitudes) if args.amplitudes else None,
                    mc_samples=args.mc_samples)
    curves = run_esn(cfg, args.seeds, threads=args.threads)
    text = format_csv(["delay", "empirical", "eq1", "eq2", "eq3_mc", "stderr"],
                      curves.rows(), provenance(argv, args.seed))
    _emit(text, args.out)


def cmd_rvfl(args, argv):
    ds = load_dataset(args.dataset)
    res = grid_search(ds, args.n, args.lam, args.kappa, args.readout, args.folds,
                      args.seed, args.threads)
    rows = []
    for cell in res.cells:
        for fold, acc in enumerate(cell.fold_accuracy):
            rows.append((cell.n, float(cell.lam), float(cell.kappa), fold, float(acc),
                         float(cell.fold_pred_train[fold]), float(cell.fold_pred_test[fold])))
    text = format_csv(["N", "lambda", "kappa", "fold", "accuracy", "pred_eq2_train",
                       "pred_eq2_test"], rows, provenance(argv, args.seed))
    _emit(text, args.out)
    n, lam, kappa = res.best
    print(f"best: N={n} lambda={lam!r} kappa={kappa!r} accuracy={res.accuracy:.4f}",
          file=sys.stderr)


def cmd_subproblem(args, argv):
    readout = _load_readout(args)
    acts = _load_acts(args.activations, readout)
    network = args.network or os.path.splitext(os.path.basename(args.weights))[0]
    rows = subproblem_scatter(acts, readout, args.subproblem_sizes, args.count, args.seed,
                              network, METHODS[args.method])
    _emit(format_csv(["predicted", "actual", "size", "network"], rows,
                     provenance(argv, args.seed)), args.out)
    if args.report:
        pred = [r[0] for r in rows]
        actual = [r[1] for r in rows]
        line = fit_bias_line(pred, actual)
        full = predict(estimate_moments(compute_sums(acts, readout)), METHODS[args.method],
                       seed=args.seed)
        report = {"provenance": provenance(argv, args.seed), "network": network,
                  "slope": line.slope, "intercept": line.intercept,
                  "pearson": pearson(pred, actual),
                  "full_predicted": full.aggregate,
                  "full_compensated": compensate(full.aggregate, line),
                  "full_empirical": empirical_accuracy(acts, readout)[1]}
        with open(args.report, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(report, indent=2) + "\n")


def cmd_readout_only(args, argv):
    names = [os.path.splitext(os.path.basename(p))[0] for p in args.weights]
    readouts = [ReadoutPerceptron(read_matrix(p), similarity=args.similarity)
                for p in args.weights]
    sweep = noise_sweep(readouts, args.noise_db, args.reps, args.experiments, args.seed)
    mean_pred = sweep.predictions.mean(axis=0)
    rows = [(float(db), names[r], float(mean_pred[k, r]), float(sweep.mean_std[k]))
            for k, db in enumerate(sweep.db) for r in range(len(readouts))]
    text = format_csv(["noise_db", "network", "mean_predicted", "std_across_networks"],
                      rows, provenance(argv, args.seed))
    text += f"# selected_db: {sweep.selected_db}\n"
    _emit(text, args.out)


def cmd_metrics(args, argv):
    pred, actual = [], []
    with open(args.pairs, encoding="utf-8") as fh:
        reader = csv.DictReader(line for line in fh if not line.startswith("#"))
        if not reader.fieldnames or not {"predicted", "actual"} <= set(reader.fieldnames):
            raise InputError(f"{args.pairs}: need 'predicted' and 'actual' columns")
        for k, row in enumerate(reader, start=2):
            try:
                pred.append(float(row["predicted"]))
                actual.append(float(row["actual"]))
            except (TypeError, ValueError):
                raise InputError(f"{args.pairs}: data row {k}: bad number") from None
    line = fit_bias_line(pred, actual)
    comp = compensate(np.array(pred), line)
    report = {"provenance": provenance(argv, args.seed), "n": len(pred),
              "pearson": pearson(pred, actual), "kendall_tau": kendall_tau(pred, actual),
              "slope": line.slope, "intercept": line.intercept,
              "mae_raw": float(np.mean(np.abs(np.array(pred) - actual))),
              "mae_compensated": float(np.mean(np.abs(comp - actual)))}
    _emit(json.dumps(report, indent=2) + "\n", args.out)


def cmd_synth(args, argv):
    rows = sweep_surface(args.mu, args.sigma, args.rho, args.samples, args.seed, args.threads)
    _emit(format_csv(["mu", "sigma", "rho", "eq2", "closed_form", "empirical", "stderr"],
                     rows, provenance(argv, args.seed)), args.out)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=None,
                        help="worker threads (default: $PERCEPTOR_THREADS or CPU count)")
    common.add_argument("--out", help="output file (default: stdout)")

    p = argparse.ArgumentParser(prog="perceptor", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"perceptor {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("predict", parents=[common], help="predict accuracy from files")
    sp.add_argument("--activations", required=True, help="label,v1,...,vN rows")
    sp.add_argument("--weights", required=True, help="D x N matrix CSV")
    sp.add_argument("--bias", help="1 x D matrix CSV")
    sp.add_argument("--method", action="append", choices=sorted(METHODS))
    sp.add_argument("--mc-samples", type=int, default=100_000)
    sp.add_argument("--similarity", choices=("dot", "cosine"), default="dot")
    sp.add_argument("--priors", choices=("empirical", "uniform"), default="empirical")
    sp.add_argument("--bandwidth", default="auto")
    sp.add_argument("--with-empirical", action="store_true",
                    help="also report the winner-take-all accuracy of the labelled inputs")
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("esn", parents=[common], help="trajectory-association curves")
    sp.add_argument("--n", type=int, default=100)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--kappa", type=float, default=4)
    sp.add_argument("--delays", type=_ints, default=list(range(11)))
    sp.add_argument("--delay", dest="delays", type=lambda t: [int(t)],
                    help="single delay (shorthand for --delays D)")
    sp.add_argument("--seeds", type=int, default=5, help="number of simulations to average")
    sp.add_argument("--readout", choices=("codebook", "regression"), default="codebook")
    sp.add_argument("--train-len", type=int, default=10_000)
    sp.add_argument("--test-len", type=int, default=10_000)
    sp.add_argument("--lambda", dest="lam", type=float, default=0.01)
    sp.add_argument("--similarity", choices=("dot", "cosine"), default="cosine")
    sp.add_argument("--amplitudes", type=_floats)
    sp.add_argument("--mc-samples", type=int, default=20_000)
    sp.set_defaults(func=cmd_esn)

    sp = sub.add_parser("rvfl", parents=[common], help="shallow-network grid search")
    sp.add_argument("--dataset", required=True, help="bundled name or label,f1,... CSV")
    sp.add_argument("--n", type=_ints, default=[50, 200])
    sp.add_argument("--lambda", dest="lam", type=_floats, default=[2.0 ** -10, 1.0])
    sp.add_argument("--kappa", type=_floats, default=[1, 3])
    sp.add_argument("--readout", choices=("centroid", "ridge"), default="ridge")
    sp.add_argument("--folds", type=int, default=5)
    sp.set_defaults(func=cmd_rvfl)

    sp = sub.add_parser("subproblem", parents=[common], help="sub-problem scatter")
    sp.add_argument("--activations", required=True)
    sp.add_argument("--weights", required=True)
    sp.add_argument("--bias")
    sp.add_argument("--similarity", choices=("dot", "cosine"), default="dot")
    sp.add_argument("--subproblem-sizes", type=_ints, default=[2, 4, 8])
    sp.add_argument("--count", type=int, default=40)
    sp.add_argument("--network")
    sp.add_argument("--method", choices=sorted(METHODS), default="eq2")
    sp.add_argument("--report", help="write the fitted bias line and compensation as JSON")
    sp.set_defaults(func=cmd_subproblem)

    sp = sub.add_parser("readout-only", parents=[common],
                        help="predict from readout weights with white-noise surrogates")
    sp.add_argument("--weights", required=True, action="append")
    sp.add_argument("--similarity", choices=("dot", "cosine"), default="dot")
    sp.add_argument("--noise-db", type=_floats, default=parse_list("0:30:2"))
    sp.add_argument("--reps", type=int, default=50)
    sp.add_argument("--experiments", type=int, default=10)
    sp.set_defaults(func=cmd_readout_only)

    sp = sub.add_parser("metrics", parents=[common], help="correlation, ranking, bias line")
    sp.add_argument("--pairs", required=True, help="CSV with predicted,actual columns")
    sp.set_defaults(func=cmd_metrics)

    sp = sub.add_parser("synth", parents=[common], help="correlated binary sweep")
    sp.add_argument("--mu", type=_floats, default=list(DEFAULT_MU))
    sp.add_argument("--sigma", type=_floats, default=list(DEFAULT_SIGMA))
    sp.add_argument("--rho", type=_floats, default=list(DEFAULT_RHO))
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.set_defaults(func=cmd_synth)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    if args.threads is None:
        args.threads = default_threads()
    try:
        args.func(args, argv)
    except (InputError, OSError) as exc:
        print(f"perceptor: error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"perceptor: numerical failure: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
