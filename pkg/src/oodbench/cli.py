"""Command-line interface.

Subcommands:
  toygen        write one built-in 2-D toy dataset as three feature files
  eval          score one detector on (id_train, id_test, ood_test) files
  sweep         oracle (T, eps) grid search -- consults labeled OOD data!
  toy-suite     replicate the built-in toy sanity numbers across seeds
  finetune      train the weighted-pairwise head on a training feature file
  compare       assemble eval reports into a metrics table + win matrices
  ingest-check  validate feature files and their cross-set consistency

Feature files with logits are scored as-is through table lookups; detectors
that perturb inputs then require preprocessing-tagged variant files. Files
without logits are treated as raw points: a linear softmax classifier is
trained on the spot, and perturbations are computed analytically.

Relative --out paths are placed under $OODBENCH_OUT when that variable is
set. Every error class maps to its own exit code (see EXIT_CODES); 0 means
the command fully succeeded.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .datasets import LabeledDataset, generate_toy_dataset1, generate_toy_dataset2, low_data_subset
from .detectors import Scheme
from .errors import (
    BadMagic,
    ChecksumFailure,
    DimensionMismatch,
    EmptyClass,
    IncompleteGrid,
    InconsistentHeader,
    InsufficientClassSize,
    InsufficientExamples,
    MissingLabels,
    MissingPreprocessedVariant,
    NonFinite,
    NotPositiveDefinite,
    OodbenchError,
    UnsupportedCapability,
    VersionMismatch,
)
from .experiments import (
    DEFAULT_SEEDS,
    FIXED_EPS,
    FIXED_M,
    FIXED_T,
    METHODS,
    SweepGrid,
    build_report,
    run_cell,
    run_sweep,
    run_toy_suite,
)
from .finetune import FinetuneConfig, train_pairwise
from .io import (
    FeatureSet,
    PreprocessingTag,
    Report,
    ingest_as_model,
    read_feature_file,
    report_rows_from_json,
    write_feature_file,
    write_report_csv,
    write_report_json,
)
from .metrics import EvalResult
from .models import PairwiseHead, train_linear_softmax
from .numkit import Prng

SWEEP_NOTE = (
    "NOTE: the sweep picks (T, eps) by scoring against labeled OOD data. "
    "The chosen point is an oracle upper bound, not a deployable "
    "configuration; deployable defaults are T=1000, eps=0."
)

EXIT_CODES = {
    BadMagic: 10,
    VersionMismatch: 11,
    ChecksumFailure: 12,
    InconsistentHeader: 13,
    MissingLabels: 14,
    MissingPreprocessedVariant: 15,
    DimensionMismatch: 16,
    UnsupportedCapability: 17,
    IncompleteGrid: 18,
    NonFinite: 19,
    EmptyClass: 20,
    InsufficientExamples: 21,
    InsufficientClassSize: 22,
    NotPositiveDefinite: 23,
}
EXIT_IO = 3        # OSError: unreadable/unwritable paths
EXIT_USAGE = 4     # bad argument values past argparse (argparse itself: 2)
EXIT_UNKNOWN = 9   # OodbenchError without a dedicated code


def _out_path(path):
    base = os.environ.get("OODBENCH_OUT")
    if base and not os.path.isabs(path):
        path = os.path.join(base, path)
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    return path


def _parse_scheme(text):
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError("scheme must be 'g_cls,g_ex', e.g. 'min,average'")
    return Scheme(parts[0].strip(), parts[1].strip())


def _parse_ints(text):
    return [int(tok) for tok in text.split(",") if tok.strip() != ""]


def _parse_floats(text):
    return [float(tok) for tok in text.split(",") if tok.strip() != ""]


def _load_role(path, role):
    fs = read_feature_file(path)
    if fs.role != role:
        raise ValueError(f"{path}: role is {fs.role!r}, expected {role!r}")
    return fs


def _strip_tag(fs):
    return FeatureSet(fs.dataset, fs.role, fs.embeddings, fs.logits,
                      fs.labels, class_count=fs.class_count)


def _required_tag(method, T, eps):
    if method == "odin":
        return PreprocessingTag("odin", T, eps)
    return PreprocessingTag("maha", None, eps)


class _EvalSetup:
    """Resolved scoring inputs for eval/finetune: model + train + views."""

    def __init__(self, model, train, id_points, ood_points):
        self.model = model
        self.train = train
        self.id_points = id_points
        self.ood_points = ood_points


def _setup_eval(train_fs, id_fs, ood_fs, method, T, eps, regime, low_fraction):
    """Build the model and views for one eval cell.

    Ingested mode (train file has logits): for eps > 0 both test files must
    be the preprocessing-tagged variants matching (method, T, eps); the
    stored features already contain the nudge, so the detector runs at
    eps = 0. Live mode (no logits): a linear softmax model is trained on the
    raw points and perturbations are computed on the fly, so test files must
    be untagged.
    """
    needs_tag = eps > 0 and method in ("odin", "maha")
    if train_fs.logits is not None:
        if needs_tag:
            want = _required_tag(method, T, eps)
            for fs, flag in ((id_fs, "--id-test"), (ood_fs, "--ood-test")):
                if fs.preprocessing != want:
                    raise MissingPreprocessedVariant(
                        f"{flag}: eps={eps} on stored features needs the "
                        f"variant tagged ({want.method}, T={want.T}, "
                        f"eps={want.eps}); file is tagged {fs.preprocessing}"
                    )
            id_fs, ood_fs = _strip_tag(id_fs), _strip_tag(ood_fs)
        else:
            for fs, flag in ((id_fs, "--id-test"), (ood_fs, "--ood-test")):
                if fs.preprocessing is not None:
                    raise ValueError(
                        f"{flag} is tagged {fs.preprocessing} but the "
                        f"requested cell uses raw features"
                    )
        ing = ingest_as_model(train_fs, [id_fs, ood_fs])
        train = ing.train
        if regime == "low":
            train = low_data_subset(train, low_fraction)
        return _EvalSetup(
            ing.model, train,
            ing.slot(id_fs.dataset, "id_test").view(),
            ing.slot(ood_fs.dataset, "ood_test").view(),
        ), (0.0 if needs_tag else eps)

    for fs, flag in ((id_fs, "--id-test"), (ood_fs, "--ood-test")):
        if fs.preprocessing is not None:
            raise ValueError(
                f"{flag} is preprocessing-tagged, but files without logits "
                f"are scored live and perturbed on the fly; pass raw files"
            )
    train = LabeledDataset(
        train_fs.embeddings.astype(np.float64),
        train_fs.labels.astype(np.int64),
        train_fs.class_count,
    )
    if regime == "low":
        train = low_data_subset(train, low_fraction)
    model = train_linear_softmax(train)
    return _EvalSetup(
        model, train,
        id_fs.embeddings.astype(np.float64),
        ood_fs.embeddings.astype(np.float64),
    ), eps


def _row(train_fs, ood_fs, args, method, T, eps, result):
    uses_bank = method in ("pod", "podft")
    return {
        "id": train_fs.dataset,
        "ood": ood_fs.dataset,
        "method": method,
        "T": T if method == "odin" else None,
        "eps": eps if method in ("odin", "maha") else None,
        "scheme": f"{args.scheme.g_cls},{args.scheme.g_ex}" if method == "pod"
        else None,
        "M": (args.M if args.M else None) if uses_bank else None,
        "regime": args.regime,
        "seed": args.seed,
        "auroc": result.auroc,
        "fnr95": result.fnr95,
    }


def cmd_toygen(args):
    produce = {1: generate_toy_dataset1, 2: generate_toy_dataset2}[args.dataset]
    bundle = produce(Prng(args.seed))
    name = f"toy{args.dataset}"
    sets = [
        FeatureSet(name, "id_train", bundle.id_train.points,
                   labels=bundle.id_train.labels,
                   class_count=bundle.id_train.class_count),
        FeatureSet(name, "id_test", bundle.id_test.points,
                   labels=bundle.id_test.labels,
                   class_count=bundle.id_test.class_count),
        FeatureSet(f"{name}-ood", "ood_test", bundle.ood_test),
    ]
    out_dir = _out_path(args.out)
    os.makedirs(out_dir, exist_ok=True)
    for fs in sets:
        path = os.path.join(out_dir, f"{name}_seed{args.seed}_{fs.role}.oodf")
        write_feature_file(fs, path)
        print(f"wrote {path}  (n={fs.n}, e={fs.e})")
    return 0


def cmd_eval(args):
    train_fs = _load_role(args.id_train, "id_train")
    id_fs = _load_role(args.id_test, "id_test")
    ood_fs = _load_role(args.ood_test, "ood_test")
    setup, detector_eps = _setup_eval(
        train_fs, id_fs, ood_fs, args.method, args.T, args.epsilon,
        args.regime, args.low_fraction,
    )
    params = {"seed": args.seed}
    if args.method == "odin":
        params.update(T=args.T, eps=detector_eps)
    elif args.method == "maha":
        params.update(eps=detector_eps)
    elif args.method in ("pod", "podft"):
        params.update(M=args.M if args.M else None)
        if args.method == "pod":
            params.update(scheme=args.scheme)
    result = run_cell(setup.model, setup.train, setup.id_points,
                      setup.ood_points, args.method, **params)
    print(f"{args.method}: AUROC {result.auroc:.6f}  "
          f"FNR@TNR95 {result.fnr95:.6f}")
    if args.out:
        row = _row(train_fs, ood_fs, args, args.method, args.T, args.epsilon,
                   result)
        write_report_json(Report([row], {}), _out_path(args.out))
        print(f"wrote {_out_path(args.out)}")
    return 0


def _ingest_groups(paths, role):
    """Split repeated --id-test/--ood-test files into (base, variants)."""
    sets = [_load_role(p, role) for p in paths]
    bases = [fs for fs in sets if fs.preprocessing is None]
    if len(bases) != 1:
        raise ValueError(
            f"exactly one untagged {role} file is required, got {len(bases)}"
        )
    return bases[0], [fs for fs in sets if fs.preprocessing is not None]


def cmd_sweep(args):
    print(SWEEP_NOTE)
    train_fs = _load_role(args.id_train, "id_train")
    grid = SweepGrid(
        temperatures=tuple(_parse_floats(args.temperatures)),
        epsilons=tuple(_parse_floats(args.epsilons)),
    )
    if train_fs.logits is not None:
        id_base, id_variants = _ingest_groups(args.id_test, "id_test")
        ood_base, ood_variants = _ingest_groups(args.ood_test, "ood_test")
        ing = ingest_as_model(
            train_fs, [id_base, ood_base] + id_variants + ood_variants
        )
        train = ing.train
        if args.regime == "low":
            train = low_data_subset(train, args.low_fraction)
        outcome = run_sweep(
            ing.model, train,
            ing.slot(id_base.dataset, "id_test"),
            ing.slot(ood_base.dataset, "ood_test"),
            args.method, grid=grid, seed=args.seed,
        )
        ood_fs = ood_base
    else:
        if len(args.id_test) != 1 or len(args.ood_test) != 1:
            raise ValueError(
                "files without logits are scored live; pass exactly one "
                "--id-test and one --ood-test"
            )
        id_fs = _load_role(args.id_test[0], "id_test")
        ood_fs = _load_role(args.ood_test[0], "ood_test")
        setup, _ = _setup_eval(train_fs, id_fs, ood_fs, args.method,
                               FIXED_T, 0.0, args.regime, args.low_fraction)
        outcome = run_sweep(setup.model, setup.train, setup.id_points,
                            setup.ood_points, args.method, grid=grid,
                            seed=args.seed)
    chosen = dict(outcome.chosen)
    label = " ".join(f"{k}={v}" for k, v in sorted(chosen.items()))
    print(f"chosen {label}: AUROC {outcome.result.auroc:.6f}  "
          f"FNR@TNR95 {outcome.result.fnr95:.6f}  "
          f"(over {len(outcome.cells)} grid cells)")
    if args.out:
        row = _row(train_fs, ood_fs, args, args.method,
                   chosen.get("T", FIXED_T), chosen["eps"], outcome.result)
        row["selection"] = "ood-oracle-sweep"
        write_report_json(Report([row], {}), _out_path(args.out))
        print(f"wrote {_out_path(args.out)}")
    return 0


def cmd_toy_suite(args):
    suite = run_toy_suite(_parse_ints(args.seeds))
    t1, t2 = suite["toy1"]["mean"], suite["toy2"]["mean"]
    print(f"seeds: {suite['seeds']}")
    print(f"toy1 mean: accuracy {t1['accuracy']:.3f}  "
          f"msp {t1['msp_auroc']:.3f}  mindist {t1['mindist_auroc']:.3f}")
    pod = t2["pod_auroc"]
    print(f"toy2 mean: accuracy {t2['accuracy']:.3f}  "
          f"msp {t2['msp_auroc']:.3f}  "
          f"pod(min,min) {pod['min,min']:.3f}  "
          f"pod(min,average) {pod['min,average']:.3f}  "
          f"pod(average,average) {pod['average,average']:.3f}")
    if args.out:
        with open(_out_path(args.out), "w", encoding="utf-8") as fh:
            json.dump(suite, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {_out_path(args.out)}")
    return 0


def cmd_finetune(args):
    train_fs = _load_role(args.id_train, "id_train")
    if train_fs.logits is not None:
        ing = ingest_as_model(train_fs, [])
        model, train = ing.model, ing.train
    else:
        train = LabeledDataset(
            train_fs.embeddings.astype(np.float64),
            train_fs.labels.astype(np.int64),
            train_fs.class_count,
        )
        model = train_linear_softmax(train)
    cfg = FinetuneConfig(n_epochs=args.epochs, n_pairs_per_epoch=args.pairs,
                         lr=args.lr)
    losses, stats = [], {}
    _, head = train_pairwise(model, PairwiseHead(np.ones(model.embed_dim)),
                             train, cfg, Prng(args.seed),
                             loss_log=losses, stats=stats)
    print(f"pairwise head trained: epochs={cfg.n_epochs} "
          f"pairs={cfg.n_pairs_per_epoch} lr={cfg.lr}")
    print(f"loss first {losses[0]:.6f} -> last {losses[-1]:.6f}  "
          f"beta {stats['beta']:.6f}")
    if args.out:
        payload = {
            "w": head.w.tolist(), "beta": stats["beta"], "losses": losses,
            "epochs": cfg.n_epochs, "pairs": cfg.n_pairs_per_epoch,
            "lr": cfg.lr, "seed": args.seed,
        }
        with open(_out_path(args.out), "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        print(f"wrote {_out_path(args.out)}")
    return 0


def cmd_compare(args):
    paths = sorted(
        os.path.join(args.reports, name)
        for name in os.listdir(args.reports)
        if name.endswith(".json")
    )
    if not paths:
        raise ValueError(f"no .json reports found in {args.reports}")
    rows = []
    for path in paths:
        rows.extend(report_rows_from_json(path))
    groups = {}
    for row in rows:
        key = ((row["id"], row["ood"]), row["method"], row["regime"])
        groups.setdefault(key, []).append(row)
    cells = {
        key: EvalResult(
            float(np.mean([r["auroc"] for r in rs])),
            float(np.mean([r["fnr95"] for r in rs])),
        )
        for key, rs in groups.items()
    }
    report = build_report(cells)
    for regime in sorted(report.win_matrices):
        wm = report.win_matrices[regime]
        print(f"win matrix ({regime}), {wm.pair_total} dataset pair(s):")
        width = max(len(m) for m in wm.methods)
        header = " ".join(f"{m:>{width}}" for m in wm.methods)
        print(f"  {'':>{width}} {header}")
        for i, name in enumerate(wm.methods):
            counts = " ".join(f"{int(w):>{width}}" for w in wm.wins[i])
            print(f"  {name:>{width}} {counts}")
    out = _out_path(args.out)
    write_report_csv(report, out)
    print(f"wrote {out}")
    return 0


def cmd_ingest_check(args):
    sets = []
    for path in args.files:
        fs = read_feature_file(path)
        sets.append(fs)
        tag = fs.preprocessing
        tag_text = "none" if tag is None else (
            f"({tag.method}, T={tag.T}, eps={tag.eps})"
        )
        print(f"{path}: ok  dataset={fs.dataset} role={fs.role} "
              f"n={fs.n} e={fs.e} c={fs.class_count} "
              f"logits={'y' if fs.logits is not None else 'n'} "
              f"labels={'y' if fs.labels is not None else 'n'} "
              f"preprocessing={tag_text}")
    trains = [fs for fs in sets if fs.role == "id_train"]
    tests = [fs for fs in sets if fs.role != "id_train"]
    if len(trains) == 1 and tests:
        ing = ingest_as_model(trains[0], tests)
        n_rows = sum(fs.n for fs in sets)
        print(f"cross-set ingest: ok ({n_rows} rows, e={ing.model.embed_dim})")
    elif len(sets) > 1:
        widths = {fs.e for fs in sets}
        if len(widths) > 1:
            raise DimensionMismatch(
                f"embedding widths differ across files: {sorted(widths)}"
            )
        print("cross-set ingest: skipped (need exactly one id_train plus "
              "test sets)")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oodbench",
        description="Scoring and evaluation harness for OOD detection.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("toygen", help="write a built-in 2-D toy dataset "
                                      "as three feature files")
    p.add_argument("--dataset", type=int, choices=(1, 2), required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_toygen)

    def add_eval_common(p, multi_test=False):
        p.add_argument("--id-train", required=True)
        if multi_test:
            p.add_argument("--id-test", action="append", required=True,
                           help="repeatable; tagged variants alongside the "
                                "untagged base")
            p.add_argument("--ood-test", action="append", required=True)
        else:
            p.add_argument("--id-test", required=True)
            p.add_argument("--ood-test", required=True)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--regime", choices=("full", "low"), default="full")
        p.add_argument("--low-fraction", type=float, default=0.1)
        p.add_argument("--out", default=None, help="report JSON path")

    p = sub.add_parser("eval", help="score one detector on feature files")
    add_eval_common(p)
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--T", type=float, default=FIXED_T)
    p.add_argument("--epsilon", type=float, default=FIXED_EPS)
    p.add_argument("--scheme", type=_parse_scheme, default=Scheme("min", "average"),
                   help="class,exemplar accumulators (default min,average)")
    p.add_argument("--M", type=int, default=FIXED_M,
                   help="exemplars per class; 0 = use every training point")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser(
        "sweep",
        help="oracle (T, eps) grid search (consults labeled OOD data!)",
        description=SWEEP_NOTE,
    )
    add_eval_common(p, multi_test=True)
    p.add_argument("--method", choices=("odin", "maha"), required=True)
    p.add_argument("--temperatures", default="1,10,100,1000")
    p.add_argument(
        "--epsilons",
        default="0,0.0005,0.001,0.0014,0.002,0.0024,0.005,0.01,0.05,0.1,0.2",
    )
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("toy-suite", help="replicate the built-in toy numbers")
    p.add_argument("--seeds", default=",".join(str(s) for s in DEFAULT_SEEDS))
    p.add_argument("--out", default=None, help="suite JSON path")
    p.set_defaults(func=cmd_toy_suite)

    p = sub.add_parser("finetune", help="train the weighted-pairwise head")
    p.add_argument("--id-train", required=True)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--pairs", type=int, default=50)
    p.add_argument("--lr", type=float, default=0.01)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="head JSON path")
    p.set_defaults(func=cmd_finetune)

    p = sub.add_parser("compare", help="assemble reports into win matrices")
    p.add_argument("--reports", required=True, help="directory of report JSONs")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("ingest-check", help="validate feature files")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_ingest_check)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OodbenchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CODES.get(type(exc), EXIT_UNKNOWN)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
