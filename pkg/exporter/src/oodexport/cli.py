"""oodexport command line.

  train   fit the small classifier on a labeled synthetic split and save
          a checkpoint
  export  load a checkpoint, extract embeddings/logits for the three
          splits, and write .oodf files (plus tagged variants per
          preprocessing grid entry)

Splits are described as 'kind,seed=S,n=N' (kinds: blobs, stripes) and grid
entries as 'odin,T=<T>,eps=<eps>' or 'maha,eps=<eps>'. Exit codes: 2 for
argparse errors, 3 for I/O failures, 4 for bad values, 5 for
checkpoint/dataset resolution or header-consistency failures.
"""

import argparse
import sys

from . import __version__
from .data import DatasetError, make_split, parse_split
from .job import export, job_from_args
from .net import (
    CheckpointError,
    DEFAULT_EPOCHS,
    DEFAULT_LR,
    save_checkpoint,
    train_net,
)
from .writer import HeaderConsistencyError

EXIT_IO = 3
EXIT_USAGE = 4
EXIT_RESOLUTION = 5


def cmd_train(args):
    spec = parse_split(args.split)
    if not spec.labeled:
        raise DatasetError("training needs a labeled dataset kind")
    images, labels = make_split(spec)
    net, losses = train_net(images, labels, epochs=args.epochs, lr=args.lr,
                            seed=args.seed)
    accuracy = float((net(images).argmax(dim=1) == labels).float().mean())
    save_checkpoint(net, args.out)
    print(f"trained on {spec.kind} (n={spec.n}): loss "
          f"{losses[0]:.4f} -> {losses[-1]:.4f}, train accuracy "
          f"{accuracy:.3f}")
    print(f"wrote {args.out}")
    return 0


def cmd_export(args):
    job = job_from_args(args.checkpoint, args.id_train, args.id_test,
                        args.ood_test, args.out, args.grid or [])
    written, skipped = export(job)
    for path in written:
        print(f"wrote {path}")
    for entry in skipped:
        print(f"skipped {entry.method} eps=0 entry: identical to the "
              f"untagged export")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oodexport",
        description="extract classifier features into .oodf files",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train the small classifier")
    p.add_argument("--split", default="blobs,seed=0,n=64",
                   help="labeled split descriptor")
    p.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS)
    p.add_argument("--lr", type=float, default=DEFAULT_LR)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="checkpoint path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("export", help="write .oodf feature files")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--id-train", required=True, help="split descriptor")
    p.add_argument("--id-test", required=True, help="split descriptor")
    p.add_argument("--ood-test", required=True, help="split descriptor")
    p.add_argument("--grid", action="append",
                   help="preprocessing entry, e.g. odin,T=1000,eps=0.0014; "
                        "repeatable")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CheckpointError, DatasetError, HeaderConsistencyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOLUTION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
