"""Command line entry: regenerate the committed fixture files."""

from __future__ import annotations

import argparse
import sys

from .train import TrainingFailed, train_and_export
from .xnet import export_xnet


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="napfixtures", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("xnet", help="write the hand-built analog-XOR network")
    p.add_argument("--out", required=True)

    p = sub.add_parser("mlp", help="train and export the digit-classifier fixture set")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--subset-size", type=int, default=1000)
    p.add_argument("--hidden", default="32,32", help="comma-separated hidden widths")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epochs", type=int, default=150)

    args = parser.parse_args(argv)
    if args.command == "xnet":
        export_xnet(args.out)
        return 0
    hidden = tuple(int(v) for v in args.hidden.split(",") if v)
    try:
        result = train_and_export(
            args.out_dir,
            subset_size=args.subset_size,
            hidden_dims=hidden,
            seed=args.seed,
            epochs=args.epochs,
        )
    except TrainingFailed as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    print(
        f"exported {result.model_path.name}: accuracy {result.test_accuracy:.3f} "
        f"on {result.test_size} held-out samples"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
