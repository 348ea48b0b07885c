"""Command-line front end.

Every command reads the documented file formats (model JSON, pattern JSON,
dataset CSV) and prints a machine-readable result: verification commands
emit one JSON verdict record on stdout and, with --out, a per-target CSV
table; mining emits a pattern file; the analysis commands emit CSV.

Exit codes: 0 verified/success, 1 falsified/ambiguous, 2 unknown/timeout,
3 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    NORMS,
    distance_histogram_to_csv,
    distance_summary_to_csv,
    linear_region_map,
    overlap_table,
    pairwise_distances,
)
from .datasets import load_dataset
from .model import load_network
from .nap import load_nap, mine, nap_stats, nap_to_dict, save_nap, stats_to_csv, follows
from .properties import (
    AMBIGUOUS,
    aggregate_status,
    check_non_ambiguity,
    outcomes_to_csv,
    verify_augmented_robustness,
    verify_nap_robustness,
    verify_plain_robustness,
)
from .verify import FALSIFIED, UNKNOWN, VERIFIED, SearchConfig, SearchStats

EXIT_VERIFIED = 0
EXIT_FALSIFIED = 1
EXIT_UNKNOWN = 2
EXIT_USAGE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we reserve that
        raise UsageError(message)


def _parse_center(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")], dtype=np.float64)
    except ValueError:
        raise UsageError(f"--center expects comma-separated numbers, got {text!r}")


def _parse_targets(text: str, label: int, n_outputs: int):
    if text == "all":
        return None
    if text == "next":
        return [(label + 1) % n_outputs]
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"--targets expects 'all', 'next' or a comma list, got {text!r}")


def _add_search_flags(p: _Parser) -> None:
    p.add_argument("--domain-lo", type=float, default=0.0)
    p.add_argument("--domain-hi", type=float, default=1.0)
    p.add_argument("--timeout-s", type=int, default=600)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)


def _search_config(args) -> SearchConfig:
    return SearchConfig(timeout_s=float(args.timeout_s), workers=args.workers, seed=args.seed)


def _out_stream(args):
    if args.out:
        return open(args.out, "w", newline="")
    return None


def build_parser() -> _Parser:
    parser = _Parser(prog="napverify", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)

    class _Sub:
        def add_parser(self, name, **kwargs):
            p = subparsers.add_parser(name, **kwargs)
            p.add_argument("--version", action="version",
                           version=f"napverify {__version__}")
            return p

    sub = _Sub()

    p = sub.add_parser("mine", help="mine a relaxed activation pattern from a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--label", type=int, default=None,
                   help="restrict mining to samples of this label")
    p.add_argument("--no-clip-check", action="store_true")
    p.add_argument("--out", default=None)

    p = sub.add_parser("follows", help="does an input (or a dataset) follow a pattern?")
    p.add_argument("--model", required=True)
    p.add_argument("--nap", required=True)
    p.add_argument("--center", default=None)
    p.add_argument("--dataset", default=None)
    p.add_argument("--no-clip-check", action="store_true")
    p.add_argument("--out", default=None)

    p = sub.add_parser("stats", help="follower counts of labeled patterns over a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--nap", action="append", required=True)
    p.add_argument("--no-clip-check", action="store_true")
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify-robust", help="ball robustness around a center input")
    p.add_argument("--model", required=True)
    p.add_argument("--center", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--targets", default="all")
    p.add_argument("--out", default=None)
    _add_search_flags(p)

    p = sub.add_parser("verify-nap-robust", help="robustness of a pattern's whole region")
    p.add_argument("--model", required=True)
    p.add_argument("--nap", required=True)
    p.add_argument("--label", type=int, required=True)
    p.add_argument("--targets", default="all")
    p.add_argument("--out", default=None)
    _add_search_flags(p)

    p = sub.add_parser("verify-augmented", help="ball robustness narrowed to pattern followers")
    p.add_argument("--model", required=True)
    p.add_argument("--center", required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--nap", required=True)
    p.add_argument("--label", type=int, default=None,
                   help="assert that the center is predicted as this label")
    p.add_argument("--targets", default="all")
    p.add_argument("--out", default=None)
    _add_search_flags(p)

    p = sub.add_parser("check-ambiguity", help="can one input follow two labeled patterns?")
    p.add_argument("--model", required=True)
    p.add_argument("--nap", action="append", required=True,
                   help="pattern file; give exactly twice")
    p.add_argument("--out", default=None)
    _add_search_flags(p)

    p = sub.add_parser("distances", help="same-label pairwise distance statistics")
    p.add_argument("--dataset", required=True)
    p.add_argument("--norm", choices=list(NORMS) + ["all"], default="all")
    p.add_argument("--bins", type=int, default=100)
    p.add_argument("--max-samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--no-clip-check", action="store_true")
    p.add_argument("--out", default=None)

    p = sub.add_parser("regions", help="linear-region / prediction map of a 2D network")
    p.add_argument("--model", required=True)
    p.add_argument("--resolution", type=int, default=200)
    p.add_argument("--domain-lo", type=float, default=0.0)
    p.add_argument("--domain-hi", type=float, default=1.0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("overlap", help="support overlap ratios between patterns")
    p.add_argument("--nap", action="append", required=True)
    p.add_argument("--match-polarity", action="store_true")
    p.add_argument("--out", default=None)
    return parser


# -- command bodies ------------------------------------------------------


def _emit_record(record: dict) -> None:
    print(json.dumps(record))


def _exit_for_status(status: str) -> int:
    if status in (VERIFIED,):
        return EXIT_VERIFIED
    if status in (FALSIFIED, AMBIGUOUS):
        return EXIT_FALSIFIED
    if status == UNKNOWN:
        return EXIT_UNKNOWN
    return EXIT_VERIFIED  # non-ambiguous-* and boundary-only prove the property


def _aggregate_record(outcomes) -> dict:
    status = aggregate_status(outcomes)
    witness = None
    boundary = False
    stats = SearchStats()
    for o in outcomes.values():
        stats.merge(o.stats)
        stats.time_ms += o.stats.time_ms
        boundary = boundary or o.boundary
        if witness is None and o.falsified:
            witness = o.witness
    record = {
        "outcome": status,
        "witness": None if witness is None else [float(v) for v in witness],
        "boundary": boundary,
        "stats": stats.to_dict(),
        "targets": {str(j): o.to_record() for j, o in outcomes.items()},
    }
    return record


def _run_verify_family(args, outcomes) -> int:
    out = _out_stream(args)
    if out is not None:
        with out:
            outcomes_to_csv(outcomes, out)
    record = _aggregate_record(outcomes)
    _emit_record(record)
    return _exit_for_status(record["outcome"])


def _cmd_mine(args) -> int:
    net = load_network(args.model)
    rows = load_dataset(args.dataset, expect_dim=net.input_dim,
                        check_range=not args.no_clip_check)
    if args.label is not None:
        rows = [(l, x) for l, x in rows if l == args.label]
        if not rows:
            raise UsageError(f"dataset has no samples with label {args.label}")
    report = mine(net, [x for _, x in rows], args.delta)
    nap = report.nap
    if args.label is not None:
        nap = replace(nap, label=args.label)
    if args.out:
        save_nap(nap, args.out)
    else:
        print(json.dumps(nap_to_dict(nap)))
    print(
        json.dumps(
            {
                "samples": report.sample_count,
                "followers": report.follower_count,
                "activated": len(nap.activated),
                "deactivated": len(nap.deactivated),
            }
        ),
        file=sys.stderr,
    )
    return EXIT_VERIFIED


def _cmd_follows(args) -> int:
    net = load_network(args.model)
    nap = load_nap(args.nap)
    if (args.center is None) == (args.dataset is None):
        raise UsageError("follows needs exactly one of --center or --dataset")
    if args.center is not None:
        x = _parse_center(args.center)
        result = follows(net, x, nap)
        _emit_record({"follows": bool(result)})
        return EXIT_VERIFIED if result else EXIT_FALSIFIED
    rows = load_dataset(args.dataset, expect_dim=net.input_dim,
                        check_range=not args.no_clip_check)
    out = _out_stream(args)
    stream = out if out is not None else sys.stdout
    try:
        import csv as _csv

        writer = _csv.writer(stream)
        writer.writerow(["index", "label", "follows"])
        for i, (label, x) in enumerate(rows):
            writer.writerow([i, label, int(follows(net, x, nap))])
    finally:
        if out is not None:
            out.close()
    return EXIT_VERIFIED


def _cmd_stats(args) -> int:
    net = load_network(args.model)
    rows = load_dataset(args.dataset, expect_dim=net.input_dim,
                        check_range=not args.no_clip_check)
    naps = {}
    for path in args.nap:
        nap = load_nap(path)
        if nap.label is None:
            raise UsageError(f"pattern file {path} carries no label")
        if nap.label in naps:
            raise UsageError(f"duplicate pattern for label {nap.label}")
        naps[nap.label] = nap
    table = nap_stats(net, rows, naps)
    out = _out_stream(args)
    stream = out if out is not None else sys.stdout
    try:
        stats_to_csv(table, stream)
    finally:
        if out is not None:
            out.close()
    return EXIT_VERIFIED


def _cmd_verify_robust(args) -> int:
    net = load_network(args.model)
    x = _parse_center(args.center)
    label = net.predict(x)
    targets = _parse_targets(args.targets, label, net.output_dim)
    outcomes = verify_plain_robustness(
        net, x, args.epsilon, targets, _search_config(args),
        domain=(args.domain_lo, args.domain_hi),
    )
    return _run_verify_family(args, outcomes)


def _cmd_verify_nap_robust(args) -> int:
    net = load_network(args.model)
    nap = load_nap(args.nap)
    targets = _parse_targets(args.targets, args.label, net.output_dim)
    outcomes = verify_nap_robustness(
        net, nap, args.label, targets, _search_config(args),
        domain=(args.domain_lo, args.domain_hi),
    )
    return _run_verify_family(args, outcomes)


def _cmd_verify_augmented(args) -> int:
    net = load_network(args.model)
    x = _parse_center(args.center)
    nap = load_nap(args.nap)
    label = net.predict(x)
    if args.label is not None and args.label != label:
        raise UsageError(
            f"center is predicted as {label}, not the asserted label {args.label}"
        )
    targets = _parse_targets(args.targets, label, net.output_dim)
    outcomes = verify_augmented_robustness(
        net, x, args.epsilon, nap, targets, _search_config(args),
        domain=(args.domain_lo, args.domain_hi),
    )
    return _run_verify_family(args, outcomes)


def _cmd_check_ambiguity(args) -> int:
    net = load_network(args.model)
    if len(args.nap) != 2:
        raise UsageError("check-ambiguity needs exactly two --nap files")
    nap_a = load_nap(args.nap[0])
    nap_b = load_nap(args.nap[1])
    result = check_non_ambiguity(
        net, nap_a, nap_b, domain=(args.domain_lo, args.domain_hi),
        config=_search_config(args),
    )
    record = result.to_record()
    if args.out:
        Path(args.out).write_text(json.dumps(record, indent=2) + "\n")
    _emit_record(record)
    return _exit_for_status(record["outcome"])


def _cmd_distances(args) -> int:
    rows = load_dataset(args.dataset, check_range=not args.no_clip_check)
    norms = list(NORMS) if args.norm == "all" else [args.norm]
    all_stats = []
    notices = []
    for norm in norms:
        stats, notes = pairwise_distances(
            rows, norm=norm, bins=args.bins,
            max_samples_per_label=args.max_samples, seed=args.seed,
        )
        all_stats.extend(stats)
        notices.extend(notes)
    for note in notices:
        print(note, file=sys.stderr)
    out = _out_stream(args)
    stream = out if out is not None else sys.stdout
    try:
        distance_summary_to_csv(all_stats, stream)
    finally:
        if out is not None:
            out.close()
    if args.out:
        for norm in norms:
            hist_path = Path(args.out).with_suffix(f".hist.{norm}.csv")
            with open(hist_path, "w", newline="") as fh:
                distance_histogram_to_csv([s for s in all_stats if s.norm == norm], fh)
    return EXIT_VERIFIED


def _cmd_regions(args) -> int:
    net = load_network(args.model)
    box = ((args.domain_lo, args.domain_hi), (args.domain_lo, args.domain_hi))
    grid = linear_region_map(net, box, args.resolution)
    out = _out_stream(args)
    stream = out if out is not None else sys.stdout
    try:
        grid.to_csv(stream)
    finally:
        if out is not None:
            out.close()
    return EXIT_VERIFIED


def _cmd_overlap(args) -> int:
    naps = {}
    for path in args.nap:
        nap = load_nap(path)
        if nap.label is None:
            raise UsageError(f"pattern file {path} carries no label")
        if nap.label in naps:
            raise UsageError(f"duplicate pattern for label {nap.label}")
        naps[nap.label] = nap
    table = overlap_table(naps, match_polarity=args.match_polarity)
    out = _out_stream(args)
    stream = out if out is not None else sys.stdout
    try:
        table.to_csv(stream)
    finally:
        if out is not None:
            out.close()
    return EXIT_VERIFIED


_COMMANDS = {
    "mine": _cmd_mine,
    "follows": _cmd_follows,
    "stats": _cmd_stats,
    "verify-robust": _cmd_verify_robust,
    "verify-nap-robust": _cmd_verify_nap_robust,
    "verify-augmented": _cmd_verify_augmented,
    "check-ambiguity": _cmd_check_ambiguity,
    "distances": _cmd_distances,
    "regions": _cmd_regions,
    "overlap": _cmd_overlap,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
