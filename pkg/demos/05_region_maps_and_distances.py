"""
Region maps, distance distributions, overlap tables
===================================================

Three data products that make pattern specifications inspectable:

- a 2D map of linear regions (one activation signature per region) next to
  the prediction map, exported as CSV for plotting;
- same-label pairwise distance statistics, which show why fixed-radius
  balls cover so little: real same-class inputs sit far apart;
- the support overlap between different labels' mined patterns.

Run: python demos/05_region_maps_and_distances.py
"""

import io
from collections import Counter
from pathlib import Path

from napverify import Nap, load_dataset, load_network, mine
from napverify.analysis import linear_region_map, overlap_table, pairwise_distances

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"
OUT = Path(__file__).resolve().parent / "out"


def region_map():
    net = load_network(FIXTURES / "xnet.json")
    grid = linear_region_map(net, ((0.0, 1.0), (0.0, 1.0)), resolution=120)
    print(f"Sampled the unit square at 120x120 cell centers:")
    print(f"  distinct signatures found: {grid.distinct_signatures} "
          f"(bound: 2^{net.hidden_neuron_count} = {2 ** net.hidden_neuron_count})")
    counts = Counter(grid.signature_ids.flatten().tolist())
    for sid, n in counts.most_common():
        sig = "".join("+" if s else "-" for s in grid.signatures[sid])
        labels = Counter(
            grid.labels[grid.signature_ids == sid].tolist()
        )
        print(f"  signature ({sig}): {n:>5} cells, predictions {dict(labels)}")
    OUT.mkdir(exist_ok=True)
    with open(OUT / "xnet_region_map.csv", "w", newline="") as fh:
        grid.to_csv(fh)
    print(f"  full grid written to {OUT / 'xnet_region_map.csv'}")


def distance_distributions():
    test = load_dataset(FIXTURES / "digits_test.csv", expect_dim=64)
    print("\nSame-label pairwise distances on the held-out digit images:")
    print("  label   min Linf   mean Linf    min L2     mean L2")
    linf, _ = pairwise_distances(test, norm="linf")
    l2, _ = pairwise_distances(test, norm="l2")
    for a, b in zip(linf, l2):
        print(f"  {a.label:>5}   {a.min:8.4f}   {a.mean:9.4f}   {b.min:7.4f}   {b.mean:9.4f}")
    floor = min(s.min for s in linf)
    print(f"  smallest same-label max-norm gap anywhere: {floor:.4f}")
    print("  A ball certification radius would have to stay below half that")
    print("  gap, yet typical distances are an order of magnitude larger.")


def overlap():
    net = load_network(FIXTURES / "digits_mlp_32x32.json")
    train = load_dataset(FIXTURES / "digits_train.csv", expect_dim=64)
    by_label = {}
    for label, x in train:
        by_label.setdefault(label, []).append(x)
    naps = {}
    for label in sorted(by_label):
        r = mine(net, by_label[label], 0.95)
        naps[label] = Nap(r.nap.activated, r.nap.deactivated, label=label, delta=0.95)
    table = overlap_table(naps)
    print("\nSupport overlap between mined patterns (delta=0.95),")
    print("fraction of the column pattern's neurons shared with each row:")
    print("  worst off-diagonal overlap per label:")
    for label, v in zip(table.labels, table.column_max):
        print(f"    label {label}: {v:.3f}")
    buf = io.StringIO()
    table.to_csv(buf)
    (OUT / "digit_pattern_overlap.csv").write_text(buf.getvalue())
    print(f"  full matrix written to {OUT / 'digit_pattern_overlap.csv'}")


def main():
    print("=" * 64)
    print("Inspecting patterns as data")
    print("=" * 64)
    region_map()
    distance_distributions()
    overlap()


if __name__ == "__main__":
    main()
