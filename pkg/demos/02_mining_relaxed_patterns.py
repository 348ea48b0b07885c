"""
Mining relaxed patterns from data
=================================

A pattern mined at relaxation level delta keeps a neuron only when at
least a delta fraction of the samples agree on its state. delta = 1.0
demands unanimity (the most abstract pattern every sample follows);
lowering delta admits more neurons and makes the pattern more specific,
trading recall for precision.

This demo mines patterns for the committed digit classifier at several
delta levels and reproduces the follower-count trade-off table, then
shows the same mechanics on a four-point toy set.

Run: python demos/02_mining_relaxed_patterns.py
"""

from pathlib import Path

from napverify import Nap, load_dataset, load_network, mine, nap_stats, subsumes

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def toy_example():
    net = load_network(FIXTURES / "xnet.json")
    # three inputs share a signature, the fourth is an outlier
    samples = [[0.1, 0.9], [0.05, 0.8], [0.2, 0.75], [0.9, 0.1]]
    print("Toy set: three high-x1 inputs plus one outlier from the other corner")
    for delta in (1.0, 0.9, 0.75):
        report = mine(net, samples, delta)
        nap = report.nap
        print(f"  delta={delta}: activated {sorted(nap.activated)}, "
              f"deactivated {sorted(nap.deactivated)}, "
              f"frequencies {report.frequencies.round(2).tolist()}, "
              f"followers {report.follower_count}/{report.sample_count}")
    print("  unanimity (delta=1.0) over a split sample set yields the trivial")
    print("  pattern; delta=0.75 tolerates the outlier and recovers the majority one.")


def digit_classifier_table():
    net = load_network(FIXTURES / "digits_mlp_32x32.json")
    train = load_dataset(FIXTURES / "digits_train.csv", expect_dim=64)
    test = load_dataset(FIXTURES / "digits_test.csv", expect_dim=64)
    by_label = {}
    for label, x in train:
        by_label.setdefault(label, []).append(x)

    print("\nFollower counts on the held-out digit set "
          "(same-label / other-label followers per class):")
    header = "  delta " + "".join(f"{l:>10}" for l in sorted(by_label))
    print(header)
    previous = None
    for delta in (1.0, 0.99, 0.95, 0.90):
        naps = {}
        for label in sorted(by_label):
            r = mine(net, by_label[label], delta)
            naps[label] = Nap(r.nap.activated, r.nap.deactivated, label=label, delta=delta)
        rows = {r.label: r for r in nap_stats(net, test, naps)}
        cells = "".join(
            f"{rows[l].followers_same:>6}/{rows[l].followers_other:<3}" for l in sorted(by_label)
        )
        print(f"  {delta:<5} {cells}")
        if previous is not None:
            nested = all(subsumes(naps[l], previous[l]) for l in naps)
            print(f"        (patterns strictly refine the row above: {nested})")
        previous = naps
    print("\nBoth counts fall as delta drops: more constrained patterns are")
    print("harder to follow, for the right class and for impostors alike.")


def main():
    print("=" * 64)
    print("Pattern mining at different relaxation levels")
    print("=" * 64)
    toy_example()
    digit_classifier_table()


if __name__ == "__main__":
    main()
