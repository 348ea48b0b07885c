import io
import itertools

import numpy as np
import pytest

from napverify.analysis import (
    L1,
    L2,
    LINF,
    distance_histogram_to_csv,
    distance_summary_to_csv,
    linear_region_map,
    overlap_table,
    pairwise_distances,
)
from napverify.nap import Nap


class TestPairwiseDistances:
    def test_three_four_five(self):
        data = [(0, [0.0, 0.0]), (0, [0.3, 0.4])]
        for norm, want in ((L1, 0.7), (L2, 0.5), (LINF, 0.4)):
            stats, _ = pairwise_distances(data, norm=norm)
            s = stats[0]
            assert s.min == pytest.approx(want) and s.max == pytest.approx(want)
            assert s.mean == pytest.approx(want) and s.pair_count == 1

    def test_duplicates_give_zero_min(self):
        data = [(0, [0.2, 0.2]), (0, [0.2, 0.2]), (0, [0.5, 0.9])]
        stats, _ = pairwise_distances(data, norm=LINF)
        assert stats[0].min == 0.0 and stats[0].pair_count == 3

    def test_small_labels_skipped_with_notice(self):
        data = [(0, [0.1]), (1, [0.2]), (1, [0.4])]
        stats, notices = pairwise_distances(data, norm=L1)
        assert [s.label for s in stats] == [1]
        assert any("label 0" in n for n in notices)

    def test_matches_brute_force_double_loop(self):
        rng = np.random.default_rng(6)
        data = [(int(rng.integers(0, 3)), rng.uniform(0, 1, 5)) for _ in range(120)]
        for norm in (L1, L2, LINF):
            stats, _ = pairwise_distances(data, norm=norm)
            for s in stats:
                vecs = [np.asarray(x) for l, x in data if l == s.label]
                dists = []
                for i, j in itertools.combinations(range(len(vecs)), 2):
                    diff = np.abs(vecs[i] - vecs[j])
                    dists.append(
                        diff.sum() if norm == L1 else np.sqrt((diff ** 2).sum()) if norm == L2 else diff.max()
                    )
                assert s.pair_count == len(dists)
                assert s.min == pytest.approx(min(dists))
                assert s.max == pytest.approx(max(dists))
                assert s.mean == pytest.approx(float(np.mean(dists)))
                assert int(s.bin_counts.sum()) == len(dists)

    def test_norm_ordering_every_pair(self):
        rng = np.random.default_rng(60)
        X = rng.uniform(0, 1, size=(40, 8))
        for i, j in itertools.combinations(range(40), 2):
            diff = np.abs(X[i] - X[j])
            linf, l2, l1 = diff.max(), np.sqrt((diff ** 2).sum()), diff.sum()
            assert linf <= l2 + 1e-12 and l2 <= l1 + 1e-12

    def test_subsampling_is_deterministic(self):
        rng = np.random.default_rng(8)
        data = [(0, rng.uniform(0, 1, 3)) for _ in range(50)]
        a, _ = pairwise_distances(data, norm=LINF, max_samples_per_label=20, seed=4)
        b, _ = pairwise_distances(data, norm=LINF, max_samples_per_label=20, seed=4)
        assert a[0].mean == b[0].mean and a[0].sample_count == 20

    def test_csv_layouts(self):
        data = [(0, [0.0, 0.0]), (0, [0.3, 0.4])]
        stats, _ = pairwise_distances(data, norm=LINF, bins=4)
        buf = io.StringIO()
        distance_summary_to_csv(stats, buf)
        assert buf.getvalue().splitlines()[0] == "label,norm,min,max,mean"
        buf = io.StringIO()
        distance_histogram_to_csv(stats, buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "label,bin_lo,bin_hi,count"
        assert len(lines) == 1 + 4


class TestLinearRegionMap:
    def test_center_cell_signature(self, xnet):
        grid = linear_region_map(xnet, ((0.0, 1.0), (0.0, 1.0)), resolution=10)
        # the cell containing (0.06, 0.06) is centered at (0.05, 0.05)
        sid = grid.signature_ids[0, 0]
        assert grid.signatures[sid] == (False, True, False)

    def test_distinct_signature_bound(self, xnet):
        grid = linear_region_map(xnet, resolution=50)
        assert grid.distinct_signatures <= 2 ** xnet.hidden_neuron_count

    def test_two_by_two_emits_four_rows(self, xnet):
        grid = linear_region_map(xnet, resolution=2)
        buf = io.StringIO()
        grid.to_csv(buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "x0,x1,signature_id,label"
        assert len(lines) == 1 + 4

    def test_labels_match_predict(self, xnet):
        grid = linear_region_map(xnet, resolution=9)
        for i, x0 in enumerate(grid.xs):
            for j, x1 in enumerate(grid.ys):
                assert grid.labels[i, j] == xnet.predict([x0, x1])

    def test_requires_two_inputs(self, identity_net):
        with pytest.raises(ValueError):
            linear_region_map(identity_net)

    def test_requires_resolution_two(self, xnet):
        with pytest.raises(ValueError):
            linear_region_map(xnet, resolution=1)


class TestOverlapTable:
    def test_identical_patterns(self):
        a = Nap(frozenset({0, 1}), frozenset({2}), label=0)
        b = Nap(frozenset({0, 1}), frozenset({2}), label=1)
        table = overlap_table({0: a, 1: b})
        assert table.matrix[0, 1] == 1.0 and table.matrix[1, 0] == 1.0
        assert table.column_max.tolist() == [1.0, 1.0]

    def test_disjoint_supports(self):
        a = Nap(frozenset({0}), frozenset(), label=0)
        b = Nap(frozenset(), frozenset({1}), label=1)
        table = overlap_table({0: a, 1: b})
        assert table.matrix[0, 1] == 0.0 and table.column_max.tolist() == [0.0, 0.0]

    def test_column_denominator_convention(self):
        # column pattern has 4 neurons, row pattern shares 2 of them
        col = Nap(frozenset({0, 1}), frozenset({2, 3}), label=0)
        row = Nap(frozenset({1, 5}), frozenset({2}), label=1)
        table = overlap_table({0: col, 1: row})
        assert table.matrix[1, 0] == pytest.approx(2 / 4)  # row=1, col=0
        assert table.matrix[0, 1] == pytest.approx(2 / 3)  # row=0, col=1

    def test_trivial_pattern_rejected(self):
        with pytest.raises(ValueError):
            overlap_table({0: Nap(frozenset(), frozenset(), label=0),
                           1: Nap(frozenset({1}), frozenset(), label=1)})

    def test_needs_two(self):
        with pytest.raises(ValueError):
            overlap_table({0: Nap(frozenset({1}), frozenset(), label=0)})

    def test_csv_layout(self):
        a = Nap(frozenset({0, 1}), frozenset({2}), label=0)
        b = Nap(frozenset({1}), frozenset({3}), label=1)
        table = overlap_table({0: a, 1: b})
        buf = io.StringIO()
        table.to_csv(buf)
        lines = buf.getvalue().strip().splitlines()
        assert lines[0] == "label,0,1"
        assert lines[-1].startswith("max_other,")
