"""Coherence of the committed fixture files (no training dependencies here).

The digit-classifier fixture set is generated by the fixtures/ package and
checked in; these tests pin the cross-implementation contract: the model
parses, the datasets are in range, and our forward pass reproduces the
training framework's golden logits.
"""

import csv
import json

import numpy as np

from napverify import load_dataset, load_network


def test_model_file_is_valid(fixtures_dir):
    net = load_network(fixtures_dir / "digits_mlp_32x32.json")
    assert net.input_dim == 64
    assert net.hidden_layer_sizes == (32, 32)
    assert net.output_dim == 10


def test_datasets_match_metadata(fixtures_dir):
    meta = json.loads((fixtures_dir / "digits_fixture_metadata.json").read_text())
    train = load_dataset(fixtures_dir / "digits_train.csv", expect_dim=64)
    test = load_dataset(fixtures_dir / "digits_test.csv", expect_dim=64)
    assert len(train) == meta["train_size"]
    assert len(test) == meta["test_size"]
    labels = {l for l, _ in test}
    assert labels == set(range(10))


def test_golden_logits_agree_within_1e4(fixtures_dir):
    net = load_network(fixtures_dir / "digits_mlp_32x32.json")
    test = load_dataset(fixtures_dir / "digits_test.csv", expect_dim=64)
    with open(fixtures_dir / "digits_reference_logits.csv") as fh:
        reader = csv.reader(fh)
        next(reader)
        rows = list(reader)
    assert len(rows) == 100
    for row in rows:
        idx = int(row[0])
        want = np.array([float(v) for v in row[1:]])
        got = net.forward(test[idx][1])
        assert np.max(np.abs(got - want)) < 1e-4


def test_fixture_accuracy_still_holds(fixtures_dir):
    net = load_network(fixtures_dir / "digits_mlp_32x32.json")
    test = load_dataset(fixtures_dir / "digits_test.csv", expect_dim=64)
    hits = sum(1 for label, x in test if net.predict(x) == label)
    assert hits / len(test) >= 0.90
