"""Fixture pipeline checks: training quality, format validity, golden-logit
agreement with the verifier package, and byte-stability of the static net.

The verifier (napverify) appears here only as the consumer-side oracle of
the exported files; the generator itself never imports it.
"""

import csv
import json
from pathlib import Path

import numpy as np
import pytest

from napfixtures.train import TrainingFailed, load_digit_data, train_and_export
from napfixtures.xnet import export_xnet

REPO_FIXTURES = Path(__file__).resolve().parents[2] / "tests" / "fixtures"


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    out = tmp_path_factory.mktemp("regen")
    return train_and_export(out, subset_size=1000, hidden_dims=(32, 32), seed=0)


class TestTraining:
    def test_accuracy_target(self, pipeline):
        assert pipeline.test_accuracy >= 0.90

    def test_rejects_no_hidden_layers(self, tmp_path):
        with pytest.raises(ValueError):
            train_and_export(tmp_path, hidden_dims=())

    def test_unreachable_accuracy_exports_nothing(self, tmp_path):
        with pytest.raises(TrainingFailed):
            train_and_export(tmp_path / "fail", epochs=0, min_accuracy=0.9)
        assert not (tmp_path / "fail" / "digits_train.csv").exists()

    def test_data_is_deduplicated_and_scaled(self):
        X, y = load_digit_data(seed=0)
        assert X.min() >= 0.0 and X.max() <= 1.0
        assert np.unique(X, axis=0).shape[0] == X.shape[0]


class TestExportedFormats:
    def test_model_loads_and_validates_in_verifier(self, pipeline):
        from napverify import load_network

        net = load_network(pipeline.model_path)
        assert net.input_dim == 64
        assert net.hidden_layer_sizes == (32, 32)
        assert net.output_dim == 10
        assert all(l.activation == "relu" for l in net.layers[:-1])
        assert net.layers[-1].activation == "linear"

    def test_datasets_load_in_verifier_and_stay_in_range(self, pipeline):
        from napverify import load_dataset

        train = load_dataset(pipeline.train_csv, expect_dim=64)
        test = load_dataset(pipeline.test_csv, expect_dim=64)
        assert len(train) == pipeline.train_size
        assert len(test) == pipeline.test_size
        for _, x in train[:50]:
            assert np.all((0.0 <= x) & (x <= 1.0))

    def test_verifier_forward_matches_golden_logits(self, pipeline):
        from napverify import load_dataset, load_network

        net = load_network(pipeline.model_path)
        test = load_dataset(pipeline.test_csv, expect_dim=64)
        with open(pipeline.logits_csv) as fh:
            reader = csv.reader(fh)
            header = next(reader)
            assert header[0] == "row"
            count = 0
            for row in reader:
                idx = int(row[0])
                want = np.array([float(v) for v in row[1:]])
                got = net.forward(test[idx][1])
                assert np.max(np.abs(got - want)) < 1e-4
                count += 1
        assert count == 100

    def test_metadata_records_the_recipe(self, pipeline):
        meta = json.loads(pipeline.metadata_path.read_text())
        assert meta["seed"] == 0 and meta["hidden_dims"] == [32, 32]
        assert meta["test_accuracy"] >= 0.90
        assert "regenerate" in meta


class TestStaticFixtures:
    def test_xnet_regeneration_is_byte_stable(self, tmp_path):
        out = tmp_path / "xnet.json"
        export_xnet(out)
        committed = (REPO_FIXTURES / "xnet.json").read_bytes()
        assert out.read_bytes() == committed

    def test_committed_mlp_matches_regeneration(self, pipeline):
        committed = (REPO_FIXTURES / pipeline.model_path.name).read_bytes()
        assert pipeline.model_path.read_bytes() == committed
