"""Train a tiny dense ReLU classifier on the bundled handwritten-digit set.

The scikit-learn digits set (8x8 grayscale, 17 intensity levels, ten
classes) stands in for a full-size image benchmark at desk scale. Pixels
are scaled to [0,1]; exact duplicate images are dropped so that any two
distinct same-class images differ by at least 1/16 in the max norm.
Training runs in float64 end to end so the exported weights are exactly
the weights that produced the golden logits.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from sklearn.datasets import load_digits

from .formats import save_dataset_csv, save_logits_csv, save_model_json

MODEL_NAME = "digits_mlp_32x32"


class TrainingFailed(RuntimeError):
    """Accuracy target missed within the epoch budget; nothing is exported."""


@dataclass
class TrainResult:
    model_path: Path
    train_csv: Path
    test_csv: Path
    logits_csv: Path
    metadata_path: Path
    test_accuracy: float
    train_size: int
    test_size: int


def load_digit_data(seed: int):
    """Deduplicated, shuffled, [0,1]-scaled digit images."""
    X, y = load_digits(return_X_y=True)
    X = X.astype(np.float64) / 16.0
    _, keep = np.unique(X, axis=0, return_index=True)
    keep = np.sort(keep)
    X, y = X[keep], y[keep]
    rng = np.random.default_rng(seed)
    order = rng.permutation(X.shape[0])
    return X[order], y[order]


def _build_model(input_dim: int, hidden_dims, output_dim: int) -> torch.nn.Sequential:
    dims = [input_dim, *hidden_dims]
    layers = []
    for a, b in zip(dims, dims[1:]):
        layers += [torch.nn.Linear(a, b, dtype=torch.float64), torch.nn.ReLU()]
    layers.append(torch.nn.Linear(dims[-1], output_dim, dtype=torch.float64))
    return torch.nn.Sequential(*layers)


def train_and_export(
    out_dir,
    subset_size: int = 1000,
    hidden_dims: tuple[int, ...] = (32, 32),
    seed: int = 0,
    epochs: int = 150,
    batch_size: int = 64,
    min_accuracy: float = 0.9,
    n_reference: int = 100,
) -> TrainResult:
    """Train, evaluate, and export the fixture set; fails without exporting
    when the held-out accuracy target is missed."""
    if not hidden_dims:
        raise ValueError("at least one hidden layer is required; a network "
                         "without hidden neurons has no activation patterns to study")
    X, y = load_digit_data(seed)
    if subset_size > X.shape[0] - 1:
        raise ValueError(f"subset_size {subset_size} leaves no test data ({X.shape[0]} samples)")
    X_train, y_train = X[:subset_size], y[:subset_size]
    X_test, y_test = X[subset_size:], y[subset_size:]
    test_cap = min(len(X_test), subset_size)
    X_test, y_test = X_test[:test_cap], y_test[:test_cap]
    n_classes = int(y.max()) + 1

    torch.manual_seed(seed)
    model = _build_model(X.shape[1], tuple(hidden_dims), n_classes)
    opt = torch.optim.Adam(model.parameters(), lr=1e-3)
    loss_fn = torch.nn.CrossEntropyLoss()
    Xt = torch.from_numpy(X_train)
    yt = torch.from_numpy(y_train.astype(np.int64))
    gen = torch.Generator().manual_seed(seed)
    for _ in range(epochs):
        for idx in torch.randperm(Xt.shape[0], generator=gen).split(batch_size):
            opt.zero_grad()
            loss = loss_fn(model(Xt[idx]), yt[idx])
            loss.backward()
            opt.step()

    with torch.no_grad():
        test_logits = model(torch.from_numpy(X_test)).numpy()
    accuracy = float((test_logits.argmax(axis=1) == y_test).mean())
    if accuracy < min_accuracy:
        raise TrainingFailed(
            f"held-out accuracy {accuracy:.3f} below the {min_accuracy:.2f} target "
            f"after {epochs} epochs"
        )

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    linear = [m for m in model if isinstance(m, torch.nn.Linear)]
    layer_specs = [
        (m.weight.detach().numpy(), m.bias.detach().numpy(),
         "relu" if i < len(linear) - 1 else "linear")
        for i, m in enumerate(linear)
    ]
    paths = TrainResult(
        model_path=out_dir / f"{MODEL_NAME}.json",
        train_csv=out_dir / "digits_train.csv",
        test_csv=out_dir / "digits_test.csv",
        logits_csv=out_dir / "digits_reference_logits.csv",
        metadata_path=out_dir / "digits_fixture_metadata.json",
        test_accuracy=accuracy,
        train_size=len(X_train),
        test_size=len(X_test),
    )
    save_model_json(paths.model_path, MODEL_NAME, X.shape[1], layer_specs)
    save_dataset_csv(paths.train_csv, y_train, X_train)
    save_dataset_csv(paths.test_csv, y_test, X_test)
    ref_rows = list(range(min(n_reference, len(X_test))))
    save_logits_csv(paths.logits_csv, ref_rows, test_logits[ref_rows])
    paths.metadata_path.write_text(
        json.dumps(
            {
                "model": MODEL_NAME,
                "dataset": "sklearn load_digits, pixels / 16, exact duplicates dropped",
                "seed": seed,
                "epochs": epochs,
                "batch_size": batch_size,
                "hidden_dims": list(hidden_dims),
                "train_size": paths.train_size,
                "test_size": paths.test_size,
                "test_accuracy": accuracy,
                "torch_version": torch.__version__,
                "regenerate": (
                    f"napfixtures mlp --out-dir <dir> --subset-size {subset_size} "
                    f"--seed {seed} --epochs {epochs}"
                ),
            },
            indent=2,
        )
        + "\n"
    )
    return paths
