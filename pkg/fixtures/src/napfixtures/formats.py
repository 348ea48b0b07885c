"""Writers for the verifier's file formats.

Deliberately self-contained re-implementations of the documented schemas
(model JSON, dataset CSV, logits CSV); the verifier's loaders are the
other side of the contract and live in the other package.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


def model_dict(name: str, input_dim: int, layers) -> dict:
    """layers: sequence of (weights 2d, bias 1d, activation str)."""
    return {
        "name": name,
        "input_dim": int(input_dim),
        "layers": [
            {
                "weights": [[float(v) for v in row] for row in np.asarray(w)],
                "bias": [float(v) for v in np.asarray(b)],
                "activation": act,
            }
            for w, b, act in layers
        ],
    }


def save_model_json(path, name, input_dim, layers) -> None:
    # json writes float repr, which round-trips binary64 exactly
    Path(path).write_text(json.dumps(model_dict(name, input_dim, layers), indent=2) + "\n")


def save_dataset_csv(path, labels, X) -> None:
    X = np.asarray(X, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"] + [f"x{i}" for i in range(X.shape[1])])
        for label, row in zip(labels, X):
            writer.writerow([int(label)] + [repr(float(v)) for v in row])


def save_logits_csv(path, rows, logits) -> None:
    """rows: indices into the test dataset CSV; logits: (n, out_dim)."""
    logits = np.asarray(logits, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row"] + [f"logit{j}" for j in range(logits.shape[1])])
        for r, vec in zip(rows, logits):
            writer.writerow([int(r)] + [repr(float(v)) for v in vec])
