"""The hand-built 2-3-2 analog-XOR classifier used across the test suites.

Weights are fixed literals, kept exactly as published with the experiment
they came from, quirks included; regeneration must be byte-stable.
"""

from __future__ import annotations

from .formats import save_model_json

XNET = {
    "name": "xnet",
    "input_dim": 2,
    "hidden": {
        "weights": [[0.1, -0.6], [-4.3, 4.4], [4.2, -4.2]],
        "bias": [0.0, 0.0, 0.0],
    },
    "output": {
        "weights": [[0.4, -4.9, 3.9], [-0.4, 3.9, 4.6]],
        "bias": [6.7, -7.4],
    },
}


def export_xnet(path) -> None:
    save_model_json(
        path,
        XNET["name"],
        XNET["input_dim"],
        [
            (XNET["hidden"]["weights"], XNET["hidden"]["bias"], "relu"),
            (XNET["output"]["weights"], XNET["output"]["bias"], "linear"),
        ],
    )
