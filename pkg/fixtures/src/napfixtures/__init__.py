"""Fixture generation for the activation-pattern verifier.

Produces committed test artifacts in the verifier's documented file
formats: the hand-built analog-XOR network, plus a small trained MLP with
datasets and golden logits. This package never imports the verifier; the
files are the only contract.
"""

__version__ = "0.1.0"

from .formats import save_model_json, save_dataset_csv, save_logits_csv
from .xnet import XNET, export_xnet
from .train import TrainResult, train_and_export
