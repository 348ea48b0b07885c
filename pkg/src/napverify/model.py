"""Feed-forward ReLU networks: loading, validation, inference, activation states.

A network is a chain of dense layers; every hidden layer is ReLU and the
final layer is linear. Hidden (pre-ReLU) neurons are indexed linearly in
layer-major order; that indexing is the currency of every activation-pattern
operation in this package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Union

import numpy as np

RELU = "relu"
LINEAR = "linear"
_ACTIVATIONS = (RELU, LINEAR)


class ModelFormatError(ValueError):
    """Raised when model text cannot be parsed as the documented schema."""


class ModelValidationError(ValueError):
    """Raised when a parsed model violates a structural invariant."""


@dataclass(frozen=True, eq=False)
class Layer:
    """One dense layer: ``z = weights @ a + bias``, one weight row per output neuron."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.float64)
        b = np.array(self.bias, dtype=np.float64)
        if w.ndim != 2:
            raise ModelValidationError(f"weights must be a matrix, got ndim={w.ndim}")
        if w.shape[0] < 1 or w.shape[1] < 1:
            raise ModelValidationError(f"weights must be non-empty, got shape {w.shape}")
        if b.ndim != 1:
            raise ModelValidationError(f"bias must be a vector, got ndim={b.ndim}")
        if w.shape[0] != b.shape[0]:
            raise ModelValidationError(
                f"bias length {b.shape[0]} does not match weight row count {w.shape[0]}"
            )
        if not np.all(np.isfinite(w)):
            raise ModelValidationError("weights contain a non-finite value")
        if not np.all(np.isfinite(b)):
            raise ModelValidationError("bias contains a non-finite value")
        if self.activation not in _ACTIVATIONS:
            raise ModelValidationError(f"unknown activation {self.activation!r}")
        w.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "bias", b)

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]


def _affine(layer: Layer, a: np.ndarray) -> np.ndarray:
    # Multiply-then-sum instead of a BLAS dot: every product is rounded
    # individually (no FMA), so symmetric cancellations like w*x - w*x give
    # an exact 0 and activation states match pencil-and-paper arithmetic.
    return (layer.weights * a).sum(axis=1) + layer.bias


@dataclass(frozen=True, eq=False)
class ActivationSignature:
    """Total activation-state assignment of all hidden neurons for one input.

    ``states[k]`` is True iff hidden neuron k had a strictly positive
    pre-activation (a pre-activation of exactly 0 counts as deactivated).
    """

    states: np.ndarray

    def __post_init__(self):
        s = np.array(self.states, dtype=bool)
        if s.ndim != 1:
            raise ValueError("signature states must be a flat vector")
        s.setflags(write=False)
        object.__setattr__(self, "states", s)

    def __len__(self) -> int:
        return self.states.shape[0]

    def is_activated(self, neuron: int) -> bool:
        return bool(self.states[neuron])

    def activated_indices(self) -> tuple[int, ...]:
        return tuple(int(k) for k in np.flatnonzero(self.states))

    def deactivated_indices(self) -> tuple[int, ...]:
        return tuple(int(k) for k in np.flatnonzero(~self.states))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ActivationSignature):
            return NotImplemented
        return self.states.shape == other.states.shape and bool(
            np.all(self.states == other.states)
        )

    def __hash__(self) -> int:
        return hash(self.states.tobytes())


@dataclass(frozen=True, eq=False)
class Network:
    """Immutable feed-forward ReLU classifier.

    All inference methods are pure; a shared instance is safe to use from
    many threads.
    """

    name: str
    input_dim: int
    layers: tuple[Layer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        object.__setattr__(self, "layers", layers)
        if self.input_dim <= 0:
            raise ModelValidationError(f"input_dim must be positive, got {self.input_dim}")
        if not layers:
            raise ModelValidationError("network needs at least one layer")
        prev = self.input_dim
        for i, layer in enumerate(layers):
            if layer.in_dim != prev:
                raise ModelValidationError(
                    f"layer {i}: expects {layer.in_dim} inputs but previous width is {prev}"
                )
            last = i == len(layers) - 1
            if not last and layer.activation != RELU:
                raise ModelValidationError(
                    f"layer {i}: hidden layers must be {RELU!r}, got {layer.activation!r}"
                )
            if last and layer.activation != LINEAR:
                raise ModelValidationError(
                    f"layer {i}: output layer must be {LINEAR!r}, got {layer.activation!r}"
                )
            prev = layer.out_dim
        offsets = np.cumsum([0] + [l.out_dim for l in layers[:-1]])
        object.__setattr__(self, "_hidden_offsets", offsets)

    # -- shape helpers -------------------------------------------------

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def hidden_layer_sizes(self) -> tuple[int, ...]:
        return tuple(l.out_dim for l in self.layers[:-1])

    @property
    def hidden_neuron_count(self) -> int:
        return int(self._hidden_offsets[-1])

    def neuron_position(self, neuron: int) -> tuple[int, int]:
        """Map a linear hidden-neuron index to (hidden layer index, index within layer)."""
        if not 0 <= neuron < self.hidden_neuron_count:
            raise ValueError(
                f"neuron index {neuron} out of range [0, {self.hidden_neuron_count})"
            )
        layer = int(np.searchsorted(self._hidden_offsets, neuron, side="right")) - 1
        return layer, neuron - int(self._hidden_offsets[layer])

    def neuron_index(self, layer: int, within: int) -> int:
        """Inverse of :meth:`neuron_position`."""
        if not 0 <= layer < len(self.layers) - 1:
            raise ValueError(f"hidden layer index {layer} out of range")
        if not 0 <= within < self.layers[layer].out_dim:
            raise ValueError(f"neuron {within} out of range for layer {layer}")
        return int(self._hidden_offsets[layer]) + within

    # -- inference -----------------------------------------------------

    def _check_input(self, x) -> np.ndarray:
        v = np.asarray(x, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] != self.input_dim:
            raise ValueError(
                f"input has shape {v.shape}, expected ({self.input_dim},)"
            )
        return v

    def _trace(self, x: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
        """Pre-activation vector of every hidden layer, plus the final output."""
        pres = []
        a = x
        for layer in self.layers[:-1]:
            z = _affine(layer, a)
            pres.append(z)
            a = np.maximum(z, 0.0)
        return pres, _affine(self.layers[-1], a)

    def forward(self, x) -> np.ndarray:
        """Network output for a single input vector."""
        _, y = self._trace(self._check_input(x))
        return y

    def predict(self, x) -> int:
        """Index of the largest output entry; ties go to the lowest index."""
        return int(np.argmax(self.forward(x)))

    def forward_with_signature(self, x) -> tuple[np.ndarray, ActivationSignature]:
        """Output plus the activation signature observed on the way."""
        pres, y = self._trace(self._check_input(x))
        if pres:
            states = np.concatenate([z > 0.0 for z in pres])
        else:
            states = np.zeros(0, dtype=bool)
        return y, ActivationSignature(states)

    def pre_activations(self, x) -> np.ndarray:
        """Concatenated hidden pre-activation values, hidden-linear order."""
        pres, _ = self._trace(self._check_input(x))
        if not pres:
            return np.zeros(0, dtype=np.float64)
        return np.concatenate(pres)


# -- serialization -----------------------------------------------------

Source = Union[str, Path, IO]


def _layer_from_obj(i: int, obj) -> Layer:
    if not isinstance(obj, dict):
        raise ModelFormatError(f"layer {i}: expected an object, got {type(obj).__name__}")
    for key in ("weights", "bias", "activation"):
        if key not in obj:
            raise ModelFormatError(f"layer {i}: missing field {key!r}")
    try:
        return Layer(obj["weights"], obj["bias"], obj["activation"])
    except ModelValidationError as e:
        raise ModelValidationError(f"layer {i}: {e}") from None
    except (TypeError, ValueError) as e:
        raise ModelFormatError(f"layer {i}: {e}") from None


def network_from_dict(obj) -> Network:
    """Build and validate a :class:`Network` from the documented JSON layout."""
    if not isinstance(obj, dict):
        raise ModelFormatError("top level must be an object")
    for key in ("name", "input_dim", "layers"):
        if key not in obj:
            raise ModelFormatError(f"missing top-level field {key!r}")
    if not isinstance(obj["name"], str):
        raise ModelFormatError("field 'name' must be a string")
    if not isinstance(obj["input_dim"], int) or isinstance(obj["input_dim"], bool):
        raise ModelFormatError("field 'input_dim' must be an integer")
    if not isinstance(obj["layers"], list):
        raise ModelFormatError("field 'layers' must be a list")
    layers = tuple(_layer_from_obj(i, lo) for i, lo in enumerate(obj["layers"]))
    return Network(obj["name"], obj["input_dim"], layers)


def network_to_dict(net: Network) -> dict:
    return {
        "name": net.name,
        "input_dim": net.input_dim,
        "layers": [
            {
                "weights": [[float(v) for v in row] for row in layer.weights],
                "bias": [float(v) for v in layer.bias],
                "activation": layer.activation,
            }
            for layer in net.layers
        ],
    }


def loads_network(text: str) -> Network:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise ModelFormatError(f"not valid JSON: {e}") from None
    return network_from_dict(obj)


def dumps_network(net: Network) -> str:
    # json emits repr() of floats, which round-trips every binary64 exactly.
    return json.dumps(network_to_dict(net), indent=2)


def load_network(source: Source) -> Network:
    """Load a network from a path or an open text/byte stream."""
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")
    return loads_network(text)


def save_network(net: Network, dest: Union[str, Path, IO]) -> None:
    """Write a network in the loadable JSON format (lossless round trip)."""
    text = dumps_network(net) + "\n"
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text)
    else:
        dest.write(text)
