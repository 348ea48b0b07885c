import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # makes `oracles` importable

from napverify.model import Layer, Network, load_network

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def xnet() -> Network:
    """Committed 2-3-2 analog-XOR classifier used throughout the suite."""
    return load_network(FIXTURES / "xnet.json")


@pytest.fixture(scope="session")
def one_neuron_net() -> Network:
    """Single hidden neuron computing x - 0.5, two linear outputs."""
    return Network(
        "step",
        1,
        (
            Layer([[1.0]], [-0.5], "relu"),
            Layer([[1.0], [-1.0]], [0.0, 0.0], "linear"),
        ),
    )


@pytest.fixture(scope="session")
def identity_net() -> Network:
    """Degenerate no-hidden-layer identity network."""
    return Network("identity", 1, (Layer([[1.0]], [0.0], "linear"),))
