"""Neural activation patterns: extraction, ordering, mining, statistics.

A pattern is a pair of disjoint neuron sets (activated, deactivated) over a
network's hidden neurons. Patterns are partially ordered by set inclusion:
a pattern with *larger* sets is more specific and precedes one with smaller
sets. An input follows a pattern when its extracted signature precedes it.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

from .model import ActivationSignature, Network


@dataclass(frozen=True)
class Nap:
    """Disjoint activated/deactivated hidden-neuron sets, optionally labeled."""

    activated: frozenset[int]
    deactivated: frozenset[int]
    label: Optional[int] = None
    delta: Optional[float] = None

    def __post_init__(self):
        a = frozenset(int(k) for k in self.activated)
        d = frozenset(int(k) for k in self.deactivated)
        overlap = a & d
        if overlap:
            raise ValueError(f"activated and deactivated sets overlap: {sorted(overlap)}")
        if any(k < 0 for k in a | d):
            raise ValueError("neuron indices must be non-negative")
        object.__setattr__(self, "activated", a)
        object.__setattr__(self, "deactivated", d)

    @property
    def support(self) -> frozenset[int]:
        """All neurons the pattern constrains, regardless of polarity."""
        return self.activated | self.deactivated

    @property
    def is_trivial(self) -> bool:
        return not self.activated and not self.deactivated

    def check_valid_for(self, net: Network) -> None:
        bad = [k for k in self.support if k >= net.hidden_neuron_count]
        if bad:
            raise ValueError(
                f"neuron indices {sorted(bad)} out of range for network "
                f"with {net.hidden_neuron_count} hidden neurons"
            )

    def __repr__(self):
        return (
            f"Nap(activated={sorted(self.activated)}, "
            f"deactivated={sorted(self.deactivated)}, "
            f"label={self.label}, delta={self.delta})"
        )


@dataclass(frozen=True)
class MiningReport:
    """Mined pattern plus the per-neuron evidence behind it."""

    nap: Nap
    frequencies: np.ndarray  # fraction of samples activating each hidden neuron
    sample_count: int
    follower_count: int  # samples of the mining set that follow the mined pattern

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=np.float64)
        f.setflags(write=False)
        object.__setattr__(self, "frequencies", f)

    @property
    def follower_fraction(self) -> float:
        return self.follower_count / self.sample_count


def extract(net: Network, x) -> Nap:
    """Exact pattern of one input: every hidden neuron lands in one of the two sets."""
    _, sig = net.forward_with_signature(x)
    return signature_to_nap(sig)


def signature_to_nap(sig: ActivationSignature) -> Nap:
    return Nap(frozenset(sig.activated_indices()), frozenset(sig.deactivated_indices()))


def subsumes(specific: Nap, abstract: Nap) -> bool:
    """True iff ``specific`` precedes ``abstract``: the abstract sets are subsets."""
    return abstract.activated <= specific.activated and abstract.deactivated <= specific.deactivated


def follows(net: Network, x, nap: Nap) -> bool:
    """True iff the input's extracted pattern precedes ``nap``.

    Activation is strict: a neuron in ``nap.activated`` must have a strictly
    positive pre-activation; one in ``nap.deactivated`` must be <= 0.
    """
    nap.check_valid_for(net)
    _, sig = net.forward_with_signature(x)
    return _signature_follows(sig.states, nap)


def _signature_follows(states: np.ndarray, nap: Nap) -> bool:
    return all(states[k] for k in nap.activated) and not any(
        states[k] for k in nap.deactivated
    )


def mine(net: Network, samples: Sequence, delta: float) -> MiningReport:
    """Mine a delta-relaxed pattern from a sample set.

    Each hidden neuron gets a counter of how many samples activate it; neurons
    activated in at least a ``delta`` fraction join the activated set, neurons
    activated in at most ``1 - delta`` join the deactivated set, and the rest
    stay unconstrained. Only one integer counter per neuron is kept, so memory
    is O(#neurons) regardless of sample count.
    """
    if not 0.5 < delta <= 1.0:
        raise ValueError(f"delta must be in (0.5, 1.0], got {delta}")
    n = len(samples)
    if n == 0:
        raise ValueError("cannot mine from an empty sample set")
    counts = np.zeros(net.hidden_neuron_count, dtype=np.int64)
    for x in samples:
        _, sig = net.forward_with_signature(x)
        counts += sig.states
    freq = counts / n
    activated = frozenset(int(k) for k in np.flatnonzero(freq >= delta))
    deactivated = frozenset(int(k) for k in np.flatnonzero(freq <= 1.0 - delta))
    nap = Nap(activated, deactivated, delta=delta)
    followers = sum(1 for x in samples if follows(net, x, nap))
    return MiningReport(nap=nap, frequencies=freq, sample_count=n, follower_count=followers)


@dataclass(frozen=True)
class LabelStats:
    """One row of the follower table: how an eval set relates to one label's pattern."""

    label: int
    followers_same: int
    followers_other: int
    total_same: int


def nap_stats(
    net: Network,
    eval_set: Iterable[tuple[int, Sequence[float]]],
    naps: dict[int, Nap],
) -> list[LabelStats]:
    """Follower counts of each label's pattern over a labeled eval set.

    For every label ``i`` present in ``naps``: how many eval samples with
    label ``i`` follow ``naps[i]``, and how many with a different label do.
    """
    for label, nap in naps.items():
        nap.check_valid_for(net)
    eval_list = list(eval_set)
    missing = sorted({label for label, _ in eval_list} - set(naps))
    if missing:
        raise ValueError(f"no pattern supplied for labels {missing} present in eval set")
    signatures = []
    for label, x in eval_list:
        _, sig = net.forward_with_signature(x)
        signatures.append((int(label), sig.states))
    rows = []
    for label in sorted(naps):
        nap = naps[label]
        same = other = total_same = 0
        for sample_label, states in signatures:
            is_same = sample_label == label
            total_same += is_same
            if _signature_follows(states, nap):
                if is_same:
                    same += 1
                else:
                    other += 1
        rows.append(LabelStats(label, same, other, total_same))
    return rows


def stats_to_csv(rows: Iterable[LabelStats], dest: IO) -> None:
    writer = csv.writer(dest)
    writer.writerow(["label", "followers_same", "followers_other", "total_same"])
    for r in rows:
        writer.writerow([r.label, r.followers_same, r.followers_other, r.total_same])


def overlap_ratio(a: Nap, b: Nap, match_polarity: bool = False) -> float:
    """Fraction of ``a``'s constrained neurons that ``b`` also constrains.

    By default only neuron identity matters. With ``match_polarity`` the
    intersection pairs activated with activated and deactivated with
    deactivated, for sensitivity studies.
    """
    if a.is_trivial:
        raise ValueError("overlap ratio undefined for a trivial pattern (empty support)")
    if match_polarity:
        shared = len(a.activated & b.activated) + len(a.deactivated & b.deactivated)
    else:
        shared = len(a.support & b.support)
    return shared / len(a.support)


# -- serialization -----------------------------------------------------

NEURON_INDEXING = "hidden-linear"


def nap_to_dict(nap: Nap) -> dict:
    return {
        "label": nap.label,
        "delta": nap.delta,
        "neuron_indexing": NEURON_INDEXING,
        "activated": sorted(nap.activated),
        "deactivated": sorted(nap.deactivated),
    }


def nap_from_dict(obj) -> Nap:
    if not isinstance(obj, dict):
        raise ValueError("pattern file must hold a JSON object")
    for key in ("activated", "deactivated"):
        if key not in obj:
            raise ValueError(f"pattern object missing field {key!r}")
    indexing = obj.get("neuron_indexing", NEURON_INDEXING)
    if indexing != NEURON_INDEXING:
        raise ValueError(f"unsupported neuron indexing {indexing!r}")
    label = obj.get("label")
    delta = obj.get("delta")
    return Nap(
        frozenset(obj["activated"]),
        frozenset(obj["deactivated"]),
        label=None if label is None else int(label),
        delta=None if delta is None else float(delta),
    )


def load_nap(source: Union[str, Path, IO]) -> Nap:
    if isinstance(source, (str, Path)):
        text = Path(source).read_text()
    else:
        text = source.read()
    return nap_from_dict(json.loads(text))


def save_nap(nap: Nap, dest: Union[str, Path, IO]) -> None:
    text = json.dumps(nap_to_dict(nap), indent=2) + "\n"
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text)
    else:
        dest.write(text)
