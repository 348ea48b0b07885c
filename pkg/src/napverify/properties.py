"""Robustness and non-ambiguity properties as verification queries.

Four query shapes are supported: plain epsilon-ball robustness, pattern
robustness (the pattern region alone, no ball), pattern-augmented
robustness (ball intersected with pattern), and pairwise non-ambiguity of
two labeled patterns. Each robustness query runs once per adversarial
target label; a counterexample for target j is a region point where output
j ties or beats the expected label's output.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional

import numpy as np

from .lp import GE, LinearConstraint
from .model import Network
from .nap import Nap, follows
from .verify import (
    DEFAULT_DOMAIN,
    FALSIFIED,
    UNKNOWN,
    VERIFIED,
    Region,
    SearchConfig,
    SearchStats,
    VerifyOutcome,
    verify_query,
)

log = logging.getLogger(__name__)

NON_AMBIGUOUS_TRIVIAL = "non-ambiguous-trivial"
NON_AMBIGUOUS_VERIFIED = "non-ambiguous-verified"
AMBIGUOUS = "ambiguous"
BOUNDARY_ONLY = "boundary-only"


def attack_constraint(expected: int, target: int) -> LinearConstraint:
    """Unsafe encoding refuting "expected beats target": output[target] - output[expected] >= 0."""
    if expected == target:
        raise ValueError("target must differ from the expected label")
    return LinearConstraint({target: 1.0, expected: -1.0}, GE, 0.0)


def _resolve_targets(net: Network, label: int, targets) -> list[int]:
    if not 0 <= label < net.output_dim:
        raise ValueError(f"label {label} out of range for {net.output_dim} outputs")
    if targets is None:
        return [j for j in range(net.output_dim) if j != label]
    targets = [int(j) for j in targets]
    for j in targets:
        if not 0 <= j < net.output_dim:
            raise ValueError(f"target {j} out of range for {net.output_dim} outputs")
        if j == label:
            raise ValueError(f"target {j} equals the expected label")
    return targets


def _per_target(net, region, label, targets, config) -> dict[int, VerifyOutcome]:
    return {
        j: verify_query(net, region, [attack_constraint(label, j)], config, target=j)
        for j in targets
    }


def verify_plain_robustness(
    net: Network,
    x,
    epsilon: float,
    targets: Optional[Iterable[int]] = None,
    config: Optional[SearchConfig] = None,
    domain: tuple[float, float] = DEFAULT_DOMAIN,
) -> dict[int, VerifyOutcome]:
    """Classic ball robustness around x, one outcome per adversarial target."""
    label = net.predict(x)
    targets = _resolve_targets(net, label, targets)
    region = Region.box_around(x, epsilon, nap=None, domain=domain)
    return _per_target(net, region, label, targets, config)


def verify_nap_robustness(
    net: Network,
    nap: Nap,
    label: int,
    targets: Optional[Iterable[int]] = None,
    config: Optional[SearchConfig] = None,
    domain: tuple[float, float] = DEFAULT_DOMAIN,
) -> dict[int, VerifyOutcome]:
    """Robustness over every domain input that follows the pattern (no ball)."""
    nap.check_valid_for(net)
    targets = _resolve_targets(net, label, targets)
    region = Region.full_domain(net.input_dim, nap, domain)
    return _per_target(net, region, label, targets, config)


def verify_augmented_robustness(
    net: Network,
    x,
    epsilon: float,
    nap: Nap,
    targets: Optional[Iterable[int]] = None,
    config: Optional[SearchConfig] = None,
    domain: tuple[float, float] = DEFAULT_DOMAIN,
) -> dict[int, VerifyOutcome]:
    """Ball robustness with the search space narrowed to pattern followers.

    The center is not required to follow the pattern; whether it does is
    logged, since an empty intersection verifies vacuously.
    """
    nap.check_valid_for(net)
    label = net.predict(x)
    targets = _resolve_targets(net, label, targets)
    center_follows = follows(net, x, nap)
    log.info("augmented query center follows pattern: %s", center_follows)
    region = Region.box_around(x, epsilon, nap, domain)
    return _per_target(net, region, label, targets, config)


@dataclass
class NonAmbiguityResult:
    status: str
    witness: Optional[np.ndarray] = None
    stats: SearchStats = field(default_factory=SearchStats)

    def to_record(self) -> dict:
        return {
            "outcome": self.status,
            "witness": None if self.witness is None else [float(v) for v in self.witness],
            "boundary": self.status == BOUNDARY_ONLY,
            "stats": self.stats.to_dict(),
        }


def check_non_ambiguity(
    net: Network,
    nap_a: Nap,
    nap_b: Nap,
    domain: tuple[float, float] = DEFAULT_DOMAIN,
    config: Optional[SearchConfig] = None,
) -> NonAmbiguityResult:
    """Can any input follow both patterns at once?

    Opposite polarities on a shared neuron settle it immediately (no input
    both activates and deactivates a neuron). Otherwise the merged pattern
    region is checked for emptiness by the complete search. A region that
    is populated only by activation-boundary points (where some required
    neuron sits exactly at zero, failing strict activation) is reported as
    boundary-only rather than ambiguous.
    """
    nap_a.check_valid_for(net)
    nap_b.check_valid_for(net)
    if nap_a.label is not None and nap_a.label == nap_b.label:
        raise ValueError("non-ambiguity is a property of patterns with different labels")
    if (nap_a.activated & nap_b.deactivated) or (nap_b.activated & nap_a.deactivated):
        return NonAmbiguityResult(NON_AMBIGUOUS_TRIVIAL)
    merged = Nap(nap_a.activated | nap_b.activated, nap_a.deactivated | nap_b.deactivated)
    region = Region.full_domain(net.input_dim, merged, domain)
    outcome = verify_query(net, region, [], config)
    if outcome.status == FALSIFIED:
        return NonAmbiguityResult(AMBIGUOUS, witness=outcome.witness, stats=outcome.stats)
    if outcome.status == UNKNOWN:
        return NonAmbiguityResult(UNKNOWN, stats=outcome.stats)
    if outcome.boundary:
        return NonAmbiguityResult(BOUNDARY_ONLY, witness=outcome.witness, stats=outcome.stats)
    return NonAmbiguityResult(NON_AMBIGUOUS_VERIFIED, stats=outcome.stats)


# -- sampling falsifier ---------------------------------------------------


def falsify(
    net: Network,
    region: Region,
    label: int,
    targets: Optional[Iterable[int]] = None,
    samples: int = 10_000,
    refine_steps: int = 100,
    seed: int = 0,
) -> Optional[np.ndarray]:
    """Cheap counterexample search: random region samples plus local refinement.

    Returns a point in the region that follows the pattern and is NOT
    classified as ``label`` against some target, or None. Absence of a
    witness proves nothing.
    """
    targets = _resolve_targets(net, label, targets)
    if region.is_empty or not targets:
        return None
    rng = np.random.default_rng(seed)
    t = np.array(targets)

    def margin(x) -> float:
        y = net.forward(x)
        return float(np.max(y[t] - y[label]))

    def admissible(x) -> bool:
        return region.nap is None or follows(net, x, region.nap)

    best_x, best_m = None, -np.inf
    for _ in range(samples):
        x = rng.uniform(region.lower, region.upper)
        if not admissible(x):
            continue
        m = margin(x)
        if m > best_m:
            best_x, best_m = x, m
        if m >= 0.0:
            break
    if best_x is None:
        return None

    step = np.maximum((region.upper - region.lower) / 8.0, 1e-9)
    x = best_x
    for _ in range(refine_steps):
        if best_m >= 0.0:
            break
        improved = False
        for c in range(region.dim):
            for sign in (1.0, -1.0):
                cand = x.copy()
                cand[c] = np.clip(cand[c] + sign * step[c], region.lower[c], region.upper[c])
                if not admissible(cand):
                    continue
                m = margin(cand)
                if m > best_m:
                    x, best_m = cand, m
                    improved = True
        if not improved:
            step /= 2.0
    if best_m >= 0.0 and region.contains(x) and admissible(x):
        return x
    return None


# -- query records ---------------------------------------------------------

PLAIN_ROBUST = "plain-robust"
NAP_ROBUST = "nap-robust"
AUGMENTED_ROBUST = "augmented-robust"
NON_AMBIGUITY = "non-ambiguity"


@dataclass(frozen=True)
class PropertyQuery:
    """Declarative form of one property check, as built by the CLI."""

    kind: str
    label: Optional[int] = None
    center: Optional[tuple[float, ...]] = None
    epsilon: Optional[float] = None
    naps: tuple[Nap, ...] = ()
    targets: Optional[tuple[int, ...]] = None
    domain: tuple[float, float] = DEFAULT_DOMAIN

    def __post_init__(self):
        if self.kind not in (PLAIN_ROBUST, NAP_ROBUST, AUGMENTED_ROBUST, NON_AMBIGUITY):
            raise ValueError(f"unknown property kind {self.kind!r}")
        if self.epsilon is not None and self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        if self.kind == PLAIN_ROBUST and (self.center is None or self.epsilon is None):
            raise ValueError("plain robustness needs a center and an epsilon")
        if self.kind == NAP_ROBUST and (len(self.naps) != 1 or self.label is None):
            raise ValueError("pattern robustness needs one pattern and a label")
        if self.kind == AUGMENTED_ROBUST and (
            self.center is None or self.epsilon is None or len(self.naps) != 1
        ):
            raise ValueError("augmented robustness needs a center, an epsilon and one pattern")
        if self.kind == NON_AMBIGUITY:
            if len(self.naps) != 2:
                raise ValueError("non-ambiguity needs exactly two patterns")
            a, b = self.naps
            if a.label is not None and a.label == b.label:
                raise ValueError("non-ambiguity patterns must carry different labels")


def run_property(net: Network, query: PropertyQuery, config: Optional[SearchConfig] = None):
    """Dispatch a PropertyQuery; returns per-target outcomes or a NonAmbiguityResult."""
    if query.kind == PLAIN_ROBUST:
        return verify_plain_robustness(
            net, np.array(query.center), query.epsilon, query.targets, config, query.domain
        )
    if query.kind == NAP_ROBUST:
        return verify_nap_robustness(
            net, query.naps[0], query.label, query.targets, config, query.domain
        )
    if query.kind == AUGMENTED_ROBUST:
        return verify_augmented_robustness(
            net, np.array(query.center), query.epsilon, query.naps[0],
            query.targets, config, query.domain,
        )
    return check_non_ambiguity(net, query.naps[0], query.naps[1], query.domain, config)


def outcomes_to_csv(outcomes: dict[int, VerifyOutcome], dest: IO) -> None:
    """Per-target results table: target,outcome,time_ms,witness."""
    writer = csv.writer(dest)
    writer.writerow(["target", "outcome", "time_ms", "witness"])
    for j, o in outcomes.items():
        witness = "" if o.witness is None else ";".join(repr(float(v)) for v in o.witness)
        writer.writerow([j, o.status, o.stats.time_ms, witness])


def aggregate_status(outcomes: dict[int, VerifyOutcome]) -> str:
    """Worst per-target status: falsified beats unknown beats verified."""
    statuses = {o.status for o in outcomes.values()}
    if FALSIFIED in statuses:
        return FALSIFIED
    if UNKNOWN in statuses:
        return UNKNOWN
    return VERIFIED
