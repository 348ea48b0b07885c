"""Complete verification engine: interval pruning + ReLU phase splitting + LP leaves.

A query asks whether any input inside a region (an input box intersected
with an activation-pattern constraint) can satisfy a conjunction of linear
"unsafe" constraints on the network outputs. Pattern neurons have their
ReLU phase fixed up front; remaining neurons are split depth-first, each
fully-determined leaf becoming a linear feasibility problem. Completeness
comes from the LP leaves; interval arithmetic only prunes.
"""

from __future__ import annotations

import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .lp import (
    EQ,
    GE,
    LE,
    TAU_LP,
    FeasibilityResult,
    LinearConstraint,
    LinearProgram,
    LpInstabilityError,
    solve_feasibility,
)
from .model import Network
from .nap import Nap, follows

FREE = 0
ACTIVE = 1
INACTIVE = -1

DEFAULT_DOMAIN = (0.0, 1.0)

VERIFIED = "verified"
FALSIFIED = "falsified"
UNKNOWN = "unknown"


# -- regions -----------------------------------------------------------


@dataclass(frozen=True)
class Region:
    """Input box, optionally intersected with an activation pattern.

    Boxes are kept after clipping to the valid input domain; ``pre_clip``
    remembers the requested bounds when clipping changed them. Empty boxes
    (lower > upper somewhere) are legal and denote the empty region.
    """

    lower: np.ndarray
    upper: np.ndarray
    nap: Optional[Nap] = None
    pre_clip: Optional[tuple[tuple[float, ...], tuple[float, ...]]] = None

    def __post_init__(self):
        lo = np.array(self.lower, dtype=np.float64)
        hi = np.array(self.upper, dtype=np.float64)
        if lo.ndim != 1 or lo.shape != hi.shape:
            raise ValueError("region bounds must be matching vectors")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    @property
    def is_empty(self) -> bool:
        return bool(np.any(self.lower > self.upper))

    def contains(self, x: np.ndarray, tol: float = 0.0) -> bool:
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, self.lower, self.upper)

    @classmethod
    def full_domain(
        cls, dim: int, nap: Optional[Nap] = None, domain: tuple[float, float] = DEFAULT_DOMAIN
    ) -> "Region":
        lo, hi = domain
        return cls(np.full(dim, lo), np.full(dim, hi), nap)

    @classmethod
    def box_around(
        cls,
        center,
        epsilon: float,
        nap: Optional[Nap] = None,
        domain: tuple[float, float] = DEFAULT_DOMAIN,
    ) -> "Region":
        """Ball of radius epsilon in the max norm, clipped to the domain."""
        if epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        c = np.asarray(center, dtype=np.float64)
        raw_lo, raw_hi = c - epsilon, c + epsilon
        lo = np.maximum(raw_lo, domain[0])
        hi = np.minimum(raw_hi, domain[1])
        pre = None
        if np.any(lo != raw_lo) or np.any(hi != raw_hi):
            pre = (tuple(float(v) for v in raw_lo), tuple(float(v) for v in raw_hi))
        return cls(lo, hi, nap, pre_clip=pre)


# -- phase assignments ---------------------------------------------------


@dataclass(frozen=True)
class PhaseAssignment:
    """Per-hidden-neuron ReLU mode: fixed-active, fixed-inactive, or free."""

    phases: np.ndarray

    def __post_init__(self):
        p = np.array(self.phases, dtype=np.int8)
        p.setflags(write=False)
        object.__setattr__(self, "phases", p)

    @classmethod
    def all_free(cls, net: Network) -> "PhaseAssignment":
        return cls(np.zeros(net.hidden_neuron_count, dtype=np.int8))

    @classmethod
    def from_nap(cls, net: Network, nap: Optional[Nap]) -> "PhaseAssignment":
        phases = np.zeros(net.hidden_neuron_count, dtype=np.int8)
        if nap is not None:
            nap.check_valid_for(net)
            for k in nap.activated:
                phases[k] = ACTIVE
            for k in nap.deactivated:
                phases[k] = INACTIVE
        return cls(phases)

    def with_phase(self, neuron: int, phase: int) -> "PhaseAssignment":
        p = self.phases.copy()
        p[neuron] = phase
        return PhaseAssignment(p)

    def fixed_active(self) -> np.ndarray:
        return np.flatnonzero(self.phases == ACTIVE)

    def fixed_inactive(self) -> np.ndarray:
        return np.flatnonzero(self.phases == INACTIVE)

    def free(self) -> np.ndarray:
        return np.flatnonzero(self.phases == FREE)

    def consistent_with(self, nap: Optional[Nap]) -> bool:
        if nap is None:
            return True
        return all(self.phases[k] == ACTIVE for k in nap.activated) and all(
            self.phases[k] == INACTIVE for k in nap.deactivated
        )


# -- LP variable layout --------------------------------------------------


class VariableLayout:
    """LP variable indices: inputs, then (pre, post) per hidden layer, then outputs."""

    def __init__(self, net: Network):
        self.net = net
        self.input_offset = 0
        self._pre_offsets = []
        self._post_offsets = []
        cursor = net.input_dim
        for width in net.hidden_layer_sizes:
            self._pre_offsets.append(cursor)
            cursor += width
            self._post_offsets.append(cursor)
            cursor += width
        self.output_offset = cursor
        self.n_vars = cursor + net.output_dim

    def input_var(self, i: int) -> int:
        return self.input_offset + i

    def pre_var(self, neuron: int) -> int:
        layer, within = self.net.neuron_position(neuron)
        return self._pre_offsets[layer] + within

    def post_var(self, neuron: int) -> int:
        layer, within = self.net.neuron_position(neuron)
        return self._post_offsets[layer] + within

    def output_var(self, j: int) -> int:
        return self.output_offset + j


def network_constraints(net: Network, layout: VariableLayout) -> list[LinearConstraint]:
    """Equalities tying pre-activation, post-activation and output variables together."""
    rows = []
    for l, layer in enumerate(net.layers):
        last = l == len(net.layers) - 1
        for k in range(layer.out_dim):
            if last:
                coeffs = {layout.output_var(k): 1.0}
            else:
                coeffs = {layout.pre_var(net.neuron_index(l, k)): 1.0}
            for j in range(layer.in_dim):
                w = float(layer.weights[k, j])
                if w == 0.0:
                    continue
                if l == 0:
                    src = layout.input_var(j)
                else:
                    src = layout.post_var(net.neuron_index(l - 1, j))
                coeffs[src] = coeffs.get(src, 0.0) - w
            rows.append(LinearConstraint(coeffs, EQ, float(layer.bias[k])))
    return rows


def encode_phase_constraints(
    net: Network, assignment: PhaseAssignment, layout: Optional[VariableLayout] = None
) -> list[LinearConstraint]:
    """Linear constraints realizing each fixed ReLU phase.

    Fixed-active neuron: post equals pre and pre >= 0. Fixed-inactive:
    post is zero and pre <= 0. Free neurons contribute nothing here; the
    search fixes them before any LP is posed.
    """
    layout = layout or VariableLayout(net)
    rows = []
    for k in range(assignment.phases.shape[0]):
        phase = int(assignment.phases[k])
        v, r = layout.pre_var(k), layout.post_var(k)
        if phase == ACTIVE:
            rows.append(LinearConstraint({r: 1.0, v: -1.0}, EQ, 0.0))
            rows.append(LinearConstraint({v: 1.0}, GE, 0.0))
        elif phase == INACTIVE:
            rows.append(LinearConstraint({r: 1.0}, EQ, 0.0))
            rows.append(LinearConstraint({v: 1.0}, LE, 0.0))
    return rows


# -- interval propagation --------------------------------------------------


@dataclass
class Bounds:
    """Sound enclosing intervals under a region and phase assignment."""

    pre: np.ndarray      # (hidden, 2) pre-activation intervals
    post: np.ndarray     # (hidden, 2) post-activation intervals
    outputs: np.ndarray  # (out_dim, 2)


def _affine_interval(W: np.ndarray, b: np.ndarray, lo: np.ndarray, hi: np.ndarray):
    Wp = np.maximum(W, 0.0)
    Wn = np.minimum(W, 0.0)
    return Wp @ lo + Wn @ hi + b, Wp @ hi + Wn @ lo + b


def propagate_bounds(
    net: Network, region: Region, assignment: PhaseAssignment
) -> Optional[Bounds]:
    """Interval pass through the network, honoring fixed phases.

    Returns None when a fixed phase contradicts its interval beyond the LP
    tolerance (the subproblem is infeasible). Fixed-inactive neurons clamp
    their post interval to zero; fixed-active neurons pass their (sign
    constrained) pre interval through.
    """
    if region.is_empty:
        raise ValueError("cannot propagate bounds over an empty region")
    if not assignment.consistent_with(region.nap):
        raise ValueError("phase assignment contradicts the region's pattern")
    h = net.hidden_neuron_count
    pre = np.zeros((h, 2))
    post = np.zeros((h, 2))
    lo, hi = region.lower, region.upper
    for l, layer in enumerate(net.layers[:-1]):
        z_lo, z_hi = _affine_interval(layer.weights, layer.bias, lo, hi)
        base = net.neuron_index(l, 0)
        width = layer.out_dim
        idx = slice(base, base + width)
        pre[idx, 0], pre[idx, 1] = z_lo, z_hi
        phases = assignment.phases[idx]
        if np.any((phases == ACTIVE) & (z_hi < -TAU_LP)):
            return None
        if np.any((phases == INACTIVE) & (z_lo > TAU_LP)):
            return None
        r_lo = np.maximum(z_lo, 0.0)
        r_hi = np.maximum(z_hi, 0.0)
        inactive = phases == INACTIVE
        r_lo[inactive] = 0.0
        r_hi[inactive] = 0.0
        post[idx, 0], post[idx, 1] = r_lo, r_hi
        lo, hi = r_lo, r_hi
    out = net.layers[-1]
    y_lo, y_hi = _affine_interval(out.weights, out.bias, lo, hi)
    return Bounds(pre=pre, post=post, outputs=np.stack([y_lo, y_hi], axis=1))


def branch(assignment: PhaseAssignment, bounds: Bounds) -> tuple[int, PhaseAssignment, PhaseAssignment]:
    """Pick the free neuron straddling zero with the widest two-sided margin.

    Returns the neuron plus the fixed-active child first, fixed-inactive
    second (the search order). Sign-determined free neurons are not
    branching candidates; callers fix them in place.
    """
    scores = np.where(
        (assignment.phases == FREE) & (bounds.pre[:, 0] < 0.0) & (bounds.pre[:, 1] > 0.0),
        np.minimum(-bounds.pre[:, 0], bounds.pre[:, 1]),
        -np.inf,
    )
    k = int(np.argmax(scores))
    if not np.isfinite(scores[k]):
        raise ValueError("no free neuron straddles zero")
    return k, assignment.with_phase(k, ACTIVE), assignment.with_phase(k, INACTIVE)


def _implied_fixings(assignment: PhaseAssignment, bounds: Bounds) -> PhaseAssignment:
    phases = assignment.phases.copy()
    free = phases == FREE
    phases[free & (bounds.pre[:, 0] >= 0.0)] = ACTIVE
    phases[free & (bounds.pre[:, 1] <= 0.0)] = INACTIVE
    return PhaseAssignment(phases)


# -- outcomes ----------------------------------------------------------


@dataclass
class SearchStats:
    branches: int = 0
    lp_calls: int = 0
    time_ms: int = 0
    pre_clip: Optional[tuple] = None

    def merge(self, other: "SearchStats") -> None:
        self.branches += other.branches
        self.lp_calls += other.lp_calls

    def to_dict(self) -> dict:
        d = {"branches": self.branches, "lp_calls": self.lp_calls, "time_ms": self.time_ms}
        if self.pre_clip is not None:
            d["pre_clip"] = [list(self.pre_clip[0]), list(self.pre_clip[1])]
        return d


@dataclass
class VerifyOutcome:
    status: str
    witness: Optional[np.ndarray] = None
    boundary: bool = False
    target: Optional[int] = None
    reason: Optional[str] = None
    stats: SearchStats = field(default_factory=SearchStats)

    @property
    def verified(self) -> bool:
        return self.status == VERIFIED

    @property
    def falsified(self) -> bool:
        return self.status == FALSIFIED

    def to_record(self) -> dict:
        return {
            "outcome": self.status,
            "witness": None if self.witness is None else [float(v) for v in self.witness],
            "boundary": self.boundary,
            "stats": self.stats.to_dict(),
        }


@dataclass(frozen=True)
class SearchConfig:
    timeout_s: float = 600.0
    workers: int = 1
    seed: int = 0
    perturb_trials: int = 100
    perturb_scale: float = 1e-6


# -- the search --------------------------------------------------------


class _Timeout(Exception):
    pass


class _Search:
    """One verification query; holds the static pieces shared by all nodes."""

    def __init__(self, net: Network, region: Region, unsafe: Sequence[LinearConstraint],
                 config: SearchConfig):
        self.net = net
        self.region = region
        self.config = config
        self.layout = VariableLayout(net)
        for c in unsafe:
            bad = [j for j in c.coeffs if j >= net.output_dim or j < 0]
            if bad:
                raise ValueError(f"unsafe constraint references non-output variables {bad}")
        self.unsafe = list(unsafe)
        self.unsafe_mapped = [
            LinearConstraint(
                {self.layout.output_var(j): c for j, c in u.coeffs.items()}, u.relation, u.rhs
            )
            for u in unsafe
        ]
        self.base_rows = network_constraints(net, self.layout)
        bounds: list[tuple[Optional[float], Optional[float]]] = [(None, None)] * self.layout.n_vars
        for i in range(net.input_dim):
            bounds[self.layout.input_var(i)] = (float(region.lower[i]), float(region.upper[i]))
        self.lp_bounds = bounds
        self.deadline = time.perf_counter() + config.timeout_s

    # .. node processing ..

    def _unsafe_interval_impossible(self, outputs: np.ndarray) -> bool:
        for c in self.unsafe:
            lo = hi = 0.0
            for j, a in c.coeffs.items():
                if a >= 0:
                    lo += a * outputs[j, 0]
                    hi += a * outputs[j, 1]
                else:
                    lo += a * outputs[j, 1]
                    hi += a * outputs[j, 0]
            if c.relation == GE and hi < c.rhs - TAU_LP:
                return True
            if c.relation == LE and lo > c.rhs + TAU_LP:
                return True
            if c.relation == EQ and (hi < c.rhs - TAU_LP or lo > c.rhs + TAU_LP):
                return True
        return False

    def _leaf_lp(self, assignment: PhaseAssignment) -> FeasibilityResult:
        rows = self.base_rows + encode_phase_constraints(self.net, assignment, self.layout)
        rows += self.unsafe_mapped
        lp = LinearProgram(self.layout.n_vars, rows, list(self.lp_bounds))
        return solve_feasibility(lp)

    def _candidate_ok(self, x: np.ndarray) -> tuple[bool, bool]:
        """Exact re-check of a counterexample candidate: (valid, strict)."""
        if not self.region.contains(x):
            return False, False
        if self.region.nap is not None and not follows(self.net, x, self.region.nap):
            return False, False
        y = self.net.forward(x)
        strict = True
        for c in self.unsafe:
            lhs = sum(a * y[j] for j, a in c.coeffs.items())
            if c.relation == GE:
                if lhs < c.rhs:
                    return False, False
                strict = strict and lhs > c.rhs
            elif c.relation == LE:
                if lhs > c.rhs:
                    return False, False
                strict = strict and lhs < c.rhs
            else:
                if lhs != c.rhs:
                    return False, False
                strict = False
        return True, strict

    def _salvage_witness(self, x0: np.ndarray, rng: np.random.Generator):
        """LP point failed the exact check: jitter locally looking for a real one."""
        scale = self.config.perturb_scale
        for _ in range(self.config.perturb_trials):
            cand = self.region.clip(x0 + rng.uniform(-scale, scale, x0.shape[0]))
            ok, strict = self._candidate_ok(cand)
            if ok:
                return cand, strict
        return None, False

    def run_subtree(
        self,
        root: PhaseAssignment,
        stats: SearchStats,
        rng: np.random.Generator,
        cancel: Optional[threading.Event] = None,
    ) -> VerifyOutcome:
        """Depth-first search below one assignment; active child explored first."""
        stack = [root]
        boundary_seen = False
        boundary_witness = None
        unstable = False
        while stack:
            if cancel is not None and cancel.is_set():
                return VerifyOutcome(UNKNOWN, reason="cancelled", stats=stats)
            if time.perf_counter() > self.deadline:
                raise _Timeout()
            assignment = stack.pop()
            stats.branches += 1
            bounds = propagate_bounds(self.net, self.region, assignment)
            if bounds is None:
                continue
            assignment = _implied_fixings(assignment, bounds)
            if self.unsafe and self._unsafe_interval_impossible(bounds.outputs):
                continue
            free = assignment.free()
            straddling = free[
                (bounds.pre[free, 0] < 0.0) & (bounds.pre[free, 1] > 0.0)
            ] if free.size else free
            if straddling.size:
                _, active_child, inactive_child = branch(assignment, bounds)
                stack.append(inactive_child)
                stack.append(active_child)
                continue
            stats.lp_calls += 1
            try:
                result = self._leaf_lp(assignment)
            except LpInstabilityError:
                unstable = True
                continue
            if not result.is_feasible:
                continue
            x0 = self.region.clip(result.point[: self.net.input_dim])
            ok, strict = self._candidate_ok(x0)
            if not ok:
                x_alt, strict = self._salvage_witness(x0, rng)
                if x_alt is None:
                    boundary_seen = True
                    if boundary_witness is None:
                        boundary_witness = x0
                    continue
                x0 = x_alt
            return VerifyOutcome(FALSIFIED, witness=x0, boundary=not strict, stats=stats)
        if unstable:
            return VerifyOutcome(UNKNOWN, reason="lp-instability", stats=stats)
        return VerifyOutcome(
            VERIFIED, witness=boundary_witness, boundary=boundary_seen, stats=stats
        )


def verify_query(
    net: Network,
    region: Region,
    unsafe: Sequence[LinearConstraint],
    config: Optional[SearchConfig] = None,
    target: Optional[int] = None,
) -> VerifyOutcome:
    """Decide whether any region point satisfies every unsafe constraint at once.

    verified: no such point exists. falsified: a concrete witness is
    returned (validated against the exact network, not the LP relaxation).
    unknown: timeout or numerical trouble, reported explicitly. A verified
    outcome with ``boundary`` set means satisfying points exist only on
    activation boundaries that the strict follows semantics excludes.
    """
    config = config or SearchConfig()
    t0 = time.perf_counter()
    stats = SearchStats(pre_clip=region.pre_clip)

    def finish(outcome: VerifyOutcome) -> VerifyOutcome:
        outcome.target = target
        outcome.stats.time_ms = int(round((time.perf_counter() - t0) * 1000))
        outcome.stats.pre_clip = region.pre_clip
        return outcome

    if region.dim != net.input_dim:
        raise ValueError(f"region dimension {region.dim} does not match input_dim {net.input_dim}")
    if region.is_empty:
        return finish(VerifyOutcome(VERIFIED, stats=stats))
    search = _Search(net, region, unsafe, config)
    root = PhaseAssignment.from_nap(net, region.nap)
    try:
        if config.workers <= 1:
            rng = np.random.default_rng(config.seed)
            outcome = search.run_subtree(root, stats, rng)
            outcome.stats = stats
            return finish(outcome)
        return finish(_run_parallel(search, root, stats, config))
    except _Timeout:
        return finish(VerifyOutcome(UNKNOWN, reason="timeout", stats=stats))


def _run_parallel(
    search: _Search, root: PhaseAssignment, stats: SearchStats, config: SearchConfig
) -> VerifyOutcome:
    """Split the top of the tree into subtrees and race them on a thread pool.

    The first falsification wins and cancels the other workers; verified
    needs every subtree verified. Stats are aggregated, so node counts are
    reproducible, but witness choice may vary run to run.
    """
    frontier = [root]
    want = 2 * config.workers
    while len(frontier) < want:
        grew = False
        next_frontier = []
        for assignment in frontier:
            bounds = propagate_bounds(search.net, search.region, assignment)
            if bounds is None:
                continue
            assignment = _implied_fixings(assignment, bounds)
            free = assignment.free()
            straddling = free[
                (bounds.pre[free, 0] < 0.0) & (bounds.pre[free, 1] > 0.0)
            ] if free.size else free
            if straddling.size and len(frontier) + len(next_frontier) < want:
                _, a_child, i_child = branch(assignment, bounds)
                next_frontier.extend([a_child, i_child])
                grew = True
            else:
                next_frontier.append(assignment)
        frontier = next_frontier
        if not grew:
            break
    if not frontier:
        return VerifyOutcome(VERIFIED, stats=stats)

    cancel = threading.Event()
    sub_stats = [SearchStats() for _ in frontier]
    outcomes: list[Optional[VerifyOutcome]] = [None] * len(frontier)

    def work(i: int) -> None:
        rng = np.random.default_rng(config.seed + i)
        try:
            outcomes[i] = search.run_subtree(frontier[i], sub_stats[i], rng, cancel)
        except _Timeout:
            outcomes[i] = VerifyOutcome(UNKNOWN, reason="timeout", stats=sub_stats[i])
        if outcomes[i].falsified:
            cancel.set()

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        list(pool.map(work, range(len(frontier))))
    for s in sub_stats:
        stats.merge(s)

    falsified = [o for o in outcomes if o is not None and o.falsified]
    if falsified:
        hit = falsified[0]
        return VerifyOutcome(FALSIFIED, witness=hit.witness, boundary=hit.boundary, stats=stats)
    unknowns = [o for o in outcomes if o is None or o.status == UNKNOWN]
    real_unknowns = [o for o in unknowns if o is None or o.reason != "cancelled"]
    if real_unknowns:
        reason = next((o.reason for o in real_unknowns if o is not None), "worker-error")
        return VerifyOutcome(UNKNOWN, reason=reason, stats=stats)
    boundary = any(o.boundary for o in outcomes if o is not None)
    witness = next((o.witness for o in outcomes if o is not None and o.witness is not None), None)
    return VerifyOutcome(VERIFIED, witness=witness, boundary=boundary, stats=stats)
