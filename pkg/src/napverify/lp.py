"""Feasibility solving for systems of linear constraints.

This is the leaf decision procedure of the branch-and-bound verifier: a
dense phase-1 simplex that either produces a point satisfying every
constraint to within ``TAU_LP`` or reports that the constraint system is
infeasible. Bland's rule keeps pivoting cycle-free; an iteration cap turns
pathological numerics into an explicit error instead of a wrong answer.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

# Single tolerance knob: absolute slack allowed on any constraint violation.
TAU_LP = 1e-7

LE = "<="
GE = ">="
EQ = "=="
_RELATIONS = (LE, GE, EQ)

# Pivot candidates below this magnitude are treated as zero.
_PIVOT_EPS = 1e-9


class LpInstabilityError(RuntimeError):
    """Pivoting exceeded its iteration cap or a witness failed its re-check.

    Callers must treat this as "unknown", never as a verdict.
    """


@dataclass(frozen=True)
class LinearConstraint:
    """Sparse linear constraint ``sum(coeffs[j] * x_j) REL rhs``."""

    coeffs: dict[int, float]
    relation: str
    rhs: float

    def __post_init__(self):
        coeffs = {int(j): float(c) for j, c in self.coeffs.items() if c != 0.0}
        if not coeffs:
            raise ValueError("constraint needs at least one nonzero coefficient")
        if not all(np.isfinite(list(coeffs.values()))) or not np.isfinite(self.rhs):
            raise ValueError("constraint has a non-finite value")
        if self.relation not in _RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "rhs", float(self.rhs))

    def violation(self, x: np.ndarray) -> float:
        """How far ``x`` is from satisfying the constraint (0 when satisfied)."""
        lhs = sum(c * x[j] for j, c in self.coeffs.items())
        if self.relation == LE:
            return max(0.0, lhs - self.rhs)
        if self.relation == GE:
            return max(0.0, self.rhs - lhs)
        return abs(lhs - self.rhs)

    def scaled(self, factor: float) -> "LinearConstraint":
        if factor <= 0:
            raise ValueError("scaling factor must be positive")
        return LinearConstraint(
            {j: c * factor for j, c in self.coeffs.items()}, self.relation, self.rhs * factor
        )


@dataclass
class LinearProgram:
    """Constraint system over ``n_vars`` real variables, with optional box bounds."""

    n_vars: int
    constraints: list[LinearConstraint] = field(default_factory=list)
    bounds: Optional[list[tuple[Optional[float], Optional[float]]]] = None

    def __post_init__(self):
        if self.n_vars <= 0:
            raise ValueError("n_vars must be positive")
        if self.bounds is None:
            self.bounds = [(None, None)] * self.n_vars
        if len(self.bounds) != self.n_vars:
            raise ValueError("bounds length must equal n_vars")
        for lo, hi in self.bounds:
            if lo is not None and hi is not None and lo > hi:
                raise ValueError(f"bound lower {lo} exceeds upper {hi}")
        for c in self.constraints:
            if any(j >= self.n_vars or j < 0 for j in c.coeffs):
                raise ValueError("constraint references a variable outside the program")

    def max_violation(self, x: np.ndarray) -> float:
        worst = 0.0
        for c in self.constraints:
            worst = max(worst, c.violation(x))
        for j, (lo, hi) in enumerate(self.bounds):
            if lo is not None:
                worst = max(worst, lo - x[j])
            if hi is not None:
                worst = max(worst, x[j] - hi)
        return worst


@dataclass(frozen=True)
class FeasibilityResult:
    status: str  # "feasible" | "infeasible"
    point: Optional[np.ndarray] = None

    @property
    def is_feasible(self) -> bool:
        return self.status == "feasible"


def _oriented_rows(lp: LinearProgram) -> tuple[np.ndarray, np.ndarray]:
    """All constraints and bounds as dense ``a . x <= b`` rows."""
    rows = []
    rhs = []

    def add(vec, b):
        rows.append(vec)
        rhs.append(b)

    for c in lp.constraints:
        vec = np.zeros(lp.n_vars)
        for j, coeff in c.coeffs.items():
            vec[j] = coeff
        if c.relation in (LE, EQ):
            add(vec, c.rhs)
        if c.relation in (GE, EQ):
            add(-vec, -c.rhs)
    for j, (lo, hi) in enumerate(lp.bounds):
        if hi is not None:
            vec = np.zeros(lp.n_vars)
            vec[j] = 1.0
            add(vec, hi)
        if lo is not None:
            vec = np.zeros(lp.n_vars)
            vec[j] = -1.0
            add(vec, -lo)
    if not rows:
        return np.zeros((0, lp.n_vars)), np.zeros(0)
    return np.array(rows), np.array(rhs)


def solve_feasibility(
    lp: LinearProgram,
    tol: float = TAU_LP,
    dump_csv: Optional[Union[str, Path]] = None,
) -> FeasibilityResult:
    """Decide feasibility of ``lp``; feasible results carry a witness point.

    The witness satisfies every constraint and bound within ``tol``. An
    infeasible verdict means the phase-1 optimum stayed above ``tol``.
    Raises :class:`LpInstabilityError` when pivoting gives out.
    """
    A_le, b_le = _oriented_rows(lp)
    m = A_le.shape[0]
    n = lp.n_vars
    if m == 0:
        return FeasibilityResult("feasible", np.zeros(n))

    # Standard form: free vars split into positive/negative parts, one slack
    # per row, artificials only where the slack cannot start in the basis.
    n_split = 2 * n
    neg = b_le < 0
    A = np.where(neg[:, None], -A_le, A_le)
    b = np.where(neg, -b_le, b_le)
    slack_sign = np.where(neg, -1.0, 1.0)

    art_rows = np.flatnonzero(neg)
    n_art = art_rows.size
    n_total = n_split + m + n_art

    T = np.zeros((m, n_total + 1))
    T[:, 0:n_split:2] = A
    T[:, 1:n_split:2] = -A
    T[np.arange(m), n_split + np.arange(m)] = slack_sign
    for k, i in enumerate(art_rows):
        T[i, n_split + m + k] = 1.0
    T[:, -1] = b

    basis = np.array(
        [n_split + m + int(np.searchsorted(art_rows, i)) if neg[i] else n_split + i
         for i in range(m)],
        dtype=np.int64,
    )

    cost = np.zeros(n_total)
    cost[n_split + m:] = 1.0

    cap = 50 * (lp.n_vars + len(lp.constraints) + m)
    for _ in range(cap):
        reduced = cost - cost[basis] @ T[:, :-1]
        entering = -1
        for j in range(n_total):  # Bland: lowest index with negative reduced cost
            if reduced[j] < -_PIVOT_EPS:
                entering = j
                break
        if entering < 0:
            break
        col = T[:, entering]
        ratios = np.full(m, np.inf)
        ok = col > _PIVOT_EPS
        ratios[ok] = T[ok, -1] / col[ok]
        best = np.min(ratios)
        if not np.isfinite(best):
            # Phase-1 objective is bounded below by 0, so an unbounded ray
            # can only be numerical noise.
            raise LpInstabilityError("unbounded pivot column in phase-1")
        candidates = np.flatnonzero(ratios <= best + _PIVOT_EPS)
        leaving = candidates[np.argmin(basis[candidates])]  # Bland tie-break
        pivot = T[leaving, entering]
        T[leaving] /= pivot
        for i in range(m):
            if i != leaving and T[i, entering] != 0.0:
                T[i] -= T[i, entering] * T[leaving]
        basis[leaving] = entering
    else:
        raise LpInstabilityError(f"iteration cap {cap} exceeded")

    if dump_csv is not None:
        _dump_tableau(Path(dump_csv), T, basis)

    objective = float(np.sum(T[cost[basis] > 0, -1])) if n_art else 0.0
    if objective > tol:
        return FeasibilityResult("infeasible")

    values = np.zeros(n_total)
    values[basis] = T[:, -1]
    point = values[0:n_split:2] - values[1:n_split:2]

    worst = lp.max_violation(point)
    if worst > tol:
        raise LpInstabilityError(
            f"feasible witness failed its re-check (violation {worst:.3e} > {tol:.1e})"
        )
    return FeasibilityResult("feasible", point)


def _dump_tableau(path: Path, T: np.ndarray, basis: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["basis"] + [f"c{j}" for j in range(T.shape[1] - 1)] + ["rhs"])
        for i in range(T.shape[0]):
            writer.writerow([int(basis[i])] + [repr(v) for v in T[i]])
