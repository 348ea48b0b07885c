"""Statistical studies: pairwise distances, linear-region maps, overlap tables.

Everything here emits plain data (dataclasses + CSV); plotting is left to
external tooling.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import IO, Iterable, Optional, Sequence, Union

import numpy as np

from .model import Network
from .nap import Nap, overlap_ratio

L1 = "l1"
L2 = "l2"
LINF = "linf"
NORMS = (L1, L2, LINF)


@dataclass(frozen=True)
class DistanceStats:
    """Distance distribution over all unordered same-label pairs of one label."""

    label: int
    norm: str
    sample_count: int
    pair_count: int
    min: float
    max: float
    mean: float
    bin_edges: np.ndarray
    bin_counts: np.ndarray


def _condensed_distances(X: np.ndarray, norm: str) -> np.ndarray:
    chunks = []
    for i in range(X.shape[0] - 1):
        diff = np.abs(X[i + 1 :] - X[i])
        if norm == L1:
            chunks.append(diff.sum(axis=1))
        elif norm == L2:
            chunks.append(np.sqrt((diff * diff).sum(axis=1)))
        elif norm == LINF:
            chunks.append(diff.max(axis=1))
        else:
            raise ValueError(f"unknown norm {norm!r}")
    return np.concatenate(chunks) if chunks else np.zeros(0)


def pairwise_distances(
    dataset: Iterable[tuple[int, Sequence[float]]],
    norm: str = LINF,
    bins: int = 100,
    max_samples_per_label: int = 2000,
    seed: int = 0,
) -> tuple[list[DistanceStats], list[str]]:
    """Per-label same-label pair distance statistics.

    Labels with fewer than two samples are skipped and reported in the
    returned notices. Labels above the sample cap are subsampled
    deterministically from ``seed``.
    """
    if norm not in NORMS:
        raise ValueError(f"unknown norm {norm!r}")
    by_label: dict[int, list[np.ndarray]] = {}
    for label, x in dataset:
        by_label.setdefault(int(label), []).append(np.asarray(x, dtype=np.float64))
    stats = []
    notices = []
    rng = np.random.default_rng(seed)
    for label in sorted(by_label):
        vectors = by_label[label]
        if len(vectors) < 2:
            notices.append(f"label {label}: only {len(vectors)} sample(s), skipped")
            continue
        X = np.stack(vectors)
        if X.shape[0] > max_samples_per_label:
            keep = rng.choice(X.shape[0], size=max_samples_per_label, replace=False)
            X = X[np.sort(keep)]
        d = _condensed_distances(X, norm)
        hi = float(d.max())
        counts, edges = np.histogram(d, bins=bins, range=(0.0, hi if hi > 0 else 1.0))
        stats.append(
            DistanceStats(
                label=label,
                norm=norm,
                sample_count=X.shape[0],
                pair_count=d.shape[0],
                min=float(d.min()),
                max=hi,
                mean=float(d.mean()),
                bin_edges=edges,
                bin_counts=counts,
            )
        )
    return stats, notices


def distance_summary_to_csv(stats: Iterable[DistanceStats], dest: IO) -> None:
    writer = csv.writer(dest)
    writer.writerow(["label", "norm", "min", "max", "mean"])
    for s in stats:
        writer.writerow([s.label, s.norm, repr(s.min), repr(s.max), repr(s.mean)])


def distance_histogram_to_csv(stats: Iterable[DistanceStats], dest: IO) -> None:
    writer = csv.writer(dest)
    writer.writerow(["label", "bin_lo", "bin_hi", "count"])
    for s in stats:
        for i in range(s.bin_counts.shape[0]):
            writer.writerow(
                [s.label, repr(float(s.bin_edges[i])), repr(float(s.bin_edges[i + 1])), int(s.bin_counts[i])]
            )


# -- 2D region maps ------------------------------------------------------


@dataclass
class RegionMap:
    """Grid of activation signatures and predicted labels over a 2D box.

    ``signature_ids[i, j]`` belongs to the cell center at (xs[i], ys[j]);
    ids are assigned in first-encounter scan order, so two runs over the
    same grid agree.
    """

    xs: np.ndarray
    ys: np.ndarray
    signature_ids: np.ndarray
    labels: np.ndarray
    signatures: list[tuple[bool, ...]]

    @property
    def distinct_signatures(self) -> int:
        return len(self.signatures)

    def to_csv(self, dest: IO) -> None:
        writer = csv.writer(dest)
        writer.writerow(["x0", "x1", "signature_id", "label"])
        for i, x0 in enumerate(self.xs):
            for j, x1 in enumerate(self.ys):
                writer.writerow(
                    [repr(float(x0)), repr(float(x1)), int(self.signature_ids[i, j]), int(self.labels[i, j])]
                )


def linear_region_map(
    net: Network,
    box: Optional[tuple[tuple[float, float], tuple[float, float]]] = None,
    resolution: Union[int, tuple[int, int]] = 200,
) -> RegionMap:
    """Sample signatures and predictions at the centers of a regular 2D grid.

    Cells sharing a signature id lie in the same linear region of the
    network (up to grid resolution).
    """
    if net.input_dim != 2:
        raise ValueError(f"region maps need a 2-input network, got input_dim={net.input_dim}")
    if box is None:
        box = ((0.0, 1.0), (0.0, 1.0))
    if isinstance(resolution, int):
        resolution = (resolution, resolution)
    rx, ry = resolution
    if rx < 2 or ry < 2:
        raise ValueError("resolution must be at least 2 per axis")
    (lo0, hi0), (lo1, hi1) = box
    xs = lo0 + (np.arange(rx) + 0.5) * (hi0 - lo0) / rx
    ys = lo1 + (np.arange(ry) + 0.5) * (hi1 - lo1) / ry
    ids = np.zeros((rx, ry), dtype=np.int64)
    labels = np.zeros((rx, ry), dtype=np.int64)
    seen: dict[bytes, int] = {}
    signatures: list[tuple[bool, ...]] = []
    for i, x0 in enumerate(xs):
        for j, x1 in enumerate(ys):
            y, sig = net.forward_with_signature(np.array([x0, x1]))
            key = sig.states.tobytes()
            sid = seen.get(key)
            if sid is None:
                sid = len(signatures)
                seen[key] = sid
                signatures.append(tuple(bool(b) for b in sig.states))
            ids[i, j] = sid
            labels[i, j] = int(np.argmax(y))
    return RegionMap(xs=xs, ys=ys, signature_ids=ids, labels=labels, signatures=signatures)


# -- overlap tables --------------------------------------------------------


@dataclass
class OverlapTable:
    """Pairwise support-overlap ratios between labeled patterns.

    Entry (row, col) is the fraction of the *column* pattern's neurons that
    the row pattern also constrains; the diagonal is 1 by construction and
    excluded from the per-column maxima.
    """

    labels: list[int]
    matrix: np.ndarray
    column_max: np.ndarray

    def to_csv(self, dest: IO) -> None:
        writer = csv.writer(dest)
        writer.writerow(["label"] + [str(l) for l in self.labels])
        for i, l in enumerate(self.labels):
            writer.writerow([l] + [repr(float(v)) for v in self.matrix[i]])
        writer.writerow(["max_other"] + [repr(float(v)) for v in self.column_max])


def overlap_table(naps: dict[int, Nap], match_polarity: bool = False) -> OverlapTable:
    if len(naps) < 2:
        raise ValueError("overlap table needs at least two patterns")
    labels = sorted(naps)
    for l in labels:
        if naps[l].is_trivial:
            raise ValueError(f"pattern for label {l} is trivial (empty support)")
    n = len(labels)
    matrix = np.zeros((n, n))
    for r, row_label in enumerate(labels):
        for c, col_label in enumerate(labels):
            matrix[r, c] = overlap_ratio(naps[col_label], naps[row_label], match_polarity)
    off_diag = matrix.copy()
    np.fill_diagonal(off_diag, -np.inf)
    column_max = off_diag.max(axis=0)
    return OverlapTable(labels=labels, matrix=matrix, column_max=column_max)
