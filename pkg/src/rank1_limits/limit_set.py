"""Brute-force limit sets and Hausdorff distances on the round sphere."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import EmptySample, LikelyIndiscrete
from .groups import PeripheralSpec, Representation, Word, word_levels
from .moebius import BoundaryPoint, batch_apply, batch_identity_distance, batch_limit_data

DEDUP_TOL = 1e-9

# generic reference point for orbit sampling
REFERENCE_POINT = BoundaryPoint.from_complex(0.1234 + 0.5678j)


def chord_to_angle(chord):
    return 2 * np.arcsin(np.clip(np.asarray(chord) / 2, 0.0, 1.0))


def angle_to_chord(angle: float) -> float:
    return 2 * math.sin(angle / 2)


@dataclass(frozen=True)
class LimitSetSample:
    """Finite point cloud approximating a limit set.

    ``points`` is an (N, 3) array of unit vectors sorted lexicographically;
    ``codes`` holds, when known, the shortlex-first word producing each point.
    """

    points: np.ndarray
    depth: int
    resolution: float
    codes: tuple = field(default=(), compare=False)

    def __len__(self):
        return len(self.points)

    def boundary_points(self) -> list[BoundaryPoint]:
        return [BoundaryPoint.from_vector(p) for p in self.points]


def dedup_points(points: np.ndarray, tol: float = DEDUP_TOL) -> np.ndarray:
    """Indices of points kept after merging near-duplicates.

    Points closer than ``tol`` are chained into clusters; each cluster
    keeps its earliest row.
    """
    n = len(points)
    if n == 0:
        return np.zeros(0, dtype=int)
    tree = cKDTree(points)
    pairs = tree.query_pairs(angle_to_chord(tol), output_type="ndarray")
    if len(pairs) == 0:
        return np.arange(n)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    first = np.full(labels.max() + 1, n)
    np.minimum.at(first, labels, np.arange(n))
    return np.sort(first)


def nearest_neighbor_spacing(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    d, _ = cKDTree(points).query(points, k=2)
    return float(chord_to_angle(d[:, 1]).max())


def make_sample(points: np.ndarray, depth: int, codes=None, resolution=None) -> LimitSetSample:
    """Deduplicate (earlier rows win), sort by coordinates and measure spacing."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    keep = dedup_points(points)
    pts = points[keep]
    order = np.lexsort((pts[:, 2], pts[:, 1], pts[:, 0]))
    pts = pts[order]
    kept_codes = ()
    if codes is not None:
        kept_codes = tuple(codes[i] for i in keep[order])
    if resolution is None:
        resolution = nearest_neighbor_spacing(pts)
    return LimitSetSample(pts, depth, float(resolution), kept_codes)


def check_discreteness(rep: Representation, radius: int = 3, tol: float = 1e-6) -> None:
    for n, level in enumerate(word_levels(rep, radius)):
        if n == 0:
            continue
        close = np.nonzero(batch_identity_distance(level.mats) < tol)[0]
        if len(close):
            w = rep.group.format(level.word(int(close[0])))
            raise LikelyIndiscrete(f"word {w!r} maps within {tol} of the identity")


def sample_limit_set(
    rep: Representation,
    depth: int,
    basepoint_policy: str = "fixed",
) -> LimitSetSample:
    """Sample the limit set from group elements of word length exactly ``depth``.

    ``basepoint_policy`` is ``"fixed"`` (attracting or parabolic fixed
    points, the default), ``"orbit"`` (images of a reference point) or
    ``"both"``.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if basepoint_policy not in ("fixed", "orbit", "both"):
        raise ValueError(f"unknown basepoint policy {basepoint_policy!r}")
    check_discreteness(rep)
    level = None
    for level in word_levels(rep, depth):
        pass
    chunks, rows = [], []
    if basepoint_policy in ("fixed", "both"):
        _, pts = batch_limit_data(level.mats)
        good = np.nonzero(~np.isnan(pts[:, 0]))[0]
        chunks.append(pts[good])
        rows.append(good)
    if basepoint_policy in ("orbit", "both"):
        chunks.append(batch_apply(level.mats, REFERENCE_POINT.vector))
        rows.append(np.arange(len(level)))
    points = np.concatenate(chunks) if chunks else np.zeros((0, 3))
    row_ids = np.concatenate(rows) if rows else np.zeros(0, dtype=int)
    codes = [level.word(int(i)) for i in row_ids]
    return make_sample(points, depth, codes)


def hausdorff_distance(A: LimitSetSample, B: LimitSetSample) -> float:
    pa = A.points if isinstance(A, LimitSetSample) else np.asarray(A)
    pb = B.points if isinstance(B, LimitSetSample) else np.asarray(B)
    if len(pa) == 0 or len(pb) == 0:
        raise EmptySample("Hausdorff distance needs two nonempty samples")
    dab, _ = cKDTree(pb).query(pa, k=1)
    dba, _ = cKDTree(pa).query(pb, k=1)
    return float(chord_to_angle(max(dab.max(), dba.max())))


def parabolic_fiber(rep: Representation, peripheral: PeripheralSpec, depth: int) -> LimitSetSample:
    """Limit set of the image of one peripheral subgroup."""
    sub = rep.restrict(peripheral)
    sample = sample_limit_set(sub, depth)
    # translate codes back to words of the ambient group
    gens = peripheral.generators
    codes = []
    for w in sample.codes:
        out = Word()
        for x in w.letters:
            g = gens[abs(x) - 1]
            out = out * (g if x > 0 else g.inverse())
        codes.append(out)
    return LimitSetSample(sample.points, depth, sample.resolution, tuple(codes))
