"""Point clouds with distance features.

The data set induced by a finite metric space uses the functions
``x -> d(x, y)`` (one per point ``y``) as features together with the uniform
measure. Under the uniform measure a window of atoms holding ``m`` of the
``n`` points has mass ``m/n``, so the whole observable-diameter profile is a
step function on the grid ``{0, 1/n, ..., 1}``.
"""
from __future__ import annotations

import math
from enum import Enum
from fractions import Fraction
from typing import Iterator, NamedTuple, Optional

import numpy as np
from scipy.spatial.distance import cdist

from .core import (
    GeometricDataSet,
    ObsDiamProfile,
    PointMeasure,
    WeightedValueDistribution,
    delta,
    pushforward,
    scale,
)

UNIT_NORM_TOL = 1e-9
DEFAULT_MAX_MATERIALIZED = 20_000
_BLOCK_BUDGET = 2_000_000  # doubles per block of feature columns


class MetricKind(str, Enum):
    EUCLIDEAN = "euclidean"
    GEODESIC_SPHERE = "geodesic_sphere"
    NORMALIZED_HAMMING = "normalized_hamming"


class PointCloud:
    """An ``n x d`` table of finite coordinates, ``n, d >= 1``."""

    __slots__ = ("points",)

    def __init__(self, points):
        pts = np.array(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise ValueError(f"point cloud must be a non-empty n x d table, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite coordinates")
        pts.setflags(write=False)
        self.points = pts

    @property
    def n_points(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]

    def __repr__(self) -> str:
        return f"PointCloud(n={self.n_points}, d={self.dim})"


def check_metric(cloud: PointCloud, metric: MetricKind) -> MetricKind:
    metric = MetricKind(metric)
    pts = cloud.points
    if metric is MetricKind.GEODESIC_SPHERE:
        norms = np.linalg.norm(pts, axis=1)
        bad = np.flatnonzero(np.abs(norms - 1.0) > UNIT_NORM_TOL)
        if bad.size:
            raise ValueError(f"geodesic_sphere needs unit-norm rows; row {bad[0]} has norm {norms[bad[0]]}")
    elif metric is MetricKind.NORMALIZED_HAMMING:
        bad = np.argwhere((pts != 0.0) & (pts != 1.0))
        if bad.size:
            i, j = bad[0]
            raise ValueError(f"normalized_hamming needs 0/1 coordinates; found {pts[i, j]} at row {i}")
    return metric


def distance_block(cloud: PointCloud, metric: MetricKind, cols: slice) -> np.ndarray:
    """Distances ``d(x, y)`` for all ``x`` (rows) and ``y`` in ``cols``."""
    pts = cloud.points
    ys = pts[cols]
    if metric is MetricKind.EUCLIDEAN:
        block = cdist(pts, ys, "euclidean")
    elif metric is MetricKind.NORMALIZED_HAMMING:
        block = cdist(pts, ys, "hamming")
    else:
        block = np.arccos(np.clip(pts @ ys.T, -1.0, 1.0))
        start = cols.start or 0
        idx = np.arange(block.shape[1])
        block[start + idx, idx] = 0.0
    return block


def _blocks(cloud: PointCloud, metric: MetricKind, max_materialized: int) -> Iterator[np.ndarray]:
    n = cloud.n_points
    if n <= max_materialized:
        width = n
    else:
        width = max(1, min(n, _BLOCK_BUDGET // n))
    for start in range(0, n, width):
        yield distance_block(cloud, metric, slice(start, min(n, start + width)))


def distance_features(cloud: PointCloud, metric: MetricKind = MetricKind.EUCLIDEAN) -> GeometricDataSet:
    """The induced data set: column ``y`` holds ``d(., y)``; uniform measure."""
    metric = check_metric(cloud, metric)
    D = distance_block(cloud, metric, slice(0, cloud.n_points))
    return GeometricDataSet(D, PointMeasure.uniform(cloud.n_points))


class Normalized(NamedTuple):
    dataset: GeometricDataSet
    factor: float
    degenerate: bool


def empirical_diameter(ds: GeometricDataSet) -> float:
    """max over point pairs of sup_f |f(x) - f(y)|, i.e. the largest feature range."""
    if ds.n_features == 0 or ds.n_points == 1:
        return 0.0
    f = ds.features
    return float(np.max(f.max(axis=0) - f.min(axis=0)))


def normalize_by_diameter(ds: GeometricDataSet) -> Normalized:
    diam = empirical_diameter(ds)
    if diam <= 0:
        return Normalized(ds, 1.0, True)
    return Normalized(scale(ds, 1.0 / diam), 1.0 / diam, False)


def min_diam_matrix(dist: WeightedValueDistribution, n: int) -> list:
    """Minimal window diameter reaching mass ``m/n``, for ``m = 0..n``.

    Every mass must be a multiple of ``1/n``. Windows are enumerated by their
    left atom, accumulating point counts to the right; a downward pass then
    makes the vector monotone.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    counts = []
    for m in dist.masses:
        c = m * n
        r = round(c)
        if isinstance(c, Fraction) and c != r or abs(c - r) > 1e-9 or r < 1:
            raise ValueError(f"mass {m} is not a positive multiple of 1/{n}")
        counts.append(int(r))
    if sum(counts) != n:
        raise ValueError(f"point counts sum to {sum(counts)}, expected {n}")
    vals = dist.values
    full = vals[-1] - vals[0]
    result = [full] * (n + 1)
    result[0] = full - full
    k = len(vals)
    for i in range(k):
        count = 0
        for j in range(i, k):
            count += counts[j]
            width = vals[j] - vals[i]
            if result[count] > width:
                result[count] = width
    for i in range(n, 0, -1):
        if result[i] < result[i - 1]:
            result[i - 1] = result[i]
    return result


def _grid_profile(levels: np.ndarray) -> ObsDiamProfile:
    # levels[m] = ObsDiam at required mass m/n; value on [j/n, (j+1)/n) uses m = n - j
    n = len(levels) - 1
    bps = tuple(j / n for j in range(n + 1))
    vals = tuple(float(levels[n - j]) for j in range(n))
    return ObsDiamProfile(bps, vals)


def _window_sweep(sorted_cols: np.ndarray) -> Iterator[tuple[int, np.ndarray]]:
    """Yield ``(m, w)`` where ``w[f]`` is the narrowest ``m``-sample window of column ``f``."""
    n = sorted_cols.shape[0]
    buf = np.empty_like(sorted_cols)
    for m in range(2, n + 1):
        k = n - m + 1
        np.subtract(sorted_cols[m - 1:], sorted_cols[:k], out=buf[:k])
        yield m, buf[:k].min(axis=0)


class _SweepResult(NamedTuple):
    levels: np.ndarray
    diameter: float
    levy: Optional[float]


def _sweep(cloud: PointCloud, metric: MetricKind, *, normalize: bool, want_levy: bool,
           max_materialized: int) -> _SweepResult:
    n = cloud.n_points
    diam = 0.0
    if normalize and want_levy:
        for block in _blocks(cloud, metric, max_materialized):
            diam = max(diam, float(block.max()))
    factor = 1.0 / diam if diam > 0 else 1.0
    levels = np.zeros(n + 1)
    levy = 0.0
    outside = 1.0 - np.arange(n + 1) / n
    for block in _blocks(cloud, metric, max_materialized):
        cols = np.sort(block, axis=0)
        if not (normalize and want_levy):
            diam = max(diam, float((cols[-1] - cols[0]).max()))
        if want_levy:
            cols = cols * factor
            # a single atom: width 0, outside mass 1 - 1/n; the empty window gives 1
            best = np.full(cols.shape[1], outside[1] if n > 1 else 0.0)
        for m, w in _window_sweep(cols):
            top = float(w.max())
            if top > levels[m]:
                levels[m] = top
            if want_levy:
                np.minimum(best, np.maximum(w / 2, outside[m]), out=best)
        if want_levy:
            levy = max(levy, float(best.max()))
    if normalize and not want_levy and diam > 0:
        levels = levels / diam
    return _SweepResult(levels, diam, levy if want_levy else None)


def obs_diam_distance(cloud: PointCloud, metric: MetricKind = MetricKind.EUCLIDEAN, *,
                      normalize: bool = False, method: str = "sweep",
                      max_materialized: int = DEFAULT_MAX_MATERIALIZED) -> ObsDiamProfile:
    """Observable-diameter profile of the distance-feature data set.

    ``method="sweep"`` sorts each feature column and scans windows of ``m``
    consecutive samples for every ``m`` (vectorized over features).
    ``method="algorithm"`` runs the per-feature MinDiamMatrix construction
    literally; both give the same profile. Cost is O(c n^2 + n^3).
    """
    metric = check_metric(cloud, metric)
    if method == "algorithm":
        ds = distance_features(cloud, metric)
        n = ds.n_points
        levels = np.zeros(n + 1)
        for j in range(ds.n_features):
            row = min_diam_matrix(pushforward(ds.column(j), ds.measure), n)
            np.maximum(levels, row, out=levels)
        if normalize:
            diam = levels[n]
            if diam > 0:
                levels = levels / diam
        return _grid_profile(levels)
    if method != "sweep":
        raise ValueError(f"unknown method {method!r}")
    res = _sweep(cloud, metric, normalize=normalize, want_levy=False,
                 max_materialized=max_materialized)
    return _grid_profile(res.levels)


class DistanceAnalysis(NamedTuple):
    profile: ObsDiamProfile
    delta: float
    diameter: float
    factor: float
    degenerate: bool
    levy_defect: Optional[float]


def analyze_distances(cloud: PointCloud, metric: MetricKind = MetricKind.EUCLIDEAN, *,
                      normalize: bool = True, levy: bool = False,
                      max_materialized: int = DEFAULT_MAX_MATERIALIZED) -> DistanceAnalysis:
    """Profile, Delta and optionally the Levy defect in a single sweep."""
    metric = check_metric(cloud, metric)
    res = _sweep(cloud, metric, normalize=normalize, want_levy=levy,
                 max_materialized=max_materialized)
    prof = _grid_profile(res.levels)
    degenerate = res.diameter <= 0
    factor = 1.0 / res.diameter if normalize and not degenerate else 1.0
    return DistanceAnalysis(prof, delta(prof), res.diameter, factor, degenerate, res.levy)


def chavez_id(cloud: PointCloud, metric: MetricKind = MetricKind.EUCLIDEAN,
              include_diagonal: bool = True, *,
              max_materialized: int = DEFAULT_MAX_MATERIALIZED) -> Optional[float]:
    """mu^2 / (2 sigma^2) of the pairwise distance distribution.

    Pairs are ordered and, by default, include the zero-distance diagonal.
    Returns ``None`` when sigma is 0 (the value is undefined).
    """
    metric = check_metric(cloud, metric)
    n = cloud.n_points
    if n < 2:
        raise ValueError("Chavez ID needs at least two points")
    n_pairs = n * n if include_diagonal else n * (n - 1)

    def blocks():
        start = 0
        for block in _blocks(cloud, metric, max_materialized):
            if not include_diagonal:
                idx = np.arange(block.shape[1])
                block = block.copy()
                block[start + idx, idx] = np.nan
            start += block.shape[1]
            yield block

    total = math.fsum(float(np.nansum(b)) for b in blocks())
    mu = total / n_pairs
    ss = math.fsum(float(np.nansum((b - mu) ** 2)) for b in blocks())
    var = ss / n_pairs
    if var <= 0:
        return None
    return mu * mu / (2.0 * var)


def sample_sphere(dim: int, count: int, seed: Optional[int] = None) -> PointCloud:
    """``count`` uniform points on the unit ``dim``-sphere in R^(dim+1)."""
    if dim < 1 or count < 1:
        raise ValueError("dim and count must be >= 1")
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((count, dim + 1))
    x /= np.linalg.norm(x, axis=1, keepdims=True)
    return PointCloud(x)


def sample_hypercube(dim: int, count: int, seed: Optional[int] = None) -> PointCloud:
    """``count`` uniform vertices of {0,1}^dim."""
    if dim < 1 or count < 1:
        raise ValueError("dim and count must be >= 1")
    rng = np.random.default_rng(seed)
    return PointCloud(rng.integers(0, 2, size=(count, dim)).astype(float))


class StudyRow(NamedTuple):
    n: int
    delta: float
    sqrt_n_delta: float
    dimension: float


def scaling_study(kind: str, dims, count: int, seed: int) -> list[StudyRow]:
    """Delta of diameter-normalized distance features across dimensions."""
    if kind == "sphere":
        sampler, metric = sample_sphere, MetricKind.GEODESIC_SPHERE
    elif kind == "hypercube":
        sampler, metric = sample_hypercube, MetricKind.NORMALIZED_HAMMING
    else:
        raise ValueError(f"unknown study kind {kind!r}")
    rows = []
    for n in dims:
        cloud = sampler(n, count, seed)
        res = analyze_distances(cloud, metric, normalize=True)
        d = res.delta
        dim_value = math.inf if d == 0 else 1.0 / d**2
        rows.append(StudyRow(n, d, math.sqrt(n) * d, dim_value))
    return rows
