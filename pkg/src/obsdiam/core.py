"""Measure-level primitives for finite geometric data sets.

A geometric data set is a finite point set carrying a table of real-valued
features (one column per feature) and a fully supported probability measure.
Everything here is a pure function of immutable inputs.

Two arithmetic modes are supported transparently: ``float`` (comparisons on
probability mass use an absolute tolerance of ``1e-12``) and exact
``fractions.Fraction`` (no tolerance). The mode is taken from the measure.
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable, Optional, Sequence, Union

import numpy as np

Number = Union[float, Fraction]

MASS_TOL = 1e-12
ORACLE_MAX_ATOMS = 18


def _is_exact(x) -> bool:
    return isinstance(x, Rational) and not isinstance(x, bool)


def _check_finite(x, what: str = "value") -> None:
    if _is_exact(x):
        return
    if not math.isfinite(float(x)):
        raise ValueError(f"non-finite {what}: {x!r}")


def _tol_for(masses: Sequence[Number]) -> Number:
    return 0 if all(_is_exact(m) for m in masses) else MASS_TOL


def _mass_sum(masses: Sequence[Number]) -> Number:
    if all(_is_exact(m) for m in masses):
        return sum(masses, Fraction(0))
    return math.fsum(float(m) for m in masses)


@dataclass(frozen=True)
class WeightedValueDistribution:
    """A finitely supported probability measure on the real line."""

    values: tuple
    masses: tuple

    def __post_init__(self):
        values = tuple(self.values)
        masses = tuple(self.masses)
        if not values or len(values) != len(masses):
            raise ValueError("values and masses must be non-empty and aligned")
        for v in values:
            _check_finite(v)
        for a, b in zip(values, values[1:]):
            if not a < b:
                raise ValueError("values must be strictly increasing")
        if any(not m > 0 for m in masses):
            raise ValueError("masses must be positive")
        total = _mass_sum(masses)
        if abs(total - 1) > _tol_for(masses):
            raise ValueError(f"masses sum to {total}, not 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "masses", masses)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple]) -> "WeightedValueDistribution":
        """Build from (value, mass) pairs, merging duplicate values."""
        acc: dict = {}
        for v, m in pairs:
            _check_finite(v)
            acc[v] = acc.get(v, 0) + m
        keys = sorted(acc)
        return cls(tuple(keys), tuple(acc[k] for k in keys))

    @property
    def exact(self) -> bool:
        return all(_is_exact(m) for m in self.masses)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class PointMeasure:
    """Positive point weights summing to one."""

    weights: tuple

    def __post_init__(self):
        weights = tuple(self.weights)
        if not weights:
            raise ValueError("a point measure needs at least one point")
        if any(not w > 0 for w in weights):
            raise ValueError("point weights must be positive (full support)")
        total = _mass_sum(weights)
        if abs(total - 1) > _tol_for(weights):
            raise ValueError(f"point weights sum to {total}, not 1")
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, n: int, exact: bool = False) -> "PointMeasure":
        if n < 1:
            raise ValueError("n must be >= 1")
        w = Fraction(1, n) if exact else 1.0 / n
        return cls((w,) * n)

    @property
    def exact(self) -> bool:
        return all(_is_exact(w) for w in self.weights)

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True, eq=False)
class GeometricDataSet:
    """Points x features table together with a point measure.

    ``features`` has shape ``(n_points, n_features)``; it is a float array, or
    an object array of ``Fraction`` entries in exact mode. A table with zero
    feature columns is allowed and has observable diameter 0.
    """

    features: np.ndarray
    measure: PointMeasure = field(default=None)

    def __post_init__(self):
        feats = np.asarray(self.features)
        if feats.ndim == 1:
            feats = feats.reshape(-1, 1)
        if feats.ndim != 2:
            raise ValueError("feature table must be two-dimensional")
        if feats.dtype != object:
            feats = feats.astype(float, copy=True)
            if not np.all(np.isfinite(feats)):
                raise ValueError("feature table contains non-finite values")
        else:
            feats = feats.copy()
            for x in feats.flat:
                _check_finite(x, "feature value")
        feats.setflags(write=False)
        measure = self.measure
        if measure is None:
            measure = PointMeasure.uniform(feats.shape[0], exact=feats.dtype == object)
        if len(measure) != feats.shape[0]:
            raise ValueError(
                f"measure has {len(measure)} points, table has {feats.shape[0]} rows"
            )
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "measure", measure)

    @property
    def n_points(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def column(self, j: int) -> np.ndarray:
        return self.features[:, j]

    def select_features(self, columns: Sequence[int]) -> "GeometricDataSet":
        return GeometricDataSet(self.features[:, list(columns)], self.measure)


@dataclass(frozen=True)
class ObsDiamProfile:
    """Right-continuous antitone step function on [0, 1].

    The profile equals ``values[j]`` on ``[breakpoints[j], breakpoints[j+1])``.
    """

    breakpoints: tuple
    values: tuple

    def __post_init__(self):
        bps = tuple(self.breakpoints)
        vals = tuple(self.values)
        if len(bps) < 2 or len(vals) != len(bps) - 1:
            raise ValueError("need k+1 breakpoints for k values")
        if bps[0] != 0 or bps[-1] != 1:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if any(not a < b for a, b in zip(bps, bps[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if any(v < 0 for v in vals):
            raise ValueError("profile values must be non-negative")
        exact = all(_is_exact(v) for v in vals)
        for a, b in zip(vals, vals[1:]):
            if b > (a if exact else a + 1e-12 * max(1.0, abs(a))):
                raise ValueError(f"profile is not antitone: {a} followed by {b}")
        object.__setattr__(self, "breakpoints", bps)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls) -> "ObsDiamProfile":
        return cls((0, 1), (0,))

    @property
    def exact(self) -> bool:
        return all(_is_exact(x) for x in self.breakpoints + self.values)

    def value_at(self, alpha: Number) -> Number:
        if alpha >= 1:
            return 0
        if alpha < 0:
            raise ValueError("alpha must be >= 0")
        j = bisect.bisect_right(self.breakpoints, alpha) - 1
        return self.values[j]

    def merged(self) -> "ObsDiamProfile":
        """Drop breakpoints separating equal values."""
        bps = [self.breakpoints[0]]
        vals = [self.values[0]]
        for b, v in zip(self.breakpoints[1:-1], self.values[1:]):
            if v != vals[-1]:
                bps.append(b)
                vals.append(v)
        bps.append(self.breakpoints[-1])
        return ObsDiamProfile(tuple(bps), tuple(vals))

    def scaled(self, tau: Number) -> "ObsDiamProfile":
        if tau < 0:
            raise ValueError("scale factor must be non-negative")
        return ObsDiamProfile(self.breakpoints, tuple(v * tau for v in self.values))


@dataclass(frozen=True)
class DimensionReport:
    """Concentration summary of a data set."""

    delta: Number
    dimension: Number
    chavez_id: Optional[float] = None
    levy_defect: Optional[Number] = None
    n_points: Optional[int] = None
    n_features: Optional[int] = None
    chavez_computed: bool = False

    def __post_init__(self):
        if not 0 <= self.delta <= 1:
            raise ValueError("delta must lie in [0, 1]")
        if self.delta == 0:
            if not (isinstance(self.dimension, float) and math.isinf(self.dimension)):
                raise ValueError("dimension must be infinite when delta is 0")
        elif _is_exact(self.delta) and _is_exact(self.dimension):
            if self.dimension * self.delta**2 != 1:
                raise ValueError("dimension must equal 1/delta**2")
        elif abs(float(self.dimension) * float(self.delta) ** 2 - 1) > 1e-9:
            raise ValueError("dimension must equal 1/delta**2")

    @classmethod
    def from_delta(cls, delta: Number, **extra) -> "DimensionReport":
        return cls(delta=delta, dimension=intrinsic_dimension(delta), **extra)

    @property
    def exact(self) -> bool:
        return _is_exact(self.delta)


def pushforward(column: Sequence[Number], measure: PointMeasure) -> WeightedValueDistribution:
    """Image of ``measure`` under the feature ``column``."""
    if len(column) != len(measure):
        raise ValueError(
            f"column has {len(column)} entries but measure has {len(measure)} points"
        )
    acc: dict = {}
    for v, w in zip(column, measure.weights):
        if not _is_exact(v):
            v = float(v)
        _check_finite(v, "feature value")
        acc[v] = acc.get(v, 0) + w
    keys = sorted(acc)
    return WeightedValueDistribution(tuple(keys), tuple(acc[k] for k in keys))


def _prefix(masses: Sequence[Number]) -> list:
    cum = [masses[0] - masses[0]]
    for m in masses:
        cum.append(cum[-1] + m)
    return cum


def partial_diameter(dist: WeightedValueDistribution, alpha: Number) -> Number:
    """Smallest diameter of a set carrying mass at least ``1 - alpha``.

    Optimal sets can be taken to be windows of consecutive atoms; a sliding
    window finds the narrowest feasible one.
    """
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    vals, masses = dist.values, dist.masses
    zero = vals[0] - vals[0]
    tol = _tol_for(masses)
    need = 1 - alpha
    if need <= tol:
        return zero
    need -= tol
    cum = _prefix(masses)
    k = len(vals)
    best = None
    j = 0
    for i in range(k):
        if j < i:
            j = i
        while j < k and cum[j + 1] - cum[i] < need:
            j += 1
        if j == k:
            break
        width = vals[j] - vals[i]
        if best is None or width < best:
            best = width
    return zero if best is None else best


def observable_diameter(ds: GeometricDataSet, alpha: Number) -> Number:
    """Largest partial diameter over all feature pushforwards."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    best = 0
    for j in range(ds.n_features):
        pd = partial_diameter(pushforward(ds.column(j), ds.measure), alpha)
        if pd > best:
            best = pd
    return best


class _WindowStaircase:
    """min diameter over atom windows with mass >= level, as a step function."""

    def __init__(self, dist: WeightedValueDistribution):
        vals, masses = dist.values, dist.masses
        cum = _prefix(masses)
        pairs = []
        k = len(vals)
        for i in range(k):
            for j in range(i, k):
                pairs.append((cum[j + 1] - cum[i], vals[j] - vals[i]))
        pairs.sort(key=lambda p: p[0])
        self.masses = [p[0] for p in pairs]
        suffix = [p[1] for p in pairs]
        for t in range(len(suffix) - 2, -1, -1):
            if suffix[t + 1] < suffix[t]:
                suffix[t] = suffix[t + 1]
        self.suffix_min = suffix
        self.tol = _tol_for(masses)
        self.zero = vals[0] - vals[0]

    def __call__(self, level: Number) -> Number:
        if level <= self.tol:
            return self.zero
        idx = bisect.bisect_left(self.masses, level - self.tol)
        if idx == len(self.masses):
            idx -= 1
        return self.suffix_min[idx]


def _merge_close(points: list, tol: Number) -> list:
    out: list = []
    for p in sorted(points):
        if out and p - out[-1] <= tol:
            continue
        out.append(p)
    return out


def profile(ds: GeometricDataSet) -> ObsDiamProfile:
    """The exact step function alpha -> ObsDiam(ds; -alpha) on [0, 1].

    Breakpoints are 0, 1 and every ``1 - m`` where ``m`` is the mass of a
    window of atoms of some pushforward. Each value is the observable
    diameter at the midpoint of its interval.
    """
    exact = ds.measure.exact
    one = Fraction(1) if exact else 1.0
    zero = Fraction(0) if exact else 0.0
    if ds.n_features == 0:
        return ObsDiamProfile((zero, one), (zero,))
    stairs = []
    candidates = {zero, one}
    for j in range(ds.n_features):
        st = _WindowStaircase(pushforward(ds.column(j), ds.measure))
        stairs.append(st)
        for m in st.masses:
            a = one - m
            if zero < a < one:
                candidates.add(a)
    tol = 0 if exact else MASS_TOL
    bps = _merge_close(list(candidates), tol)
    if bps[-1] != one:
        # a candidate within tol of 1 swallowed the endpoint
        bps[-1] = one
    values = []
    for a, b in zip(bps, bps[1:]):
        level = one - (a + b) / 2
        values.append(max(st(level) for st in stairs))
    return ObsDiamProfile(tuple(bps), tuple(values))


def delta(p: ObsDiamProfile) -> Number:
    """Integral over [0, 1] of min(profile, 1)."""
    total = 0
    for a, b, v in zip(p.breakpoints, p.breakpoints[1:], p.values):
        total += (b - a) * min(v, 1)
    if not _is_exact(total):
        total = min(max(float(total), 0.0), 1.0)
    return total


def intrinsic_dimension(delta: Number) -> Number:
    """1 / delta**2, infinite for delta == 0."""
    if not 0 <= delta <= 1:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    if delta == 0:
        return math.inf
    if _is_exact(delta):
        return Fraction(1) / Fraction(delta) ** 2
    return 1.0 / (float(delta) ** 2)


def ky_fan_to_constant(dist: WeightedValueDistribution, c: Number) -> Number:
    """inf{eps >= 0 : mass(|f - c| > eps) <= eps} for the pushforward ``dist``.

    The tail mass t(eps) is a right-continuous step function dropping at the
    distances |v - c|, so the infimum is found by scanning its flat pieces.
    """
    tol = _tol_for(dist.masses)
    by_dist: dict = {}
    for v, m in zip(dist.values, dist.masses):
        r = abs(v - c)
        by_dist[r] = by_dist.get(r, 0) + m
    radii = sorted(by_dist)
    tail = _mass_sum(list(by_dist.values()))
    lo = radii[0] - radii[0]
    # on [lo, r) the tail mass is that of all atoms at distance >= r
    for r in radii:
        if lo < r:
            eps = lo if tail <= lo + tol else tail
            if eps < r:
                return eps
        tail -= by_dist[r]
        lo = r
    return lo


def _feature_levy_defect(dist: WeightedValueDistribution) -> Number:
    # min over windows of max(half width, mass outside); the empty window gives 1
    vals, masses = dist.values, dist.masses
    cum = _prefix(masses)
    k = len(vals)
    best = 1
    for i in range(k):
        for j in range(i, k):
            outside = max(1 - (cum[j + 1] - cum[i]), 0)
            cand = max((vals[j] - vals[i]) / 2, outside)
            if cand < best:
                best = cand
    if not dist.exact:
        best = float(best)
        if best < MASS_TOL:
            best = 0.0
    return best


def levy_defect(ds: GeometricDataSet) -> Number:
    """sup over features of inf over constants c of the Ky Fan distance to c."""
    best = 0
    for j in range(ds.n_features):
        d = _feature_levy_defect(pushforward(ds.column(j), ds.measure))
        if d > best:
            best = d
    return best


def scale(ds: GeometricDataSet, tau: Number) -> GeometricDataSet:
    """Multiply every feature by ``tau``; the measure is unchanged."""
    if not _is_exact(tau) and not math.isfinite(float(tau)):
        raise ValueError("scale factor must be finite")
    if tau < 0:
        raise ValueError("scale factor must be non-negative")
    return GeometricDataSet(ds.features * tau, ds.measure)


@lru_cache(maxsize=64)
def _subset_table(dist: WeightedValueDistribution, exact: bool):
    # exact is part of the key: float and Fraction atoms hash alike
    k = len(dist)
    codes = np.arange(1, 1 << k, dtype=np.int64)
    bits = ((codes[:, None] >> np.arange(k)) & 1).astype(bool)
    vals = np.array([float(v) for v in dist.values])
    lo = np.argmax(bits, axis=1)
    hi = k - 1 - np.argmax(bits[:, ::-1], axis=1)
    diam = vals[hi] - vals[lo]
    if exact:
        masses = [
            sum((dist.masses[i] for i in range(k) if code >> i & 1), Fraction(0))
            for code in codes.tolist()
        ]
        exact_diam = [dist.values[h] - dist.values[l] for l, h in zip(lo.tolist(), hi.tolist())]
        return masses, exact_diam
    masses = bits.astype(float) @ np.array([float(m) for m in dist.masses])
    return masses, diam


def oracle_partial_diameter(dist: WeightedValueDistribution, alpha: Number) -> Number:
    """Brute-force partial diameter over all subsets of atoms (test support)."""
    k = len(dist)
    if k > ORACLE_MAX_ATOMS:
        raise ValueError(f"oracle supports at most {ORACLE_MAX_ATOMS} atoms, got {k}")
    zero = dist.values[0] - dist.values[0]
    tol = _tol_for(dist.masses)
    need = 1 - alpha
    if need <= tol:
        return zero
    masses, diam = _subset_table(dist, dist.exact)
    if dist.exact:
        feasible = [d for m, d in zip(masses, diam) if m >= need]
        return min(feasible)
    ok = masses >= need - tol
    return float(diam[ok].min())
