"""Formal contexts as geometric data sets.

A finite context ``(G, M, I)`` becomes the data set on the attribute set
``M`` (uniform measure) whose features are ``|A|/|G| * 1_B`` for every formal
concept ``(A, B)``. Such a feature has a partial diameter of ``|A|/|G|`` exactly
when ``alpha < |B|/|M| < 1 - alpha`` and zero otherwise, so only the multiset
of concept sizes matters. All quantities here are exact fractions.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

import numpy as np

from .core import DimensionReport, GeometricDataSet, ObsDiamProfile, PointMeasure, delta

DEFAULT_CONCEPT_CAP = 1 << 24


class ConceptOverflowError(RuntimeError):
    """Raised when concept enumeration exceeds the caller's cap."""

    def __init__(self, cap: int):
        super().__init__(f"concept count exceeds cap of {cap}")
        self.cap = cap


def _bits_of(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _to_mask(indices: Iterable[int], size: int) -> int:
    mask = 0
    for i in indices:
        if not 0 <= i < size:
            raise IndexError(f"index {i} out of range 0..{size - 1}")
        mask |= 1 << i
    return mask


@dataclass(frozen=True, eq=False)
class FormalContext:
    """Objects, attributes and a boolean incidence matrix (objects x attributes)."""

    objects: tuple
    attributes: tuple
    incidence: np.ndarray = field(repr=False)

    def __post_init__(self):
        objs = tuple(str(o) for o in self.objects)
        attrs = tuple(str(a) for a in self.attributes)
        if not objs or not attrs:
            raise ValueError("a formal context needs non-empty object and attribute sets")
        if len(set(objs)) != len(objs):
            raise ValueError("object names must be unique")
        if len(set(attrs)) != len(attrs):
            raise ValueError("attribute names must be unique")
        inc = np.array(self.incidence, dtype=bool)
        if inc.shape != (len(objs), len(attrs)):
            raise ValueError(f"incidence has shape {inc.shape}, expected {(len(objs), len(attrs))}")
        inc.setflags(write=False)
        object.__setattr__(self, "objects", objs)
        object.__setattr__(self, "attributes", attrs)
        object.__setattr__(self, "incidence", inc)

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_attributes(self) -> int:
        return len(self.attributes)

    @cached_property
    def row_masks(self) -> tuple:
        return tuple(_to_mask(np.flatnonzero(row).tolist(), self.n_attributes) for row in self.incidence)

    @cached_property
    def col_masks(self) -> tuple:
        return tuple(_to_mask(np.flatnonzero(col).tolist(), self.n_objects) for col in self.incidence.T)

    @property
    def all_objects(self) -> int:
        return (1 << self.n_objects) - 1

    @property
    def all_attributes(self) -> int:
        return (1 << self.n_attributes) - 1

    def up_mask(self, extent: int) -> int:
        """Attributes shared by every object in ``extent`` (bitmasks)."""
        n_ext = extent.bit_count()
        if n_ext <= self.n_attributes:
            out = self.all_attributes
            rows = self.row_masks
            for g in _bits_of(extent):
                out &= rows[g]
                if not out:
                    break
            return out
        out = 0
        for m, col in enumerate(self.col_masks):
            if extent & ~col == 0:
                out |= 1 << m
        return out

    def down_mask(self, intent: int) -> int:
        """Objects having every attribute in ``intent`` (bitmasks)."""
        out = self.all_objects
        cols = self.col_masks
        for m in _bits_of(intent):
            out &= cols[m]
            if not out:
                break
        return out

    def transposed(self) -> "FormalContext":
        return FormalContext(self.attributes, self.objects, self.incidence.T)


def derive_up(ctx: FormalContext, objects: Iterable[int]) -> frozenset:
    """A' : attributes common to all objects in A."""
    return frozenset(_bits_of(ctx.up_mask(_to_mask(objects, ctx.n_objects))))


def derive_down(ctx: FormalContext, attributes: Iterable[int]) -> frozenset:
    """B' : objects having all attributes in B."""
    return frozenset(_bits_of(ctx.down_mask(_to_mask(attributes, ctx.n_attributes))))


@dataclass(frozen=True)
class FormalConcept:
    """A closed pair stored as bitmasks over object / attribute indices."""

    extent_mask: int
    intent_mask: int

    @property
    def extent(self) -> frozenset:
        return frozenset(_bits_of(self.extent_mask))

    @property
    def intent(self) -> frozenset:
        return frozenset(_bits_of(self.intent_mask))

    @property
    def sizes(self) -> tuple:
        return self.extent_mask.bit_count(), self.intent_mask.bit_count()


def enumerate_concepts(ctx: FormalContext, cap: Optional[int] = DEFAULT_CONCEPT_CAP) -> Iterator[FormalConcept]:
    """Stream all formal concepts in lectic order of their intents (NextClosure).

    Attribute ``i`` is more significant than attribute ``j`` when ``i < j``.
    Raises ConceptOverflowError once more than ``cap`` concepts were produced.
    """
    if cap is not None and cap < 1:
        raise ValueError("cap must be >= 1")
    m = ctx.n_attributes
    full = ctx.all_attributes

    def closure(intent: int) -> tuple:
        ext = ctx.down_mask(intent)
        return ctx.up_mask(ext), ext

    intent, extent = closure(0)
    count = 1
    yield FormalConcept(extent, intent)
    while intent != full:
        current = intent
        for i in range(m - 1, -1, -1):
            bit = 1 << i
            if current & bit:
                current ^= bit
                continue
            candidate, ext = closure(current | bit)
            if candidate & (bit - 1) == current:
                intent, extent = candidate, ext
                break
        else:  # pragma: no cover - the full set is always reachable
            raise AssertionError("NextClosure failed to advance")
        count += 1
        if cap is not None and count > cap:
            raise ConceptOverflowError(cap)
        yield FormalConcept(extent, intent)


@dataclass(frozen=True)
class ConceptSummary:
    """Multiset of (extent size, intent size) over all concepts."""

    counts: tuple  # sorted ((extent_size, intent_size), multiplicity) pairs

    @classmethod
    def from_sizes(cls, sizes: Iterable[tuple]) -> "ConceptSummary":
        return cls(tuple(sorted(Counter(sizes).items())))

    @property
    def total(self) -> int:
        return sum(c for _, c in self.counts)

    def as_dict(self) -> dict:
        return dict(self.counts)


def summarize_concepts(ctx: FormalContext, cap: Optional[int] = DEFAULT_CONCEPT_CAP) -> ConceptSummary:
    return ConceptSummary.from_sizes(
        (c.extent_mask.bit_count(), c.intent_mask.bit_count()) for c in enumerate_concepts(ctx, cap)
    )


def fca_profile(summary: ConceptSummary, n_objects: int, n_attributes: int) -> ObsDiamProfile:
    """Exact observable-diameter profile of the data set of a context.

    A concept with ``0 < |B| < |M|`` contributes ``|A|/|G|`` on
    ``[0, min(b, 1-b))`` where ``b = |B|/|M|``; the profile is their maximum.
    """
    if n_objects < 1 or n_attributes < 1:
        raise ValueError("context sizes must be >= 1")
    reach: dict = {}
    for (a_size, b_size), _ in summary.counts:
        if not 0 < b_size < n_attributes or a_size == 0:
            continue
        b = Fraction(b_size, n_attributes)
        end = min(b, 1 - b)
        value = Fraction(a_size, n_objects)
        if value > reach.get(end, 0):
            reach[end] = value
    ends = sorted(reach, reverse=True)
    # value on [alpha_j, alpha_{j+1}) is the max over contributions whose end exceeds alpha_j
    bps = [Fraction(0), *sorted(ends), Fraction(1)]
    values = []
    for left in bps[:-1]:
        best = Fraction(0)
        for end in ends:
            if end <= left:
                break
            if reach[end] > best:
                best = reach[end]
        values.append(best)
    return ObsDiamProfile(tuple(bps), tuple(values))


def fca_dataset(ctx: FormalContext, cap: Optional[int] = DEFAULT_CONCEPT_CAP) -> GeometricDataSet:
    """The data set on the attributes with one concept-indicator feature per concept."""
    cols = []
    n_obj = ctx.n_objects
    for c in enumerate_concepts(ctx, cap):
        a = Fraction(c.extent_mask.bit_count(), n_obj)
        col = [a if c.intent_mask >> m & 1 else Fraction(0) for m in range(ctx.n_attributes)]
        cols.append(col)
    table = np.empty((ctx.n_attributes, len(cols)), dtype=object)
    for j, col in enumerate(cols):
        for i, v in enumerate(col):
            table[i, j] = v
    return GeometricDataSet(table, PointMeasure.uniform(ctx.n_attributes, exact=True))


def fca_intrinsic_dimension(ctx: FormalContext, cap: Optional[int] = DEFAULT_CONCEPT_CAP) -> DimensionReport:
    summary = summarize_concepts(ctx, cap)
    d = delta(fca_profile(summary, ctx.n_objects, ctx.n_attributes))
    return DimensionReport.from_delta(Fraction(d), n_points=ctx.n_attributes, n_features=summary.total)


def _names(n: int) -> tuple:
    return tuple(str(i) for i in range(1, n + 1))


def nominal_scale(n: int) -> FormalContext:
    """([n], [n], =)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return FormalContext(_names(n), _names(n), np.eye(n, dtype=bool))


def contranominal_scale(n: int) -> FormalContext:
    """([n], [n], !=)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return FormalContext(_names(n), _names(n), ~np.eye(n, dtype=bool))


def random_context(n_objects: int, n_attributes: int, density: float, seed: Optional[int] = None) -> FormalContext:
    """Each incidence is an independent Bernoulli(density) draw."""
    if not 0 <= density <= 1:
        raise ValueError("density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    inc = rng.random((n_objects, n_attributes)) < density
    return FormalContext(
        tuple(f"g{i}" for i in range(n_objects)),
        tuple(f"m{j}" for j in range(n_attributes)),
        inc,
    )


def randomize_context(ctx: FormalContext, seed: Optional[int] = None) -> FormalContext:
    """Same names and expected density; incidences redrawn independently.

    Row and column margins are not preserved.
    """
    density = float(ctx.incidence.mean())
    rng = np.random.default_rng(seed)
    inc = rng.random(ctx.incidence.shape) < density
    return FormalContext(ctx.objects, ctx.attributes, inc)


def permute_context(ctx: FormalContext, object_order: Sequence[int], attribute_order: Sequence[int]) -> FormalContext:
    inc = ctx.incidence[np.ix_(list(object_order), list(attribute_order))]
    return FormalContext(
        tuple(ctx.objects[i] for i in object_order),
        tuple(ctx.attributes[j] for j in attribute_order),
        inc,
    )
