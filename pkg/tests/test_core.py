import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import datasets, distributions
from oracles import ky_fan_brute, levy_brute, subset_partial_diameter
from obsdiam.core import (
    DimensionReport,
    GeometricDataSet,
    ObsDiamProfile,
    PointMeasure,
    WeightedValueDistribution,
    delta,
    intrinsic_dimension,
    ky_fan_to_constant,
    levy_defect,
    observable_diameter,
    oracle_partial_diameter,
    partial_diameter,
    profile,
    pushforward,
    scale,
)
from obsdiam.fca import fca_dataset, nominal_scale

THIRD = Fraction(1, 3)


def uniform_dist(values, exact=True):
    m = Fraction(1, len(values)) if exact else 1 / len(values)
    return WeightedValueDistribution(tuple(values), (m,) * len(values))


def alphas_for(dist, draw_extra=()):
    # every window-mass threshold plus points in between
    cum = np.concatenate([[0], np.cumsum([float(m) for m in dist.masses])])
    cands = {0.0, 1.0, *draw_extra}
    for i in range(len(cum)):
        for j in range(i + 1, len(cum)):
            a = 1 - (cum[j] - cum[i])
            cands |= {a, a + 1e-6, a - 1e-6}
    return sorted(a for a in cands if a >= 0)


# --- pushforward ---------------------------------------------------------

def test_pushforward_groups_values():
    d = pushforward([0, 1, 3], PointMeasure.uniform(3, exact=True))
    assert d.values == (0, 1, 3) and d.masses == (THIRD,) * 3


def test_pushforward_constant_feature():
    d = pushforward([5, 5, 5], PointMeasure.uniform(3, exact=True))
    assert d.values == (5,) and d.masses == (1,)


def test_pushforward_merges_duplicates():
    w = PointMeasure((Fraction(1, 4), Fraction(1, 2), Fraction(1, 4)))
    d = pushforward([1, 0, 1], w)
    assert d.values == (0, 1) and d.masses == (Fraction(1, 2), Fraction(1, 2))


def test_pushforward_rejects_non_finite_and_length_mismatch():
    with pytest.raises(ValueError):
        pushforward([0.0, math.nan], PointMeasure.uniform(2))
    with pytest.raises(ValueError):
        pushforward([0.0], PointMeasure.uniform(2))


def test_distribution_invariants():
    with pytest.raises(ValueError):
        WeightedValueDistribution((1, 0), (Fraction(1, 2),) * 2)
    with pytest.raises(ValueError):
        WeightedValueDistribution((0, 1), (Fraction(1, 2), Fraction(1, 3)))
    with pytest.raises(ValueError):
        WeightedValueDistribution((0, 1), (1.0, 0.0))
    d = WeightedValueDistribution.from_pairs([(2, 0.25), (1, 0.5), (2, 0.25)])
    assert d.values == (1, 2) and d.masses == (0.5, 0.5)


def test_point_measure_requires_full_support():
    with pytest.raises(ValueError):
        PointMeasure((1.0, 0.0))
    with pytest.raises(ValueError):
        PointMeasure((0.5, 0.4))


# --- partial diameter ----------------------------------------------------

@pytest.mark.parametrize(
    "alpha, expected", [(0, 3), (THIRD, 1), (1, 0)]
)
def test_partial_diameter_uniform_013(alpha, expected):
    assert partial_diameter(uniform_dist((0, 1, 3)), alpha) == expected


def test_partial_diameter_dirac():
    assert partial_diameter(uniform_dist((5,)), Fraction(1, 5)) == 0
    assert partial_diameter(uniform_dist((5.0,), exact=False), 0.2) == 0


def test_partial_diameter_float_threshold_is_tolerant():
    # 1 - 1/3 in floats exceeds two float masses of 1/3 by one ulp
    assert partial_diameter(uniform_dist((0.0, 1.0, 3.0), exact=False), 1 / 3) == 1.0


def test_partial_diameter_rejects_negative_alpha():
    with pytest.raises(ValueError):
        partial_diameter(uniform_dist((0, 1)), -0.1)


def test_oracle_examples():
    assert oracle_partial_diameter(uniform_dist((0, 1, 3)), THIRD) == 1
    assert oracle_partial_diameter(uniform_dist((7,)), Fraction(1, 2)) == 0
    assert oracle_partial_diameter(uniform_dist((0.0, 10.0), exact=False), 0.4) == 10.0


def test_oracle_rejects_large_support():
    with pytest.raises(ValueError):
        oracle_partial_diameter(uniform_dist(tuple(range(19))), 0)


@settings(max_examples=150, deadline=None)
@given(distributions(max_atoms=7), st.lists(st.floats(0, 1.2), max_size=3))
def test_partial_diameter_matches_both_oracles(dist, extra):
    tol = 0 if dist.exact else 1e-12
    for a in alphas_for(dist, extra):
        alpha = Fraction(a).limit_denominator(10**6) if dist.exact else a
        got = partial_diameter(dist, alpha)
        assert got == oracle_partial_diameter(dist, alpha)
        assert got == subset_partial_diameter(dist.values, dist.masses, alpha, tol)


# --- observable diameter and profile ------------------------------------

def two_point_ds(dist=1.0):
    return GeometricDataSet(np.array([[0.0, dist], [dist, 0.0]]))


def test_observable_diameter_single_point():
    ds = GeometricDataSet(np.array([[4.0, -1.0]]))
    for a in (0, 0.3, 0.99):
        assert observable_diameter(ds, a) == 0


def test_observable_diameter_nominal_two():
    ds = fca_dataset(nominal_scale(2))
    assert observable_diameter(ds, Fraction(1, 4)) == Fraction(1, 2)


def test_observable_diameter_vanishes_for_alpha_at_least_one():
    ds = two_point_ds(3.0)
    assert observable_diameter(ds, 1) == 0
    assert observable_diameter(ds, 1.5) == 0


def test_observable_diameter_empty_feature_set():
    ds = GeometricDataSet(np.zeros((3, 0)))
    assert observable_diameter(ds, 0) == 0
    assert profile(ds).values == (0,)
    assert delta(profile(ds)) == 0


def test_profile_single_point_is_zero():
    p = profile(GeometricDataSet(np.array([[1.0, 2.0]])))
    assert all(v == 0 for v in p.values)
    assert delta(p) == 0
    assert intrinsic_dimension(delta(p)) == math.inf


def test_profile_nominal_two():
    p = profile(fca_dataset(nominal_scale(2))).merged()
    assert p.breakpoints == (0, Fraction(1, 2), 1)
    assert p.values == (Fraction(1, 2), 0)


def test_profile_two_point_distance_cloud():
    # pushforward of each feature is uniform on {0, 1}: both atoms needed below alpha = 1/2
    p = profile(two_point_ds()).merged()
    assert p.breakpoints == (0.0, 0.5, 1.0)
    assert p.values == (1.0, 0.0)


@settings(max_examples=80, deadline=None)
@given(datasets(), st.lists(st.floats(0, 1), min_size=1, max_size=6))
def test_profile_agrees_with_observable_diameter(ds, alphas):
    p = profile(ds)
    for a in alphas:
        if any(abs(a - b) < 1e-9 for b in p.breakpoints):
            continue
        assert p.value_at(a) == pytest.approx(observable_diameter(ds, a), abs=1e-12)


@settings(max_examples=80, deadline=None)
@given(datasets())
def test_profile_is_antitone(ds):
    p = profile(ds)
    assert all(a >= b for a, b in zip(p.values, p.values[1:]))
    grid = np.linspace(0, 1, 41)
    obs = [observable_diameter(ds, a) for a in grid]
    assert all(a >= b - 1e-12 for a, b in zip(obs, obs[1:]))


@settings(max_examples=60, deadline=None)
@given(datasets(max_features=4), st.data())
def test_feature_subset_monotonicity(ds, data):
    keep = data.draw(st.lists(st.integers(0, max(ds.n_features - 1, 0)), unique=True, max_size=ds.n_features))
    keep = [k for k in keep if k < ds.n_features]
    sub = ds.select_features(keep)
    p, q = profile(ds), profile(sub)
    cuts = sorted(set(p.breakpoints) | set(q.breakpoints))
    for a, b in zip(cuts, cuts[1:]):
        if b - a > 1e-9:
            assert q.value_at((a + b) / 2) <= p.value_at((a + b) / 2) + 1e-12
    assert delta(q) <= delta(p) + 1e-12


def test_profile_rejects_non_antitone_values():
    with pytest.raises(ValueError):
        ObsDiamProfile((0, 0.5, 1), (0.1, 0.2))
    with pytest.raises(ValueError):
        ObsDiamProfile((0, 0.5), (0.1,))


def test_profile_merged_and_value_at():
    p = ObsDiamProfile((0, 0.25, 0.5, 1), (2.0, 2.0, 1.0))
    assert p.merged() == ObsDiamProfile((0, 0.5, 1), (2.0, 1.0))
    assert p.value_at(0.25) == 2.0 and p.value_at(0.5) == 1.0 and p.value_at(1) == 0


# --- delta and dimension -------------------------------------------------

def test_delta_zero_profile():
    assert delta(ObsDiamProfile.zero()) == 0


def test_delta_nominal_three():
    p = profile(fca_dataset(nominal_scale(3)))
    assert delta(p) == Fraction(1, 9)
    assert intrinsic_dimension(delta(p)) == 81


def test_delta_clips_at_one():
    assert delta(ObsDiamProfile((0, 1), (2.0,))) == 1


@pytest.mark.parametrize("d, expected", [(Fraction(1, 4), 16), (0, math.inf), (1, 1), (0.5, 4.0)])
def test_intrinsic_dimension(d, expected):
    assert intrinsic_dimension(d) == expected


@pytest.mark.parametrize("bad", [-0.1, 1.5, math.nan])
def test_intrinsic_dimension_rejects_out_of_range(bad):
    with pytest.raises(ValueError):
        intrinsic_dimension(bad)


def test_report_consistency():
    r = DimensionReport.from_delta(Fraction(1, 3))
    assert r.dimension * r.delta**2 == 1
    assert DimensionReport.from_delta(0).dimension == math.inf
    with pytest.raises(ValueError):
        DimensionReport(delta=0.5, dimension=3.0)


# --- Levy defect ---------------------------------------------------------

def test_levy_constant_features():
    ds = GeometricDataSet(np.array([[2.0, -1.0]] * 4))
    assert levy_defect(ds) == 0


def test_levy_uniform_two_atoms():
    dist = uniform_dist((0, 1))
    assert ky_fan_to_constant(dist, Fraction(1, 2)) == Fraction(1, 2)
    ds = GeometricDataSet(np.array([[0.0], [1.0]]))
    assert levy_defect(ds) == 0.5


def test_levy_empty_features():
    assert levy_defect(GeometricDataSet(np.zeros((2, 0)))) == 0


@settings(max_examples=150, deadline=None)
@given(distributions(max_atoms=6), st.floats(-12, 12))
def test_ky_fan_matches_brute_force(dist, c):
    if dist.exact:
        c = Fraction(c).limit_denominator(64)
    tol = 0 if dist.exact else 1e-12
    got = ky_fan_to_constant(dist, c)
    assert got == pytest.approx(ky_fan_brute(dist.values, dist.masses, c, tol), abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(distributions(max_atoms=6))
def test_levy_window_midpoints_are_optimal(dist):
    ds = GeometricDataSet(np.array([[float(v)] for v in dist.values]),
                          PointMeasure(tuple(float(m) for m in dist.masses)))
    got = levy_defect(ds)
    assert got == pytest.approx(float(levy_brute(dist.values, dist.masses)), abs=1e-12)
    # no constant on a fine grid does better than the best window midpoint
    lo, hi = float(dist.values[0]) - 1, float(dist.values[-1]) + 1
    fine = min(ky_fan_to_constant(pushforward(ds.column(0), ds.measure), c)
               for c in np.linspace(lo, hi, 801))
    assert fine >= got - 1e-12


@settings(max_examples=100, deadline=None)
@given(datasets())
def test_levy_bounds(ds):
    d = levy_defect(ds)
    # (a) beyond the defect every feature fits in a ball of radius d
    for a in np.linspace(0, 1, 51):
        if a > d:
            assert observable_diameter(ds, a) <= 4 * d + 1e-12
    # (b) ObsDiam(eps) <= eps forces defect <= eps
    for eps in np.linspace(0.01, 0.99, 50):
        if observable_diameter(ds, eps) <= eps:
            assert d <= eps + 1e-9


# --- scaling -------------------------------------------------------------

def test_scale_identity_and_zero():
    ds = two_point_ds(2.0)
    assert np.array_equal(scale(ds, 1).features, ds.features)
    z = scale(ds, 0)
    assert np.all(z.features == 0)
    assert all(v == 0 for v in profile(z).values)


def test_scale_doubles_profile():
    p = profile(scale(two_point_ds(), 2)).merged()
    assert p.values == (2.0, 0.0)


def test_scale_rejects_negative():
    with pytest.raises(ValueError):
        scale(two_point_ds(), -1)


@settings(max_examples=60, deadline=None)
@given(datasets(), st.sampled_from([0, 0.5, 1, 3]), st.floats(0, 1))
def test_scale_equivariance(ds, tau, alpha):
    assert observable_diameter(scale(ds, tau), alpha) == pytest.approx(
        tau * observable_diameter(ds, alpha), abs=1e-9)
