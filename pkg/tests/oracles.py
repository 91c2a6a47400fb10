"""Brute-force reference computations, independent of the package internals."""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np


def subset_partial_diameter(values, masses, alpha, tol=0):
    """min diam over all subsets of atoms with mass >= 1 - alpha."""
    need = 1 - alpha
    if need <= tol:
        return 0
    best = None
    k = len(values)
    for r in range(1, k + 1):
        for combo in itertools.combinations(range(k), r):
            m = sum(masses[i] for i in combo)
            if m >= need - tol:
                d = values[combo[-1]] - values[combo[0]]
                if best is None or d < best:
                    best = d
    return best


def ky_fan_brute(values, masses, c, tol=0):
    """Smallest eps in the finite candidate set with mass(|f - c| > eps) <= eps."""
    radii = [abs(v - c) for v in values]

    def tail(eps):
        return sum(m for r, m in zip(radii, masses) if r > eps)

    cands = {0} | set(radii) | {tail(r) for r in radii} | {tail(0)}
    return min(e for e in cands if e >= 0 and tail(e) <= e + tol)


def levy_brute(values, masses, tol=0):
    centers = {(values[i] + values[j]) / 2 for i in range(len(values)) for j in range(i, len(values))}
    return min(ky_fan_brute(values, masses, c, tol) for c in centers)


def powerset_intents(incidence: np.ndarray) -> set:
    """All closed attribute sets B = B'' by closing every subset of M."""
    inc = np.asarray(incidence, dtype=bool)
    n_obj, n_att = inc.shape
    closed = set()
    for r in range(n_att + 1):
        for combo in itertools.combinations(range(n_att), r):
            ext = np.all(inc[:, list(combo)], axis=1) if combo else np.ones(n_obj, bool)
            intent = np.all(inc[ext], axis=0) if ext.any() else np.ones(n_att, bool)
            closed.add(frozenset(np.flatnonzero(intent).tolist()))
    return closed


def concepts_from_intents(incidence: np.ndarray, intents) -> list:
    inc = np.asarray(incidence, dtype=bool)
    out = []
    for b in intents:
        ext = np.all(inc[:, sorted(b)], axis=1) if b else np.ones(inc.shape[0], bool)
        out.append((frozenset(np.flatnonzero(ext).tolist()), b))
    return out


def lectic_key(intent, n_att):
    # attribute 0 is the most significant position
    return tuple(1 if i in intent else 0 for i in range(n_att))


def concept_obsdiam(concepts, n_obj, n_att, alpha):
    """sup of |A|/|G| over concepts with alpha < |B|/|M| < 1 - alpha."""
    vals = [Fraction(len(a), n_obj) for a, b in concepts
            if alpha < Fraction(len(b), n_att) < 1 - alpha]
    return max(vals, default=Fraction(0))


def concept_delta(concepts, n_obj, n_att):
    """Exact integral of the concept sup formula over [0, 1]."""
    cuts = {Fraction(0), Fraction(1)}
    for _, b in concepts:
        x = Fraction(len(b), n_att)
        cuts |= {x, 1 - x}
    cuts = sorted(c for c in cuts if 0 <= c <= 1)
    total = Fraction(0)
    for lo, hi in zip(cuts, cuts[1:]):
        v = concept_obsdiam(concepts, n_obj, n_att, (lo + hi) / 2)
        total += (hi - lo) * min(v, 1)
    return total


def pairwise_distances(points, metric="euclidean"):
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if metric == "euclidean":
                D[i, j] = np.sqrt(np.sum((pts[i] - pts[j]) ** 2))
            elif metric == "normalized_hamming":
                D[i, j] = np.mean(pts[i] != pts[j])
            else:
                D[i, j] = 0.0 if i == j else np.arccos(np.clip(pts[i] @ pts[j], -1, 1))
    return D


def chavez_brute(D, include_diagonal=True):
    n = len(D)
    ds = [D[i][j] for i in range(n) for j in range(n) if include_diagonal or i != j]
    mu = sum(ds) / len(ds)
    var = sum((d - mu) ** 2 for d in ds) / len(ds)
    return None if var == 0 else mu * mu / (2 * var)
