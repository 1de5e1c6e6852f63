import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcentropy import measure as ms
from bcentropy.decompose import (
    REJECT,
    bernoulli_extract,
    bernoulli_mass_bound,
    component_sandwich,
    doubling_identity_gap,
    exhaustive_extractions,
    has_in_band_pair,
    l2_dist_sq_to_uniform,
    l2_entropy_bound,
    l2_l1_split,
    support_clusters,
)
from bcentropy.entropy import cond_entropy, shannon
from bcentropy.measure import MeasureError

THIRD = Fraction(1, 3)


def chi(N):
    return ms.uniform_on_integers(1, N)


# --- L2 / L1 split ---------------------------------------------------------------


def test_split_of_uniform():
    s = l2_l1_split(chi(16), 16)
    assert s.f == chi(16)
    assert len(s.g) == 0
    assert s.f_dist_sq == 0


def test_split_of_dirac():
    s = l2_l1_split(ms.dirac(1), 4)
    assert dict(s.f.atoms()) == {1: Fraction(1, 4)}
    assert dict(s.g.atoms()) == {1: Fraction(3, 4)}
    assert s.entropy_deficit.value == 2
    assert s.g.total_mass() <= 4
    assert s.reconstitutes(ms.dirac(1))


@pytest.mark.parametrize("seed", range(100))
def test_split_bounds_random(seed):
    rng = np.random.default_rng(seed)
    profile = ["dirichlet", "sparse_dirichlet", "geometric", "uniform"][seed % 4]
    m = ms.random_integer_measure(rng, 64, int(rng.integers(1, 65)), profile)
    s = l2_l1_split(m, 64)
    assert all(s.checks.values())
    assert s.reconstitutes(m)
    assert s.f.total_mass() + s.g.total_mass() == 1
    assert max(s.f.masses()) <= Fraction(2, 64)
    deficit = 6 - shannon(m).value
    assert float(s.f_dist_sq) <= 2 * deficit / 64 + 1e-9
    assert float(s.g.total_mass()) <= 2 * deficit + 1e-9


def test_split_rejects_bad_support():
    with pytest.raises(MeasureError):
        l2_l1_split(ms.uniform_on_integers(0, 3), 4)
    with pytest.raises(MeasureError):
        l2_l1_split(ms.from_atoms([(Fraction(3, 2), 1)]), 4)


def test_l2_distance_counts_empty_sites():
    # delta_1 on [1, 4]: (3/4)^2 + 3 (1/4)^2 = 3/4
    assert l2_dist_sq_to_uniform(ms.dirac(1), 4) == Fraction(3, 4)


# --- L2 entropy bound --------------------------------------------------------------


def test_l2_entropy_bound_examples():
    rep = l2_entropy_bound(chi(8), 8)
    assert rep.lhs.value == pytest.approx(0, abs=1e-14) and rep.rhs.value == 0
    rep = l2_entropy_bound(ms.dirac(1), 2)
    assert rep.lhs.value == 1 and rep.rhs.value == 2
    assert rep.passed and rep.margin == 1


@pytest.mark.parametrize("M", [8, 64, 256])
@pytest.mark.parametrize("seed", range(34))
def test_l2_entropy_bound_random(M, seed):
    rng = np.random.default_rng(1000 * M + seed)
    m = ms.random_integer_measure(rng, M, int(rng.integers(1, M + 1)), ["dirichlet", "sparse_dirichlet", "geometric"][seed % 3])
    assert l2_entropy_bound(m, M).margin >= -1e-9


# --- Bernoulli extraction ------------------------------------------------------------


def in_band_free(m, r):
    xs = m.positions() if m is not None else []
    return not any(r / 2 <= abs(a - b) <= 2 * r for i, a in enumerate(xs) for b in xs[i + 1 :])


@pytest.mark.parametrize("r", [Fraction(1), Fraction(1, 7)])
def test_extract_single_pair(r):
    d = bernoulli_extract(ms.bernoulli_pair(0, r, 1), r)
    assert d.residual is None
    assert len(d.pairs) == 1 and d.extracted_mass == 1
    assert d.pairs[0].distance == r


def test_extract_nothing_in_band():
    r = Fraction(1, 3)
    m = ms.from_atoms([(0, Fraction(1, 2)), (10 * r, Fraction(1, 2))])
    d = bernoulli_extract(m, r)
    assert d.pairs == [] and d.residual == m and d.extracted_mass == 0


def test_extract_three_atoms_matches_exhaustive():
    r = Fraction(1, 5)
    m = ms.from_atoms([(0, THIRD), (r, THIRD), (2 * r, THIRD)])
    d = bernoulli_extract(m, r)
    assert d.extracted_mass == Fraction(2, 3)
    assert exhaustive_extractions(m, r) == {Fraction(2, 3)}
    # nearest-first, leftmost on ties: the pair at 0 and r goes first
    assert d.pairs[0].center == r / 2
    assert in_band_free(d.residual, r)
    assert d.reconstruct() == m


positions_st = st.lists(st.fractions(0, 6, max_denominator=8), min_size=1, max_size=8, unique=True)


@settings(max_examples=60)
@given(positions_st, st.lists(st.integers(1, 30), min_size=8, max_size=8), st.sampled_from([Fraction(1, 4), Fraction(1, 2), Fraction(1)]))
def test_extract_invariants(xs, ws, r):
    total = sum(ws[: len(xs)])
    m = ms.from_atoms([(x, Fraction(w, total)) for x, w in zip(xs, ws)])
    d = bernoulli_extract(m, r)
    assert d.reconstruct() == m
    assert in_band_free(d.residual, r)
    assert all(r / 2 <= p.distance <= 2 * r for p in d.pairs)
    assert d.extracted_mass in exhaustive_extractions(m, r)
    if d.hypothesis_satisfied:
        assert float(d.extracted_mass) >= d.mass_bound - 1e-9


def test_extract_rejects_algebraic(golden):
    with pytest.raises(MeasureError):
        bernoulli_extract(ms.level_measure_top(golden, Fraction(1, 2), 4), Fraction(1, 4))


def test_mass_bound_shape():
    assert bernoulli_mass_bound(0) == 0
    assert bernoulli_mass_bound(1) == pytest.approx(1 / 128)
    assert bernoulli_mass_bound(0.25) == pytest.approx(0.25 / (128 * 3))


def test_has_in_band_pair():
    assert has_in_band_pair([0, 1], 1)
    assert has_in_band_pair([0, Fraction(1, 2)], 1)
    assert not has_in_band_pair([0, Fraction(49, 100), 3], 1)


# --- clusters ---------------------------------------------------------------------------


def test_two_singletons_satisfy_doubling():
    r0 = Fraction(1, 8)
    m = ms.from_atoms([(0, Fraction(1, 2)), (8 * r0, Fraction(1, 2))])
    assert support_clusters(m, r0, 5 * r0) == [(0, 0), (8 * r0, 8 * r0)]
    assert doubling_identity_gap(m, 2 * r0) <= 1e-9


def test_close_pair_cluster():
    r0, r1 = Fraction(1, 4), Fraction(1)
    m = ms.from_atoms([(0, THIRD), (r0 / 2, THIRD), (r1 + r0, THIRD)])
    assert support_clusters(m, r0, r1) == [(0, r0 / 2), (r1 + r0, r1 + r0)]
    for r in (2 * r0, Fraction(3, 8), r1 / 2):
        assert doubling_identity_gap(m, r) <= 1e-9


def test_wide_run_rejected():
    r0 = Fraction(1, 4)
    m = ms.from_atoms([(k * r0, Fraction(1, 4)) for k in range(4)])
    assert support_clusters(m, r0, 4 * r0) is REJECT


def test_cluster_preconditions():
    with pytest.raises(ValueError):
        support_clusters(ms.dirac(0), 1, 3)


@settings(max_examples=40)
@given(st.lists(st.tuples(st.integers(0, 6), st.fractions(0, 1, max_denominator=4)), min_size=1, max_size=7))
def test_doubling_identity_on_accepted_supports(raw):
    # clusters of diameter <= r0 = 1/16 starting at multiples of 2 r1, r1 = 1
    r0, r1 = Fraction(1, 16), Fraction(1)
    pts = sorted({2 * c + d * r0 for c, d in raw})
    m = ms.from_atoms([(x, Fraction(1, len(pts))) for x in pts])
    clusters = support_clusters(m, r0, r1)
    assert clusters is not REJECT
    for r in (2 * r0, Fraction(3, 16), Fraction(1, 4), r1 / 2):
        assert doubling_identity_gap(m, r) <= 1e-9


# --- entropy sandwich --------------------------------------------------------------------


@pytest.mark.parametrize("seed", range(100))
def test_component_sandwich(seed):
    rng = np.random.default_rng(seed)
    m = ms.random_measure(seed, int(rng.integers(4, 40)), 3, "dirichlet")
    xs = m.positions()
    cut = int(rng.integers(1, len(xs)))
    eta = ms.restrict(m, ms.Interval.closed(xs[cut], xs[-1]))
    if eta.total_mass() > Fraction(1, 2):
        eta = ms.restrict(m, ms.Interval.closed(xs[0], xs[cut - 1]))
    if eta.total_mass() > Fraction(1, 2):
        eta = ms.scale_mass(eta, Fraction(1, 2) / eta.total_mass())
    nu = ms.subtract(m, eta)
    r = Fraction(int(rng.integers(1, 20)), 64)
    rep = component_sandwich(nu, eta, r)
    assert rep.hypothesis_satisfied
    assert rep.details["lower_margin"] >= -1e-9
    assert rep.details["upper_margin"] >= -1e-9
    lhs = cond_entropy(m, r, 2 * r).value
    e = float(eta.total_mass())
    assert lhs <= cond_entropy(nu, r, 2 * r).value + 3 * e * math.log2(1 / e) + 1e-9
