import json
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bcentropy import measure as ms
from bcentropy.algebraic import AlgebraicNumber
from bcentropy.config import Config
from bcentropy.measure import EnumerationBoundExceeded, Interval, LamPow, MeasureError

from oracles import distinct_sums

# distinct sums of +-lam^i, i < l, for lam^2 + lam = 1 (from a 60-digit dedup)
GOLDEN_COUNTS = [2, 4, 7, 12, 20, 33, 54, 88, 143, 232, 376, 609, 986, 1596, 2583, 4180, 6764, 10945]


def naive_convolve(a, b):
    acc = {}
    for (x, p) in a.atoms():
        for (y, q) in b.atoms():
            acc[x + y] = acc.get(x + y, 0) + p * q
    return acc


def test_merging_and_mass():
    m = ms.from_atoms([(0, Fraction(1, 4)), (0, Fraction(1, 4)), (Fraction(1, 3), Fraction(1, 2))])
    assert len(m) == 2
    assert m.total_mass() == 1
    assert dict(m.atoms()) == {Fraction(0): Fraction(1, 2), Fraction(1, 3): Fraction(1, 2)}


def test_negative_mass_rejected():
    with pytest.raises(MeasureError):
        ms.from_atoms([(0, Fraction(-1, 2))])


def test_bernoulli_pair():
    m = ms.bernoulli_pair(1, Fraction(1, 2), Fraction(1, 3))
    assert dict(m.atoms()) == {Fraction(3, 4): Fraction(1, 6), Fraction(5, 4): Fraction(1, 6)}


def test_rational_measure_exact_convolution():
    a = ms.from_atoms([(Fraction(1, 3), Fraction(1, 2)), (Fraction(2, 3), Fraction(1, 2))])
    b = ms.from_atoms([(Fraction(1, 3), Fraction(1, 2)), (0, Fraction(1, 2))])
    c = ms.convolve(a, b)
    assert dict(c.atoms()) == {Fraction(1, 3): Fraction(1, 4), Fraction(2, 3): Fraction(1, 2), Fraction(1): Fraction(1, 4)}


def _random_int_measure(draw_weights, keys):
    return ms.integer_measure(dict(zip(keys, draw_weights)))


@settings(max_examples=40)
@given(
    st.lists(st.tuples(st.integers(-60, 400), st.integers(1, 2**90)), min_size=70, max_size=120),
    st.lists(st.tuples(st.integers(-60, 400), st.integers(1, 2**90)), min_size=70, max_size=120),
)
def test_dense_convolution_matches_naive(xs, ys):
    a = ms.integer_measure(dict(xs))
    b = ms.integer_measure(dict(ys))
    c = ms.convolve(a, b)
    assert dict(c.atoms()) == naive_convolve(a, b)


def test_golden_mean_collisions(golden):
    for l, expected in enumerate(GOLDEN_COUNTS[:14], start=1):
        m = ms.level_measure_top(golden, Fraction(1, 2), l)
        assert len(m) == expected
        # first relation 1 = lam + lam^2 needs three powers
        if l >= 3:
            assert len(m) < 2**l


def test_golden_counts_match_float_oracle(golden):
    with mpmath.workdps(60):
        lam = (mpmath.sqrt(5) - 1) / 2
        for l in (5, 9, 12):
            assert len(distinct_sums(lam, l, mpmath.mpf(10) ** -40)) == GOLDEN_COUNTS[l - 1]


def test_half_has_no_collisions():
    for l in range(1, 13):
        m = ms.level_measure_top(Fraction(1, 2), Fraction(1, 2), l)
        assert len(m) == 2**l
        assert set(m.masses()) == {Fraction(1, 2**l)}


def test_iter_levels_matches_direct(golden):
    for lam in (Fraction(1, 2), Fraction(2, 3), golden):
        for l, m in ms.iter_level_measures(lam, Fraction(1, 3), 7):
            assert m == ms.level_measure_top(lam, Fraction(1, 3), l)


def test_enumeration_bound():
    cfg = Config(enumeration_bound=10)
    with pytest.raises(EnumerationBoundExceeded):
        ms.level_measure_top(Fraction(1, 2), Fraction(1, 2), 11, cfg)
    with pytest.raises(EnumerationBoundExceeded):
        list(ms.iter_level_measures(Fraction(1, 2), Fraction(1, 2), 11, cfg))


def test_level_indices(golden):
    # lam^n in (1/4, 1] for the golden mean: 1, 0.618, 0.382, 0.236 -> n = 0, 1, 2
    assert ms.level_indices(golden, (Fraction(1, 4), Fraction(1), False, True)) == [0, 1, 2]
    # symbolic ends: [lam^3, lam] closed
    assert ms.level_indices(golden, (LamPow(3), LamPow(1), True, True)) == [1, 2, 3]
    assert ms.level_indices(Fraction(1, 2), (LamPow(4), Fraction(1, 2), False, True)) == [1, 2, 3]


def test_restrict_affine_gap():
    m = ms.uniform_on_integers(1, 8)
    r = ms.restrict(m, Interval.closed(3, 5))
    assert r.positions() == [3, 4, 5]
    assert r.total_mass() == Fraction(3, 8)
    a = ms.affine(m, Fraction(1, 2), 1)
    assert a.positions()[0] == Fraction(3, 2)
    lo, hi = ms.min_gap(a)
    assert lo == hi == Fraction(1, 2)


def test_algebraic_min_gap(golden):
    m = ms.level_measure_top(golden, Fraction(1, 2), 12)
    lo, hi = ms.min_gap(m, 80)
    assert 0 < lo <= hi and hi - lo < Fraction(1, 2**60)


def test_json_round_trip(golden, tmp_path):
    for m in (ms.random_measure(3, 30, 5), ms.level_measure_top(golden, Fraction(1, 3), 6)):
        text = json.dumps(ms.to_json(m))
        assert ms.from_json(text) == m
        path = tmp_path / "m.json"
        ms.dump(m, path)
        assert ms.load(path) == m


def test_from_json_rejects_garbage():
    with pytest.raises(MeasureError):
        ms.from_json('{"bad": 1}')


def test_random_measure_is_deterministic():
    assert ms.random_measure(7, 20, 3, "dirichlet") == ms.random_measure(7, 20, 3, "dirichlet")
    assert ms.random_measure(7, 20, 3) != ms.random_measure(8, 20, 3)


def test_near_uniform():
    rng = np.random.default_rng(0)
    m = ms.near_uniform_measure(rng, 64, 0.1)
    assert m.total_mass() == 1
    assert max(m.masses()) <= Fraction(11, 10 * 64) * Fraction(1001, 1000)


def test_subtract_and_add():
    m = ms.uniform_on_integers(0, 3)
    part = ms.restrict(m, Interval.closed(0, 1))
    rest = ms.subtract(m, part)
    assert ms.add(part, rest) == m
    with pytest.raises(MeasureError):
        ms.subtract(part, m)
