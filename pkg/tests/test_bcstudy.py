import json
import math
from fractions import Fraction

import pytest

from bcentropy import bcstudy as bs
from bcentropy import measure as ms
from bcentropy.config import Config
from bcentropy.measure import EnumerationBoundExceeded, LamPow, MeasureError

from oracles import level_entropy_float

H = Fraction(1, 2)
LOG_PHI = math.log2((1 + math.sqrt(5)) / 2)


@pytest.fixture(scope="module")
def golden20(golden):
    return bs.h_estimate(golden, H, 20)


def test_half_entropy_is_exact():
    est = bs.h_estimate(Fraction(1, 2), H, 14)
    for s in est.levels:
        assert s.entropy.value == pytest.approx(s.l, abs=1e-12)
        assert s.atom_count == 2**s.l
        assert s.ratio == pytest.approx(1, abs=1e-12)
    assert est.mahler.lo == est.mahler.hi == 2


def test_golden_levels_match_float_oracle(golden20):
    g = (math.sqrt(5) - 1) / 2
    for s in golden20.levels:
        if s.l in (6, 12, 16):
            ent, count = level_entropy_float(g, 0.5, s.l)
            assert s.atom_count == count
            assert s.entropy.value == pytest.approx(ent, abs=1e-9)


def test_golden_ratio_at_level_20(golden20):
    top = golden20.levels[-1]
    # exact enumeration; frozen from the float oracle's 14.589248972997968
    assert top.entropy.value == pytest.approx(14.589248972997968, abs=1e-9)
    assert top.ratio == pytest.approx(0.7294624486498984, abs=1e-9)
    # finite ratios dominate the limit, which cannot exceed log M = log phi
    assert top.ratio > LOG_PHI
    ratios = [s.ratio for s in golden20.levels]
    assert all(a >= b - 1e-12 for a, b in zip(ratios[2:], ratios[3:]))


def test_p_must_be_interior():
    for p in (0, 1):
        with pytest.raises(MeasureError):
            bs.h_estimate(Fraction(1, 2), p, 3)


def test_enumeration_bound_respected():
    with pytest.raises(EnumerationBoundExceeded):
        bs.h_estimate(Fraction(1, 2), H, 9, Config(enumeration_bound=8))


def test_superadditivity_structure():
    est = bs.h_estimate(Fraction(2, 3), Fraction(1, 3), 12, with_gaps=False)
    Hs = {s.l: s.entropy.value for s in est.levels}
    for a in range(1, 7):
        for b in range(a, 13 - a):
            assert Hs[a + b] <= Hs[a] + Hs[b] + 1e-9
    assert all(Hs[l] <= Hs[l + 1] + 1e-12 for l in range(1, 12))


def test_serialisation(golden20):
    doc = json.loads(json.dumps(golden20.to_json()))
    assert doc["minpoly"] == [-1, 1, 1]
    assert [row["atoms"] for row in doc["levels"]][:5] == [2, 4, 7, 12, 20]
    lines = golden20.to_csv().splitlines()
    assert lines[0] == "l,H,ratio,atoms,min_gap" and len(lines) == 21


# --- bounds ------------------------------------------------------------------------------


def test_h_bounds_half_passes():
    rep = bs.h_bounds_check(bs.h_estimate(Fraction(1, 2), H, 12))
    assert rep.passed
    assert rep.details["ratio"] == pytest.approx(1)
    assert rep.details["lower_bound"] == pytest.approx(0.44)


def test_h_bounds_golden_stress(golden20):
    rep = bs.h_bounds_check(golden20)
    assert rep.passed
    d = rep.details
    assert d["upper_is_heuristic"] is True
    # the naive limit bound would reject the finite ratio; the slack absorbs it
    assert d["ratio"] > d["log_mahler"][1]
    assert d["ratio"] <= d["upper_bound"]
    assert d["margins"]["counting"] >= 0


def test_h_bounds_lower_only_for_fair_coin():
    rep = bs.h_bounds_check(bs.h_estimate(Fraction(1, 2), Fraction(1, 3), 6))
    assert "lower" not in rep.details["margins"]
    assert rep.details["lower_bound"] is None


def test_h_bounds_needs_three_levels():
    with pytest.raises(ValueError):
        bs.h_bounds_check(bs.h_estimate(Fraction(1, 2), H, 2))


# --- separation ---------------------------------------------------------------------------


def test_separation_half():
    rep = bs.separation_check(Fraction(1, 2), H, 10)
    assert rep.details["min_gap"] == [2.0**-8, 2.0**-8]
    assert rep.vacuous  # below the stabilisation level
    assert bs.separation_check(Fraction(1, 2), H, 1).details["min_gap"] == [2.0, 2.0]


def test_separation_half_rate_window():
    rep = bs.separation_check(Fraction(1, 2), H, 16)
    assert rep.hypothesis_satisfied and rep.passed
    assert rep.details["rate"] == pytest.approx(14 / 16)


def test_separation_golden(golden):
    rep = bs.separation_check(golden, H, 18)
    assert rep.passed
    assert abs(rep.details["rate"] - LOG_PHI) <= 0.15
    assert rep.details["atoms"] == 10945


# --- full entropy scale -------------------------------------------------------------------


def test_full_entropy_scale_half():
    rep = bs.full_entropy_scale_check(Fraction(1, 2), H, 8, Fraction(2, 5))
    assert rep.hypothesis_satisfied and rep.passed
    assert rep.details["min_gap"] == 2.0**-6
    assert abs(rep.lhs.value - 8) <= 1e-9


def test_full_entropy_scale_rejects_large_alpha():
    with pytest.raises(ValueError):
        bs.full_entropy_scale_check(Fraction(1, 2), H, 8, Fraction(3, 5))


def test_full_entropy_scale_golden(golden):
    rep = bs.full_entropy_scale_check(golden, H, 16, Fraction(55, 100))
    assert rep.hypothesis_satisfied and rep.passed
    assert rep.details["gap_margin"] > 0


# --- factorisation --------------------------------------------------------------------------


def test_factorisation_identity_cases(golden):
    whole = (LamPow(6), Fraction(1), False, True)
    assert bs.factorization_check(Fraction(1, 2), H, [whole], 6).passed
    split = [(LamPow(3), Fraction(1), False, True)]
    rep = bs.factorization_check(Fraction(1, 2), H, split, 6)
    assert rep.passed and rep.details["pieces"] == [[0, 1, 2]] and rep.details["complement"] == [3, 4, 5]
    three = [(LamPow(2), Fraction(1), False, True), ms.Interval(LamPow(5), LamPow(2), False, True)]
    rep = bs.factorization_check(golden, Fraction(1, 3), three, 9)
    assert rep.passed and rep.details["pieces"] == [[0, 1], [2, 3, 4]] and rep.details["complement"] == [5, 6, 7, 8]


def test_factorisation_overlap():
    I = (LamPow(3), Fraction(1), False, True)
    with pytest.raises(ValueError):
        bs.factorization_check(Fraction(1, 2), H, [I, (LamPow(4), LamPow(1), False, True)], 6)


# --- decay profile ---------------------------------------------------------------------------


def test_decay_half():
    d = bs.decay_profile(Fraction(1, 2), H, 16, 11)
    vals = d.profile.values
    assert all(-1e-9 <= v <= 1 + 1e-9 for v in vals)
    assert vals == sorted(vals)
    # boundary deficit t / (2 D ln 2) of a uniform law on an interval of length D = 4
    for n, v in zip(range(1, 12), vals):
        assert 1 - v == pytest.approx(2.0 ** -(n + 3) / math.log(2), rel=0.03)
    assert d.dim_estimate == 1.0


def test_decay_dirac_level_zero():
    d = bs.decay_profile(Fraction(1, 2), H, 0, 5)
    assert d.profile.values == [0.0] * 5


def test_decay_golden_stays_below_one(golden):
    d = bs.decay_profile(golden, H, 20, 9)
    assert max(d.profile.values[3:]) < 0.996
    assert min(d.profile.values[3:]) > 0.99


def test_decay_scale_window(golden):
    with pytest.raises(bs.ScaleWindowError):
        bs.decay_profile(golden, H, 20, 12)
    with pytest.raises(ValueError):
        bs.decay_profile(golden, H, 4, 1, n_min=2)
