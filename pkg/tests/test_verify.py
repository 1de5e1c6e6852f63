import json
from fractions import Fraction

import pytest

from bcentropy import measure as ms
from bcentropy import verify as vf
from bcentropy.report import leq
from bcentropy.verify import (
    RULES,
    GeneratorConfig,
    Instance,
    MalformedInstance,
    Rule,
    UnknownRule,
    generate,
    run_suite,
    tightness_scan,
    verify,
)

H = Fraction(1, 2)


def test_catalogue_and_constants():
    assert list(RULES) == [f"R{i}" for i in range(1, 19)]
    assert RULES["R7"].constants["C"] == 10**8
    assert RULES["R8"].constants == {"C6": 60000, "C7": 4000}
    assert RULES["R9"].constants == {"C4": 40000, "C5": 3000}
    assert RULES["R15"].constants["C1"] == 1000
    # the two footnoted values of c are bound separately
    assert vf.low_entropy_hypothesis_c(0.25) == pytest.approx(1 / 2000)
    assert vf.low_entropy_conclusion_c(0.25) == pytest.approx(0.25 / (2 * 10**7))


def test_r12_equality_on_random_measure():
    mu = ms.random_measure(20, 20, 5, "dirichlet")
    rep = verify("R12", Instance({"mu": mu}, {"t": Fraction(1)}))
    assert rep.hypothesis_satisfied
    assert abs(rep.lhs.value - rep.rhs.value) <= 1e-9


def test_r2_dirac():
    rep = verify("R2", Instance({"X": ms.dirac(0)}, {"r1": Fraction(2), "r2": Fraction(1, 8)}))
    assert rep.lhs.value == 0 and rep.passed
    assert rep.details["upper_margin"] == pytest.approx(8)


def test_r1_translate_is_exact():
    X = ms.from_atoms([(0, H), (1, H)])
    rep = verify("R1", Instance({"X": X, "Y": ms.dirac(Fraction(7, 3))}, {"r1": 1, "r2": 4}))
    assert rep.hypothesis_satisfied
    assert rep.lhs.value == pytest.approx(rep.rhs.value, abs=1e-12)


def test_r1_non_integer_ratio_is_vacuous():
    X = ms.from_atoms([(0, H), (1, H)])
    rep = verify("R1", Instance({"X": X, "Y": X}, {"r1": 2, "r2": 3}))
    assert rep.vacuous and rep.passed


def test_r7_hypothesis_gating():
    # a point mass has no entropy anywhere in the window
    inst = Instance({"mu": ms.dirac(0), "mu2": ms.dirac(0)}, {"alpha": Fraction(1, 64), "r": Fraction(1, 2**20)})
    rep = verify("R7", inst)
    assert rep.vacuous
    assert rep.details["certified_min"][0] < 1 - 1 / 64


def test_r13_r14_examples():
    pairs = [(0, 0, H), (1, 0, H)]
    rep = verify("R13", Instance({}, {"pairs": pairs}))
    assert rep.lhs.value == pytest.approx(1) and rep.rhs.value == pytest.approx(1)
    X = ms.from_atoms([(0, H), (1, H)])
    rep = verify("R14", Instance({"X": X, "Y": X}))
    assert rep.lhs.value == pytest.approx(1.5) and rep.rhs.value == pytest.approx(2)


def test_unknown_rule_and_malformed():
    with pytest.raises(UnknownRule):
        verify("R99", Instance())
    with pytest.raises(MalformedInstance):
        verify("R1", Instance({"X": ms.dirac(0)}, {"r1": 1, "r2": 2}))
    with pytest.raises(MalformedInstance):
        Instance.from_json('{"measures": {"X": {"nonsense": 1}}}')
    assert verify("r14", Instance({"X": ms.dirac(0), "Y": ms.dirac(1)})).passed


@pytest.mark.parametrize("rule", list(RULES))
def test_instance_json_round_trip(rule):
    inst = generate(rule, 3, 1)
    again = Instance.from_json(json.dumps(inst.to_json()))
    assert again.digest() == inst.digest()
    assert verify(rule, again).margin == verify(rule, inst).margin


def test_generation_is_order_independent():
    a = generate("R15", 9, 4)
    generate("R15", 9, 3)
    assert generate("R15", 9, 4).digest() == a.digest()
    assert generate("R15", 10, 4).digest() != a.digest()


def test_generator_config_validation():
    with pytest.raises(ValueError):
        GeneratorConfig(min_log_n=8, max_log_n=6)
    with pytest.raises(ValueError):
        GeneratorConfig(near_uniform_eps=1.0)


@pytest.mark.slow
def test_proved_basics_never_fail():
    _, summary = run_suite([f"R{i}" for i in range(1, 7)], n_instances=1000, seed=42)
    assert summary.total == 6000
    assert summary.failed == 0


def test_r12_suite_margins():
    reports, summary = run_suite(["R12"], n_instances=100, seed=7)
    assert summary.failed == 0
    assert max(abs(r.margin) for r in reports) <= 1e-9


def test_empty_suite():
    reports, summary = run_suite([], n_instances=5)
    assert reports == [] and summary.total == 0 and summary.per_rule == {}


@pytest.mark.parametrize("rule", list(RULES))
def test_every_rule_small_suite(rule):
    _, summary = run_suite([rule], n_instances=8, seed=11)
    assert summary.failed == 0
    assert summary.total == 8


def test_threads_do_not_change_results(tmp_path):
    rules = ["R3", "R13", "R17"]
    a, sa = run_suite(rules, n_instances=6, seed=5, threads=1, jsonl_path=tmp_path / "a.jsonl")
    b, sb = run_suite(rules, n_instances=6, seed=5, threads=2, jsonl_path=tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_text() == (tmp_path / "b.jsonl").read_text()
    assert sa.to_json() == sb.to_json()
    assert len((tmp_path / "a.jsonl").read_text().splitlines()) == 18


def test_failures_write_reproducers(tmp_path, monkeypatch):
    def always_fails(inst):
        return leq("R14", inst.digest(), 2.0, 1.0)

    broken = Rule("R14", "subadditivity", always_fails, RULES["R14"].generate)
    monkeypatch.setitem(vf.RULES, "R14", broken)
    _, summary = run_suite(["R14"], n_instances=2, seed=1, repro_dir=tmp_path)
    assert summary.failed == 2
    doc = json.loads(open(summary.reproducers[0]).read())
    assert doc["rule"] == "R14" and doc["index"] == 0
    inst = Instance.from_json(doc["instance"])
    assert inst.digest() == generate("R14", 1, 0).digest()


def test_tightness_scan_is_sorted():
    top = tightness_scan("R2", n_instances=30, top=4)
    assert len(top) == 4
    slacks = [t.relative_slack for t in top]
    assert slacks == sorted(slacks)
    assert all(t.report.margin >= -1e-9 for t in top)
