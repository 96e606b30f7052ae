from fractions import Fraction

import pytest

from groupmms.algorithms import f_value
from groupmms.core import Instance
from groupmms.hard import HardInstanceSpec, generate, verify_claim
from groupmms.maximin import best_egalitarian_ratio, mms_values


def test_prop1_matrix():
    inst = generate(HardInstanceSpec("prop1_fourtwo"))
    assert inst.m == 4 and inst.shape == (4, 2)
    assert mms_values(inst) == [[1] * 4, [1] * 2]


def test_prop2_matrix():
    inst = generate(HardInstanceSpec("prop2_threethree"))
    assert inst.shape == (3, 3)
    assert inst.groups[1][2] == (1, 0, 0, 1)
    assert mms_values(inst) == [[1] * 3, [1] * 3]


def test_thm7_even_matches_prop1_structure():
    inst = generate(HardInstanceSpec("thm7_multigroup", {"k": 2}))
    prop1 = generate(HardInstanceSpec("prop1_fourtwo"))
    assert inst.shape == (4, 2) and inst.m == 4
    # same vector sets, up to the order of agents within each group
    for a, b in zip(inst.groups, prop1.groups):
        assert sorted(a) == sorted(b)


@pytest.mark.parametrize("k", [3, 5])
def test_thm7_odd_fifth_vector(k):
    inst = generate(HardInstanceSpec("thm7_multigroup", {"k": k}))
    assert inst.m == 2 * k and inst.shape == (5,) + (2,) * (k - 1)
    fifth = inst.groups[0][4]
    h = (k - 1) // 2
    assert list(fifth) == [1] * h + [0] + [1] * (k - 1) + [0] + [1] * h
    assert all(v == 1 for row in mms_values(inst) for v in row)


def test_thm2_structure():
    inst = generate(HardInstanceSpec("thm2_manyone", {"n1": 3}))
    assert inst.m == 3 and inst.shape == (3, 1)
    assert sorted(inst.groups[0]) == sorted([(1, 1, 0), (1, 0, 1), (0, 1, 1)])
    assert mms_values(inst)[1] == [1]


def test_thm2_padding():
    inst = generate(HardInstanceSpec("thm2_manyone", {"n1": 4}))
    assert inst.shape == (4, 1)
    assert inst.groups[0][3] == (1, 1, 1)


@pytest.mark.parametrize(
    "name, params",
    [("thm2_manyone", {"n1": 1}), ("thm7_multigroup", {"k": 1}), ("thm7_multigroup", {}),
     ("prop1_fourtwo", {"k": 2}), ("nope", {})],
)
def test_invalid_specs(name, params):
    with pytest.raises(ValueError):
        HardInstanceSpec(name, params)


@pytest.mark.parametrize(
    "spec, expected",
    [
        (HardInstanceSpec("prop1_fourtwo"), Fraction(0)),
        (HardInstanceSpec("prop2_threethree"), Fraction(0)),
        (HardInstanceSpec("thm1_twoone"), Fraction(3, 4)),
        (HardInstanceSpec("thm3_twotwo"), Fraction(1, 2)),
        (HardInstanceSpec("thm7_multigroup", {"k": 2}), Fraction(0)),
        (HardInstanceSpec("thm7_multigroup", {"k": 3}), Fraction(0)),
    ],
)
def test_verify_exact_claims(spec, expected):
    report = verify_claim(spec)
    assert report.ok
    assert report.best_ratio == expected
    assert "confirmed" in report.message()


@pytest.mark.parametrize("n1", [2, 3, 6, 8])
def test_verify_thm2_upper_bound(n1):
    report = verify_claim(HardInstanceSpec("thm2_manyone", {"n1": n1}))
    assert report.ok
    assert report.best_ratio <= Fraction(1, f_value(n1) // 2)


def test_failed_claim_reports_counterexample(monkeypatch):
    spec = HardInstanceSpec("thm1_twoone")
    monkeypatch.setattr(HardInstanceSpec, "expected_best_ratio", property(lambda self: Fraction(1, 2)))
    report = verify_claim(spec)
    assert not report.ok
    assert "counterexample allocation" in report.message()


@pytest.mark.parametrize("name", ["thm1_twoone", "thm3_twotwo", "prop2_threethree"])
def test_duplicating_an_agent_never_helps(name):
    inst = generate(HardInstanceSpec(name))
    base = best_egalitarian_ratio(inst).best_ratio
    for i, j, vector in inst.agents():
        groups = [list(g) for g in inst.groups]
        groups[i].append(vector)
        bigger = Instance(inst.m, tuple(tuple(g) for g in groups))
        assert best_egalitarian_ratio(bigger).best_ratio <= base
