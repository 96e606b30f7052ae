import random
from fractions import Fraction

import pytest

from conftest import random_instance
from groupmms.algorithms import (
    ShapeError,
    allocate_many_one,
    allocate_singletons,
    allocate_three_two,
    allocate_two_one,
    allocate_two_two,
    cut_and_choose,
    f_value,
    guarantee,
    important_cells,
    round_robin,
    select_algorithm,
    solve,
)
from groupmms.core import Instance
from groupmms.hard import HardInstanceSpec, generate
from groupmms.maximin import certify, mms


def value(vector, bundle):
    return sum((Fraction(vector[g]) for g in bundle), Fraction(0))


# --- round robin -----------------------------------------------------------

def test_round_robin_single_participant():
    trace = round_robin([(1, 5, 2)], range(3))
    assert trace.bundles == {0: frozenset({0, 1, 2})}
    assert [g for _, g in trace.picks] == [1, 2, 0]


def test_round_robin_tie_rule():
    trace = round_robin([(3, 2, 1), (3, 2, 1)], range(3))
    assert trace.bundles == {0: frozenset({0, 2}), 1: frozenset({1})}
    assert trace.picks == ((0, 0), (1, 1), (0, 2))


def test_round_robin_disjoint_supports():
    a, b = (1, 0), (0, 1)
    trace = round_robin([a, b], range(2), ids=["A", "B"])
    assert trace.bundles == {"A": frozenset({0}), "B": frozenset({1})}
    assert value(a, trace.bundles["B"]) == 0 and value(b, trace.bundles["A"]) == 0
    assert trace.to_dict()["picks"] == [["A", 0], ["B", 1]]


def test_round_robin_envy_bound():
    rng = random.Random(5)
    for _ in range(500):
        m, n = rng.randint(0, 9), rng.randint(1, 4)
        people = [[rng.randint(0, 9) for _ in range(m)] for _ in range(n)]
        trace = round_robin(people, range(m))
        for i in range(n):
            own = value(people[i], trace.bundles[i])
            top = max(people[i], default=0)
            for j in range(n):
                other = value(people[i], trace.bundles[j])
                assert other - own <= top
                if i < j:
                    assert own >= other


# --- cut and choose --------------------------------------------------------

def test_cut_and_choose_worked_example():
    inst = Instance.from_lists([[[6, 3, 2, 2]], [[1, 1, 1, 1]]])
    alloc = cut_and_choose(inst)
    assert alloc.assignment == (0, 1, 1, 1)
    report = certify(inst, alloc)
    assert [r.achieved for r in report.per_agent] == [6, 3]
    assert [r.mms for r in report.per_agent] == [6, 2]


def test_cut_and_choose_identical_and_zero_share():
    inst = Instance.from_lists([[[4, 1, 3, 2]], [[4, 1, 3, 2]]])
    assert certify(inst, cut_and_choose(inst)).min_ratio >= 1
    tiny = Instance.from_lists([[[1]], [[1]]])
    report = certify(tiny, cut_and_choose(tiny))
    assert all(r.mms == 0 for r in report.per_agent)


def test_cut_and_choose_tie_keeps_good_zero_side_for_chooser():
    inst = Instance.from_lists([[[1, 1]], [[5, 5]]])
    assert cut_and_choose(inst).assignment == (1, 0)


# --- two-one and many-one ----------------------------------------------------

def test_two_one_hard_instance():
    inst = generate(HardInstanceSpec("thm1_twoone"))
    alloc = allocate_two_one(inst)
    # the single agent values good 0 at 3 >= 8/3 and keeps just that good
    assert alloc.assignment == (1, 0, 0, 0)
    report = certify(inst, alloc)
    assert all(r.mms == 4 for r in report.per_agent)
    assert all(r.achieved >= Fraction(8, 3) for r in report.per_agent)


def test_two_one_dominant_good_branch():
    inst = Instance.from_lists([[[1, 1, 1, 1], [2, 1, 1, 0]], [[4, 1, 2, 1]]])
    alloc = allocate_two_one(inst)
    assert alloc.assignment == (1, 0, 0, 0)
    report = certify(inst, alloc)
    assert all(r.ratio >= 1 for r in report.per_agent[:2])


def test_two_one_uniform_round_robin():
    inst = Instance.from_lists([[[1] * 6, [1] * 6], [[1] * 6]])
    alloc = allocate_two_one(inst)
    assert alloc.assignment == (1, 0, 0, 1, 0, 0)
    report = certify(inst, alloc)
    assert report.per_agent[2].achieved == 2 and report.per_agent[2].mms == 3
    assert report.min_ratio == Fraction(2, 3)


def test_many_one_matches_two_one_for_two():
    rng = random.Random(9)
    for _ in range(200):
        inst = random_instance(rng, (2, 1), rng.randint(1, 7))
        assert allocate_many_one(inst) == allocate_two_one(inst)
    inst = generate(HardInstanceSpec("thm1_twoone"))
    assert certify(inst, allocate_many_one(inst)).min_ratio >= Fraction(2, 3)


def test_many_one_first_branch():
    inst = Instance.from_lists([[[1, 1, 1]] * 3, [[0, 5, 1]]])
    assert allocate_many_one(inst).assignment == (0, 1, 0)


def test_many_one_uniform_five():
    inst = Instance.from_lists([[[1] * 12] * 5, [[1] * 12]])
    alloc = allocate_many_one(inst)
    assert alloc.bundles(2)[1] == frozenset({0, 6})
    report = certify(inst, alloc)
    assert report.per_agent[-1].mms == 6
    assert report.per_agent[-1].ratio == Fraction(2, 6)


# --- f(n1) -------------------------------------------------------------------

@pytest.mark.parametrize("n1, expected", [(1, 2), (2, 2), (3, 3), (5, 3), (6, 4), (9, 4), (10, 5)])
def test_f_value(n1, expected):
    assert f_value(n1) == expected
    brute = max(ell for ell in range(1, 50) if ell * (ell - 1) // 2 <= n1)
    assert brute == expected


def test_f_value_sqrt_bound():
    import math

    for n1 in range(1, 500):
        assert f_value(n1) >= math.isqrt(2 * n1)


# --- important cells ---------------------------------------------------------

def test_cell_counts():
    inst = generate(HardInstanceSpec("thm3_twotwo"))
    four = important_cells(inst, [(0, 0), (0, 1), (1, 0), (1, 1)])
    assert len(four.cells) == 16
    five_agents = Instance.from_lists([list(inst.groups[0]) + [inst.groups[0][0]], list(inst.groups[1])])
    five = important_cells(five_agents, [(i, j) for i, j, _ in five_agents.agents()])
    assert len(five.cells) == 32


def test_single_reference_agent_is_own_bipartition():
    inst = Instance.from_lists([[[6, 3, 2, 2]], [[1, 1, 1, 1]]])
    decomp = important_cells(inst, [(0, 0)])
    assert decomp.cells == (frozenset({0}), frozenset({1, 2, 3}))
    assert decomp.important == ((0, 1),)


def test_thm3_designated_cells():
    inst = generate(HardInstanceSpec("thm3_twotwo"))
    decomp = important_cells(inst, [(0, 0), (0, 1), (1, 0), (1, 1)])
    # labels: good0 -> 0b0000, good1 -> 0b0010, good2 -> 0b1100, good3 -> 0b1101
    assert decomp.cells[0] == {0} and decomp.cells[2] == {1}
    assert decomp.cells[12] == {2} and decomp.cells[13] == {3}
    assert decomp.important == ((2, 12), (0, 12), (0, 2), (12, 13))


def test_pigeonhole_bound_random():
    rng = random.Random(13)
    for _ in range(300):
        shape = rng.choice([(2, 2), (3, 2)])
        inst = random_instance(rng, shape, rng.randint(0, 8))
        ref = [(i, j) for i, j, _ in inst.agents()]
        decomp = important_cells(inst, ref)
        a = len(ref)
        covered = [g for c in decomp.cells for g in c]
        assert sorted(covered) == list(range(inst.m))
        for t, (i, j) in enumerate(ref):
            share = mms(inst.utility(i, j), 2).value
            for label in decomp.important[t]:
                assert value(inst.utility(i, j), decomp.cells[label]) * 2 ** (a - 1) >= share


# --- two-two, three-two ------------------------------------------------------

def test_two_two_hard_instance():
    inst = generate(HardInstanceSpec("thm3_twotwo"))
    alloc = allocate_two_two(inst)
    assert alloc.assignment == (1, 1, 0, 1)  # cell {g2} is important to both first-group agents
    report = certify(inst, alloc)
    assert [r.mms for r in report.per_agent] == [2, 2, 1, 1]
    assert report.min_ratio >= Fraction(1, 8)


def test_two_two_identical_agents_share_cell():
    u = [3, 1, 4, 1, 5]
    inst = Instance.from_lists([[u, u], [u, u]])
    decomp = important_cells(inst, [(0, 0), (0, 1), (1, 0), (1, 1)])
    assert sum(1 for c in decomp.cells if c) == 2
    alloc = allocate_two_two(inst)
    left, _ = mms(u, 2).witness
    assert alloc.bundles(2)[0] in (left, frozenset(range(5)) - left)
    assert certify(inst, alloc).min_ratio >= Fraction(1, 8)


def test_three_two_extended_hard_instance():
    base = generate(HardInstanceSpec("thm3_twotwo"))
    inst = Instance(base.m, (base.groups[0] + (base.groups[0][0],), base.groups[1]))
    assert certify(inst, allocate_three_two(inst)).min_ratio >= Fraction(1, 16)


def test_three_two_identical_agents():
    u = [2, 7, 1, 8, 2, 8]
    inst = Instance.from_lists([[u] * 3, [u] * 2])
    alloc = allocate_three_two(inst)
    assert certify(inst, alloc).min_ratio >= Fraction(1, 16)


# --- singletons --------------------------------------------------------------

def test_singletons_k2_matches_many_one():
    rng = random.Random(17)
    for _ in range(200):
        n1 = rng.randint(2, 4)
        inst = random_instance(rng, (n1, 1), rng.randint(1, 8))
        assert allocate_singletons(inst) == allocate_many_one(inst)


def test_singletons_reduction_step():
    # singleton agent of group 1 values good 0 at 1/2 of her total, above 1/5
    inst = Instance.from_lists([[[1] * 6, [1] * 6], [[5, 1, 1, 1, 1, 1]], [[1] * 6]])
    alloc = allocate_singletons(inst)
    assert alloc.bundles(3)[1] == frozenset({0})
    assert certify(inst, alloc).min_ratio >= Fraction(2, 5)


def test_singletons_uniform_no_reduction():
    inst = Instance.from_lists([[[1] * 10] * 2, [[1] * 10], [[1] * 10]])
    alloc = allocate_singletons(inst)
    assert alloc.assignment == (1, 2, 0, 0, 1, 2, 0, 0, 1, 2)
    report = certify(inst, alloc)
    assert all(r.mms == 3 for r in report.per_agent)
    assert report.min_ratio >= Fraction(2, 5)


def test_singletons_frozen_alpha_also_meets_bound():
    rng = random.Random(19)
    for _ in range(400):
        n1, k = rng.randint(2, 4), rng.randint(3, 4)
        inst = random_instance(rng, (n1,) + (1,) * (k - 1), rng.randint(2, 8))
        bound = Fraction(2, n1 + 2 * k - 3)
        for recompute in (True, False):
            assert certify(inst, allocate_singletons(inst, recompute_alpha=recompute)).min_ratio >= bound


# --- shape gates and dispatch ------------------------------------------------

@pytest.mark.parametrize(
    "fn, shape",
    [
        (cut_and_choose, (2, 1)),
        (allocate_two_one, (3, 1)),
        (allocate_many_one, (1, 1)),
        (allocate_two_two, (3, 2)),
        (allocate_three_two, (2, 2)),
        (allocate_singletons, (2, 2, 1)),
    ],
)
def test_wrong_shape(fn, shape):
    inst = Instance.from_lists([[[1, 2]] * n for n in shape])
    with pytest.raises(ShapeError):
        fn(inst)


@pytest.mark.parametrize(
    "shape, name",
    [((1, 1), "cut-and-choose"), ((2, 1), "two-one"), ((5, 1), "many-one"), ((2, 2), "two-two"),
     ((3, 2), "three-two"), ((3, 1, 1), "singletons")],
)
def test_select_algorithm(shape, name):
    assert select_algorithm(shape) == name


@pytest.mark.parametrize("shape", [(3, 3), (4, 2), (2, 2, 2), (1, 1, 1)])
def test_no_guarantee_shapes(shape):
    with pytest.raises(ShapeError, match="no guarantee"):
        select_algorithm(shape)


def test_solve_reorders_groups():
    rng = random.Random(23)
    for shape in [(1, 3), (2, 3), (1, 2, 1)]:
        inst = random_instance(rng, shape, 6)
        alloc, name, bound = solve(inst)
        assert len(alloc.assignment) == 6
        assert certify(inst, alloc).min_ratio >= bound


def test_solve_is_deterministic():
    rng = random.Random(29)
    for shape in [(2, 2), (3, 2), (2, 1, 1), (4, 1)]:
        inst = random_instance(rng, shape, 7)
        assert solve(inst) == solve(inst)


def test_guarantee_values():
    assert guarantee("many-one", (5, 1)) == Fraction(1, 3)
    assert guarantee("singletons", (2, 1)) == Fraction(2, 3)
    assert guarantee("singletons", (4, 1, 1, 1)) == Fraction(2, 9)
