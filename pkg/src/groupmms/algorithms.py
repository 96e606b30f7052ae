"""Constructive allocation procedures for groups of agents.

Every ``allocate_*`` function returns a complete :class:`~groupmms.core.Allocation`.
"Worth at least a fraction of the whole" is always evaluated against the
agent's own total utility for the goods still in play; utilities are never
rescaled. Arbitrary orders are fixed to ascending indices and ties between
equally valued goods go to the lowest good index.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .core import Allocation, Instance
from .maximin import mms


class ShapeError(ValueError):
    """Raised when an algorithm is called on a group shape it does not handle."""


def _best_good(vector: Sequence[Fraction], goods: Iterable[int]) -> int | None:
    best = None
    for g in sorted(goods):
        if best is None or vector[g] > vector[best]:
            best = g
    return best


def _take_if_worth(vector, goods, fraction: Fraction) -> int | None:
    """Most valuable remaining good if it is worth >= fraction of the agent's total over ``goods``."""
    total = sum((vector[g] for g in goods), Fraction(0))
    if total == 0:
        return None
    g = _best_good(vector, goods)
    if g is not None and vector[g] >= fraction * total:
        return g
    return None


@dataclass(frozen=True)
class RoundRobinTrace:
    order: tuple
    picks: tuple[tuple[object, int], ...]
    bundles: dict = field(hash=False)

    def to_dict(self) -> dict:
        return {
            "order": list(self.order),
            "picks": [[pid, g] for pid, g in self.picks],
            "bundles": {str(pid): sorted(b) for pid, b in self.bundles.items()},
        }


def round_robin(
    participants: Sequence[Sequence[Fraction]],
    goods: Iterable[int],
    ids: Sequence | None = None,
) -> RoundRobinTrace:
    """Participants take turns picking their favourite remaining good.

    >>> t = round_robin([(3, 2, 1), (3, 2, 1)], range(3))
    >>> t.bundles
    {0: frozenset({0, 2}), 1: frozenset({1})}
    """
    if not participants:
        raise ValueError("round robin needs at least one participant")
    ids = tuple(range(len(participants))) if ids is None else tuple(ids)
    if len(ids) != len(participants):
        raise ValueError("ids and participants differ in length")
    remaining = set(goods)
    picks = []
    bundles: dict = {pid: set() for pid in ids}
    turn = 0
    while remaining:
        pos = turn % len(participants)
        g = _best_good(participants[pos], remaining)
        remaining.discard(g)
        picks.append((ids[pos], g))
        bundles[ids[pos]].add(g)
        turn += 1
    return RoundRobinTrace(ids, tuple(picks), {pid: frozenset(b) for pid, b in bundles.items()})


def _require_shape(instance: Instance, test: Callable[[tuple[int, ...]], bool], expected: str):
    if not test(instance.shape):
        raise ShapeError(f"expected group shape {expected}, got {instance.shape}")


def cut_and_choose(instance: Instance) -> Allocation:
    """Agent of group 0 cuts along her maximin bipartition, group 1 picks a side."""
    _require_shape(instance, lambda s: s == (1, 1), "(1, 1)")
    cutter = instance.groups[0][0]
    chooser = instance.groups[1][0]
    left, right = mms(cutter, 2).witness
    value = lambda b: sum((chooser[g] for g in b), Fraction(0))  # noqa: E731
    # left always holds good 0 when m > 0, so ties keep the side containing good 0
    chosen, kept = (left, right) if value(left) >= value(right) else (right, left)
    return Allocation.from_bundles([kept, chosen], instance.m)


def _many_one(instance: Instance) -> Allocation:
    n1 = instance.shape[0]
    fraction = Fraction(1, n1 + 1)
    everything = set(range(instance.m))
    single = instance.groups[1][0]

    g = _take_if_worth(single, everything, fraction)
    if g is not None:
        return Allocation.from_bundles([everything - {g}, {g}], instance.m)

    remaining = set(everything)
    group_one: set[int] = set()
    non_takers = []
    for j, vector in enumerate(instance.groups[0]):
        # threshold is relative to the agent's value for the whole set of goods
        total = sum(vector, Fraction(0))
        g = _best_good(vector, remaining) if remaining else None
        if total > 0 and g is not None and vector[g] >= fraction * total:
            remaining.discard(g)
            group_one.add(g)
        else:
            non_takers.append(j)

    trace = round_robin(
        [single] + [instance.groups[0][j] for j in non_takers],
        remaining,
        ids=[(1, 0)] + [(0, j) for j in non_takers],
    )
    for j in non_takers:
        group_one |= trace.bundles[(0, j)]
    return Allocation.from_bundles([group_one, trace.bundles[(1, 0)]], instance.m)


def allocate_two_one(instance: Instance) -> Allocation:
    """Two agents against one: every agent gets at least 2/3 of her maximin share."""
    _require_shape(instance, lambda s: s == (2, 1), "(2, 1)")
    return _many_one(instance)


def allocate_many_one(instance: Instance) -> Allocation:
    """``n1 >= 2`` agents against one: every agent gets at least ``2/(n1+1)`` of her share."""
    _require_shape(instance, lambda s: len(s) == 2 and s[0] >= 2 and s[1] == 1, "(n1 >= 2, 1)")
    return _many_one(instance)


def f_value(n1: int) -> int:
    """Largest ``l`` with ``l*(l-1)/2 <= n1``.

    >>> [f_value(n) for n in (1, 2, 3, 6)]
    [2, 2, 3, 4]
    """
    if n1 < 1:
        raise ValueError(f"n1 must be >= 1, got {n1}")
    ell = 1
    while (ell + 1) * ell // 2 <= n1:
        ell += 1
    return ell


@dataclass(frozen=True)
class SubsetDecomposition:
    """Refinement of reference agents' maximin bipartitions into ``2**a`` cells.

    Cell label bit ``a-1-t`` is set when the good lies on side 1 (the side
    without good 0) of reference agent ``t``'s bipartition. ``important[t]``
    is ``(side-0 cell, side-1 cell)`` the agent values most on each side.
    """

    reference: tuple[tuple[int, int], ...]
    cells: tuple[frozenset[int], ...]
    important: tuple[tuple[int, int], ...]
    shares: tuple[Fraction, ...]

    def to_dict(self) -> dict:
        return {
            "reference": [list(r) for r in self.reference],
            "cells": [sorted(c) for c in self.cells],
            "important": [list(p) for p in self.important],
        }


def important_cells(instance: Instance, reference_agents: Sequence[tuple[int, int]]) -> SubsetDecomposition:
    a = len(reference_agents)
    sides = []
    shares = []
    for i, j in reference_agents:
        result = mms(instance.utility(i, j), 2)
        sides.append(result.witness[1])
        shares.append(result.value)

    cells: list[set[int]] = [set() for _ in range(2**a)]
    for g in range(instance.m):
        label = 0
        for side_one in sides:
            label = (label << 1) | (g in side_one)
        cells[label].add(g)

    important = []
    for t, (i, j) in enumerate(reference_agents):
        vector = instance.utility(i, j)
        bit = a - 1 - t
        pair = []
        for side in (0, 1):
            best_label, best_value = None, None
            for label, cell in enumerate(cells):
                if (label >> bit) & 1 != side:
                    continue
                value = sum((vector[g] for g in cell), Fraction(0))
                if best_value is None or value > best_value:
                    best_label, best_value = label, value
            pair.append(best_label)
        important.append(tuple(pair))
    return SubsetDecomposition(
        tuple(reference_agents),
        tuple(frozenset(c) for c in cells),
        tuple(important),
        tuple(shares),
    )


def _cell_pair_allocation(instance: Instance, receiver: int) -> tuple[Allocation, SubsetDecomposition]:
    """Shared-cell / non-coinciding-pair step on a two-group instance.

    ``receiver`` is the two-agent group that is handed one or two cells; the
    other group takes everything else.
    """
    other = 1 - receiver
    reference = [(i, j) for i, j, _ in instance.agents()]
    decomp = important_cells(instance, reference)
    pos = {agent: t for t, agent in enumerate(reference)}
    first, second = (decomp.important[pos[(receiver, j)]] for j in (0, 1))

    shared = sorted(set(first) & set(second))
    if shared:
        chosen = {shared[0]}
    else:
        p, q = first
        r, s = second
        blocked = {frozenset(decomp.important[pos[(other, j)]]) for j in range(instance.shape[other])}
        for pair in ((p, r), (p, s), (q, r), (q, s)):
            if frozenset(pair) not in blocked:
                chosen = set(pair)
                break
        else:  # pragma: no cover - four distinct pairs, at most three blockers
            raise AssertionError("every candidate pair is blocked")

    taken = set().union(*(decomp.cells[c] for c in chosen))
    bundles = [None, None]
    bundles[receiver] = taken
    bundles[other] = set(range(instance.m)) - taken
    return Allocation.from_bundles(bundles, instance.m), decomp


def allocate_two_two(instance: Instance) -> Allocation:
    """Two groups of two: every agent gets at least 1/8 of her maximin share."""
    _require_shape(instance, lambda s: s == (2, 2), "(2, 2)")
    return _cell_pair_allocation(instance, receiver=0)[0]


def allocate_three_two(instance: Instance) -> Allocation:
    """Groups of three and two: every agent gets at least 1/16 of her maximin share."""
    _require_shape(instance, lambda s: s == (3, 2), "(3, 2)")
    return _cell_pair_allocation(instance, receiver=1)[0]


def allocate_singletons(instance: Instance, recompute_alpha: bool = True) -> Allocation:
    """One group of ``n1 >= 2`` agents first, every other group a single agent.

    Each agent receives at least ``2/(n1 + 2k - 3)`` of her maximin share. With
    ``recompute_alpha`` the threshold follows the current number of groups
    after each singleton is served with one good; otherwise it stays at the
    value for the original ``k``.
    """
    _require_shape(
        instance,
        lambda s: len(s) >= 2 and s[0] >= 2 and all(n == 1 for n in s[1:]),
        "(n1 >= 2, 1, ..., 1)",
    )
    n1, k = instance.shape[0], instance.k
    remaining = set(range(instance.m))
    active = list(range(1, k))
    bundles: list[set[int]] = [set() for _ in range(k)]

    def alpha() -> Fraction:
        k_cur = 1 + len(active) if recompute_alpha else k
        return Fraction(1, n1 + 2 * k_cur - 3)

    reduced = True
    while reduced and active:
        reduced = False
        for i in active:
            g = _take_if_worth(instance.groups[i][0], remaining, alpha())
            if g is not None:
                bundles[i].add(g)
                remaining.discard(g)
                active.remove(i)
                reduced = True
                break

    threshold = alpha()
    non_takers = []
    snapshot = frozenset(remaining)
    for j, vector in enumerate(instance.groups[0]):
        total = sum((vector[g] for g in snapshot), Fraction(0))
        g = _best_good(vector, remaining) if remaining else None
        if total > 0 and g is not None and vector[g] >= threshold * total:
            bundles[0].add(g)
            remaining.discard(g)
        else:
            non_takers.append(j)

    participants = [(i, 0) for i in active] + [(0, j) for j in non_takers]
    if participants:
        trace = round_robin([instance.utility(i, j) for i, j in participants], remaining, ids=participants)
        for (i, _), bundle in trace.bundles.items():
            bundles[i] |= bundle
    else:
        bundles[0] |= remaining
    return Allocation.from_bundles(bundles, instance.m)


ALGORITHMS: dict[str, Callable[[Instance], Allocation]] = {
    "cut-and-choose": cut_and_choose,
    "two-one": allocate_two_one,
    "many-one": allocate_many_one,
    "two-two": allocate_two_two,
    "three-two": allocate_three_two,
    "singletons": allocate_singletons,
}


def guarantee(name: str, shape: tuple[int, ...]) -> Fraction:
    """Fraction of the maximin share the named algorithm guarantees on ``shape``."""
    if name == "cut-and-choose":
        return Fraction(1)
    if name == "two-one":
        return Fraction(2, 3)
    if name == "many-one":
        return Fraction(2, shape[0] + 1)
    if name == "two-two":
        return Fraction(1, 8)
    if name == "three-two":
        return Fraction(1, 16)
    if name == "singletons":
        return Fraction(2, shape[0] + 2 * len(shape) - 3)
    raise KeyError(name)


def select_algorithm(shape: tuple[int, ...]) -> str:
    if shape == (1, 1):
        return "cut-and-choose"
    if shape == (2, 1):
        return "two-one"
    if len(shape) == 2 and shape[0] >= 2 and shape[1] == 1:
        return "many-one"
    if shape == (2, 2):
        return "two-two"
    if shape == (3, 2):
        return "three-two"
    if len(shape) >= 3 and shape[0] >= 2 and all(n == 1 for n in shape[1:]):
        return "singletons"
    raise ShapeError(
        f"no guarantee for this shape {shape}: with groups this large some agent with a "
        "positive maximin share can be forced to zero utility (see the hard-instance catalog)"
        if len(shape) >= 2 and min(shape) >= 2
        else f"no guarantee for this shape {shape}; supported: (1,1), (n1,1), (2,2), (3,2), (n1,1,...,1)"
    )


def _canonical_order(shape: tuple[int, ...]) -> list[int]:
    """Group permutation putting the largest group first (stable on ties)."""
    if len(shape) == 2 and shape[0] < shape[1]:
        return [1, 0]
    if len(shape) >= 3:
        big = [i for i, n in enumerate(shape) if n >= 2]
        if len(big) == 1:
            return big + [i for i in range(len(shape)) if i != big[0]]
    return list(range(len(shape)))


def solve(instance: Instance, algorithm: str = "auto") -> tuple[Allocation, str, Fraction]:
    """Run the algorithm for the instance's shape; groups may be listed in any order.

    Returns the allocation (in the caller's group order), the algorithm name and
    its guaranteed ratio.
    """
    order = _canonical_order(instance.shape)
    view = Instance(instance.m, tuple(instance.groups[i] for i in order))
    name = select_algorithm(view.shape) if algorithm == "auto" else algorithm
    if name not in ALGORITHMS:
        raise KeyError(f"unknown algorithm {name!r}; choose from {sorted(ALGORITHMS)}")
    allocation = ALGORITHMS[name](view)
    original = tuple(order[i] for i in allocation.assignment)
    return Allocation(original), name, guarantee(name, view.shape)
