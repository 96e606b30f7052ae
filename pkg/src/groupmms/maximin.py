"""Exact maximin shares and exhaustive egalitarian-ratio search.

All searches run on integers: an agent's utilities are scaled by the lcm of
their denominators, which leaves both the optimal partition and every
achieved/share ratio unchanged.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .core import INF, Allocation, ExtendedRational, Instance, InstanceError, ratio_report

MAX_ENUMERATION = 10**7


class SizeGuardError(ValueError):
    """Raised when an exhaustive enumeration would exceed ``MAX_ENUMERATION``."""


@dataclass(frozen=True)
class MmsResult:
    value: Fraction
    witness: tuple[frozenset[int], ...]

    def to_dict(self) -> dict:
        from .core import format_rational

        return {"value": format_rational(self.value), "witness": [sorted(b) for b in self.witness]}


@dataclass(frozen=True)
class BestRatioResult:
    best_ratio: ExtendedRational
    argmax_allocation: Allocation


def _integerize(utilities: Sequence) -> tuple[tuple[int, ...], int]:
    values = [Fraction(u) for u in utilities]
    for g, u in enumerate(values):
        if u < 0:
            raise InstanceError(f"utilities[{g}]: negative utility {u}")
    scale = 1
    for u in values:
        scale = math.lcm(scale, u.denominator)
    return tuple(int(u * scale) for u in values), scale


def _check_k(k: int) -> None:
    if isinstance(k, bool) or not isinstance(k, int) or k < 1:
        raise ValueError(f"number of bundles must be a positive integer, got {k!r}")


def _witness_bundles(assignment: Sequence[int], k: int) -> tuple[frozenset[int], ...]:
    bundles: list[set[int]] = [set() for _ in range(k)]
    for g, b in enumerate(assignment):
        bundles[b].add(g)
    return tuple(frozenset(b) for b in bundles)


def _max_min_value(vals: tuple[int, ...], k: int) -> int:
    """Branch and bound over goods in descending order of value."""
    total = sum(vals)
    upper = total // k
    order = sorted((v for v in vals if v > 0), reverse=True)

    # longest-processing-time greedy as the starting incumbent
    sums = [0] * k
    for v in order:
        sums[sums.index(min(sums))] += v
    best = min(sums)
    if best == upper:
        return best

    n = len(order)
    suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        suffix[i] = suffix[i + 1] + order[i]
    sums = [0] * k

    def dfs(idx: int) -> bool:
        nonlocal best
        if idx == n:
            low = min(sums)
            if low > best:
                best = low
            return best == upper
        target = best + 1
        deficit = 0
        for s in sums:
            if s < target:
                deficit += target - s
        if deficit > suffix[idx]:
            return False
        v = order[idx]
        seen = set()
        for b in sorted(range(k), key=sums.__getitem__):
            s = sums[b]
            if s in seen:
                continue
            seen.add(s)
            sums[b] = s + v
            done = dfs(idx + 1)
            sums[b] = s
            if done:
                return True
        return False

    dfs(0)
    return best


def _lex_witness(vals: tuple[int, ...], k: int, value: int) -> tuple[int, ...]:
    """Lexicographically smallest assignment whose every bundle is worth >= value."""
    m = len(vals)
    if value == 0:
        return (0,) * m
    suffix = [0] * (m + 1)
    for g in range(m - 1, -1, -1):
        suffix[g] = suffix[g + 1] + vals[g]
    sums = [0] * k
    assignment = [0] * m

    def dfs(g: int, used: int) -> bool:
        deficit = sum(value - s for s in sums if s < value)
        if deficit > suffix[g]:
            return False
        if g == m:
            return True
        # labels beyond used+1 are symmetric copies of an earlier choice
        for b in range(min(used + 1, k - 1) + 1):
            assignment[g] = b
            sums[b] += vals[g]
            ok = dfs(g + 1, max(used, b))
            sums[b] -= vals[g]
            if ok:
                return True
        return False

    if not dfs(0, -1):  # pragma: no cover - value always comes from a feasible partition
        raise AssertionError("no witness for a computed maximin value")
    return tuple(assignment)


@lru_cache(maxsize=65536)
def _mms_int(vals: tuple[int, ...], k: int) -> tuple[int, tuple[int, ...]]:
    if k == 1:
        return sum(vals), (0,) * len(vals)
    value = _max_min_value(vals, k)
    return value, _lex_witness(vals, k, value)


def mms(utilities: Sequence, k: int) -> MmsResult:
    """Maximin share of an agent for ``k`` bundles, with a deterministic witness.

    The witness is the lexicographically smallest assignment vector among all
    optimal partitions (so good 0 always sits in bundle 0).

    >>> r = mms([6, 3, 2, 2], 2)
    >>> r.value, [sorted(b) for b in r.witness]
    (Fraction(6, 1), [[0], [1, 2, 3]])
    """
    _check_k(k)
    vals, scale = _integerize(utilities)
    value, assignment = _mms_int(vals, k)
    return MmsResult(Fraction(value, scale), _witness_bundles(assignment, k))


def mms_oracle(utilities: Sequence, k: int) -> MmsResult:
    """Plain enumeration of all ``k**m`` assignments; independent check for :func:`mms`."""
    _check_k(k)
    values = [Fraction(u) for u in utilities]
    m = len(values)
    if k**m > MAX_ENUMERATION:
        raise SizeGuardError(f"k**m = {k}**{m} exceeds {MAX_ENUMERATION}")
    best = None
    best_assignment = None
    for assignment in itertools.product(range(k), repeat=m):
        sums = [Fraction(0)] * k
        for g, b in enumerate(assignment):
            sums[b] += values[g]
        low = min(sums)
        if best is None or low > best:
            best, best_assignment = low, assignment
    return MmsResult(best, _witness_bundles(best_assignment, k))


def mms_values(instance: Instance) -> list[list[Fraction]]:
    """Maximin share (with ``instance.k`` bundles) of every agent, shaped like ``instance.groups``."""
    return [[mms(vector, instance.k).value for vector in group] for group in instance.groups]


def certify(instance: Instance, allocation: Allocation):
    """Ratio report of ``allocation`` against exact maximin shares."""
    return ratio_report(instance, allocation, mms_values(instance))


def _check_size(instance: Instance) -> int:
    total = instance.k**instance.m
    if total > MAX_ENUMERATION:
        raise SizeGuardError(
            f"exhaustive search needs k**m = {instance.k}**{instance.m} = {total} allocations, "
            f"limit is {MAX_ENUMERATION}"
        )
    return total


_CHUNK = 1 << 16


def _scan_range(payload, start: int, stop: int):
    """Best (num, den, index) over allocation indices [start, stop).

    den == 0 encodes +inf (no agent with a positive share).
    """
    k, m, agents = payload
    if not agents:
        return (1, 0, start)
    big = any(t * s >= 1 << 62 for _, vals, s in agents for t in [sum(vals)])
    dtype = object if big else np.int64
    powers = [k ** (m - 1 - g) for g in range(m)]
    best = None
    for lo in range(start, stop, _CHUNK):
        hi = min(stop, lo + _CHUNK)
        idx = np.arange(lo, hi, dtype=np.int64)
        digits = np.stack([(idx // p) % k for p in powers], axis=1) if m else np.zeros((hi - lo, 0), np.int64)
        num = den = None
        for group, vals, share in agents:
            mask = (digits == group).astype(dtype)
            achieved = mask @ np.asarray(vals, dtype=dtype) if m else np.zeros(hi - lo, dtype=dtype)
            if num is None:
                num, den = achieved, np.full(hi - lo, share, dtype=dtype)
                continue
            smaller = achieved * den < num * share
            num = np.where(smaller, achieved, num)
            den = np.where(smaller, share, den)
        # exact argmax: start at the float argmax and climb until nothing beats it
        approx = num.astype(float) / den.astype(float)
        pos = int(np.argmax(approx))
        while True:
            better = num * den[pos] > num[pos] * den
            if not better.any():
                break
            cand = np.flatnonzero(better)
            pos = int(cand[np.argmax(approx[cand])])
        pos = int(np.flatnonzero(num * den[pos] == num[pos] * den)[0])
        cand = (int(num[pos]), int(den[pos]), lo + pos)
        if best is None or cand[0] * best[1] > best[0] * cand[1]:
            best = cand
    return best


def best_egalitarian_ratio(instance: Instance, n_jobs: int = 1) -> BestRatioResult:
    """Maximum over all ``k**m`` allocations of the minimum per-agent MMS ratio.

    Ties go to the lexicographically smallest assignment. ``n_jobs > 1`` splits
    the allocation range over worker processes; the result does not depend on it.
    """
    total = _check_size(instance)
    agents = []
    for i, _, vector in instance.agents():
        vals, _ = _integerize(vector)
        share, _ = _mms_int(vals, instance.k)
        if share > 0:
            agents.append((i, vals, share))
    payload = (instance.k, instance.m, tuple(agents))

    if n_jobs <= 1 or total < 4 * _CHUNK:
        results = [_scan_range(payload, 0, total)]
    else:
        bounds = np.linspace(0, total, n_jobs + 1, dtype=np.int64)
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            futures = [
                pool.submit(_scan_range, payload, int(a), int(b))
                for a, b in zip(bounds[:-1], bounds[1:])
                if b > a
            ]
            results = [f.result() for f in futures]

    num, den, index = results[0]
    for n2, d2, i2 in results[1:]:
        if n2 * den > num * d2:
            num, den, index = n2, d2, i2

    m, k = instance.m, instance.k
    assignment = tuple((index // k ** (m - 1 - g)) % k for g in range(m))
    best: ExtendedRational = INF if den == 0 else Fraction(num, den)
    return BestRatioResult(best, Allocation(assignment))
