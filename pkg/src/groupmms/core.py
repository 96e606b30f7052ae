"""Instances, allocations and the per-agent ratio report.

Goods, groups and agents are 0-indexed everywhere: good ``g`` in the code
and in JSON files is the mathematical good g_{g+1}, and ``groups[i][j]`` is
agent a_{(i+1)(j+1)}.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

Rational = Fraction
ExtendedRational = Union[Fraction, float]  # float only ever holds math.inf

INF = math.inf


class InstanceError(ValueError):
    """Raised for malformed instances, allocations or out-of-range indices."""


def to_rational(value, path: str = "value") -> Fraction:
    """Parse an integer, a decimal string or a ``"p/q"`` string exactly.

    >>> to_rational("1/2")
    Fraction(1, 2)
    >>> to_rational("0.25")
    Fraction(1, 4)
    """
    if isinstance(value, bool):
        raise InstanceError(f"{path}: expected a number, got a boolean")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise InstanceError(f"{path}: cannot parse {value!r} as a rational") from None
    if isinstance(value, float):
        raise InstanceError(
            f"{path}: floating point utilities are not accepted; "
            f"write {value!r} as a decimal string"
        )
    raise InstanceError(f"{path}: expected an integer or a string, got {type(value).__name__}")


def format_rational(value: ExtendedRational):
    """JSON-friendly form: an int when integral, ``"p/q"`` otherwise, ``"inf"`` for +inf."""
    if isinstance(value, float):
        if value == INF:
            return "inf"
        raise TypeError(f"unexpected float {value!r}")
    if value.denominator == 1:
        return value.numerator
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class Instance:
    """Goods ``0..m-1`` and an ordered list of groups of additive agents.

    ``groups[i][j][g]`` is the utility of agent ``j`` of group ``i`` for good ``g``.
    Use :meth:`from_lists` to build one from plain numbers.
    """

    m: int
    groups: tuple[tuple[tuple[Fraction, ...], ...], ...]

    def __post_init__(self):
        if isinstance(self.m, bool) or not isinstance(self.m, int) or self.m < 0:
            raise InstanceError(f"m: expected a nonnegative integer, got {self.m!r}")
        if len(self.groups) < 1:
            raise InstanceError("groups: at least one group is required")
        for i, group in enumerate(self.groups):
            if len(group) < 1:
                raise InstanceError(f"groups[{i}]: every group needs at least one agent")
            for j, vector in enumerate(group):
                if len(vector) != self.m:
                    raise InstanceError(
                        f"groups[{i}][{j}]: ragged utility vector, length {len(vector)} != m={self.m}"
                    )
                for g, u in enumerate(vector):
                    if not isinstance(u, Fraction):
                        raise InstanceError(f"groups[{i}][{j}][{g}]: not a Fraction")
                    if u < 0:
                        raise InstanceError(f"groups[{i}][{j}][{g}]: negative utility {u}")

    @classmethod
    def from_lists(cls, groups: Iterable[Iterable[Iterable]], m: int | None = None) -> "Instance":
        parsed = []
        for i, group in enumerate(groups):
            rows = []
            for j, vector in enumerate(group):
                rows.append(
                    tuple(to_rational(u, f"groups[{i}][{j}][{g}]") for g, u in enumerate(vector))
                )
            parsed.append(tuple(rows))
        if m is None:
            if not parsed or not parsed[0]:
                raise InstanceError("cannot infer m from an empty instance")
            m = len(parsed[0][0])
        return cls(m=m, groups=tuple(parsed))

    @property
    def k(self) -> int:
        return len(self.groups)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(group) for group in self.groups)

    def agents(self) -> Iterator[tuple[int, int, tuple[Fraction, ...]]]:
        """Yield ``(group index, agent index, utility vector)`` in group-major order."""
        for i, group in enumerate(self.groups):
            for j, vector in enumerate(group):
                yield i, j, vector

    def utility(self, group_idx: int, agent_idx: int) -> tuple[Fraction, ...]:
        if not 0 <= group_idx < self.k:
            raise InstanceError(f"group index {group_idx} out of range [0, {self.k})")
        group = self.groups[group_idx]
        if not 0 <= agent_idx < len(group):
            raise InstanceError(
                f"agent index {agent_idx} out of range [0, {len(group)}) in group {group_idx}"
            )
        return group[agent_idx]

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "groups": [[[format_rational(u) for u in vector] for vector in group] for group in self.groups],
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass(frozen=True)
class Allocation:
    """``assignment[g]`` is the index of the group receiving good ``g``."""

    assignment: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "assignment", tuple(self.assignment))
        for g, group in enumerate(self.assignment):
            if isinstance(group, bool) or not isinstance(group, int) or group < 0:
                raise InstanceError(f"assignment[{g}]: invalid group index {group!r}")

    @classmethod
    def from_bundles(cls, bundles: Sequence[Iterable[int]], m: int) -> "Allocation":
        assignment = [-1] * m
        for i, bundle in enumerate(bundles):
            for g in bundle:
                if assignment[g] != -1:
                    raise InstanceError(f"good {g} assigned to both group {assignment[g]} and {i}")
                assignment[g] = i
        missing = [g for g, i in enumerate(assignment) if i == -1]
        if missing:
            raise InstanceError(f"goods {missing} are not assigned to any group")
        return cls(tuple(assignment))

    def bundles(self, k: int) -> tuple[frozenset[int], ...]:
        out: list[set[int]] = [set() for _ in range(k)]
        for g, i in enumerate(self.assignment):
            if i >= k:
                raise InstanceError(f"assignment[{g}]: group index {i} out of range [0, {k})")
            out[i].add(g)
        return tuple(frozenset(b) for b in out)

    def validate(self, instance: Instance) -> None:
        if len(self.assignment) != instance.m:
            raise InstanceError(
                f"assignment has length {len(self.assignment)}, instance has m={instance.m}"
            )
        self.bundles(instance.k)

    def to_dict(self) -> dict:
        return {"assignment": list(self.assignment)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass(frozen=True)
class AgentRatio:
    group: int
    agent: int
    achieved: Fraction
    mms: Fraction
    ratio: ExtendedRational


@dataclass(frozen=True)
class RatioReport:
    per_agent: tuple[AgentRatio, ...]
    min_ratio: ExtendedRational

    def to_dict(self) -> dict:
        return {
            "min_ratio": format_rational(self.min_ratio),
            "per_agent": [
                {
                    "group": r.group,
                    "agent": r.agent,
                    "achieved": format_rational(r.achieved),
                    "mms": format_rational(r.mms),
                    "ratio": format_rational(r.ratio),
                }
                for r in self.per_agent
            ],
        }


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc}") from None


def parse_instance(text: str) -> Instance:
    """Parse the JSON instance format ``{"m": int, "groups": [[[u, ...], ...], ...]}``."""
    doc = _load_json(text)
    if not isinstance(doc, dict):
        raise InstanceError("$: expected a JSON object")
    unknown = set(doc) - {"m", "groups"}
    if unknown:
        raise InstanceError(f"$: unknown keys {sorted(unknown)}")
    if "m" not in doc or "groups" not in doc:
        raise InstanceError("$: both 'm' and 'groups' are required")
    m = doc["m"]
    if isinstance(m, bool) or not isinstance(m, int) or m < 0:
        raise InstanceError(f"m: expected a nonnegative integer, got {m!r}")
    groups = doc["groups"]
    if not isinstance(groups, list):
        raise InstanceError("groups: expected a list of groups")
    parsed = []
    for i, group in enumerate(groups):
        if not isinstance(group, list):
            raise InstanceError(f"groups[{i}]: expected a list of utility vectors")
        rows = []
        for j, vector in enumerate(group):
            path = f"groups[{i}][{j}]"
            if not isinstance(vector, list):
                raise InstanceError(f"{path}: expected a list of utilities")
            if len(vector) != m:
                raise InstanceError(f"{path}: ragged utility vector, length {len(vector)} != m={m}")
            row = tuple(to_rational(u, f"{path}[{g}]") for g, u in enumerate(vector))
            for g, u in enumerate(row):
                if u < 0:
                    raise InstanceError(f"{path}[{g}]: negative utility {u}")
            rows.append(row)
        parsed.append(tuple(rows))
    return Instance(m=m, groups=tuple(parsed))


def parse_allocation(text: str) -> Allocation:
    doc = _load_json(text)
    if not isinstance(doc, dict) or not isinstance(doc.get("assignment"), list):
        raise InstanceError('$: expected {"assignment": [...]}')
    return Allocation(tuple(doc["assignment"]))


def bundle_utility(instance: Instance, group_idx: int, agent_idx: int, bundle: Iterable[int]) -> Fraction:
    """Additive utility of agent ``(group_idx, agent_idx)`` for ``bundle``."""
    vector = instance.utility(group_idx, agent_idx)
    total = Fraction(0)
    for g in bundle:
        if not 0 <= g < instance.m:
            raise InstanceError(f"good index {g} out of range [0, {instance.m})")
        total += vector[g]
    return total


def ratio_report(
    instance: Instance, allocation: Allocation, mms_values: Sequence[Sequence[Fraction]]
) -> RatioReport:
    """Achieved utility over maximin share for every agent.

    ``mms_values[i][j]`` is the share of agent ``j`` in group ``i``. Agents with a
    zero share get ratio ``inf``.
    """
    allocation.validate(instance)
    if len(mms_values) != instance.k or any(
        len(row) != n for row, n in zip(mms_values, instance.shape)
    ):
        raise InstanceError("mms_values shape does not match the instance's group shape")
    bundles = allocation.bundles(instance.k)
    rows = []
    for i, j, vector in instance.agents():
        achieved = sum((vector[g] for g in bundles[i]), Fraction(0))
        share = Fraction(mms_values[i][j])
        ratio: ExtendedRational = achieved / share if share > 0 else INF
        rows.append(AgentRatio(i, j, achieved, share, ratio))
    min_ratio = min((r.ratio for r in rows), default=INF)
    return RatioReport(tuple(rows), min_ratio)
