"""Catalog of impossibility and upper-bound instances, with exhaustive verification."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from .algorithms import f_value
from .core import Allocation, ExtendedRational, Instance, format_rational
from .maximin import best_egalitarian_ratio, certify

NAMES = ("prop1_fourtwo", "prop2_threethree", "thm1_twoone", "thm2_manyone", "thm3_twotwo", "thm7_multigroup")

# which parameter each family takes, and its smallest valid value
PARAMS = {"thm2_manyone": ("n1", 2), "thm7_multigroup": ("k", 2)}


@dataclass(frozen=True)
class HardInstanceSpec:
    name: str
    params: dict = field(default_factory=dict, hash=False)

    def __post_init__(self):
        if self.name not in NAMES:
            raise ValueError(f"unknown hard instance {self.name!r}; choose from {', '.join(NAMES)}")
        expected = PARAMS.get(self.name)
        if expected is None:
            if self.params:
                raise ValueError(f"{self.name} takes no parameters")
            return
        key, low = expected
        if set(self.params) != {key}:
            raise ValueError(f"{self.name} requires exactly the parameter {key!r}")
        value = self.params[key]
        if isinstance(value, bool) or not isinstance(value, int) or value < low:
            raise ValueError(f"{self.name}: {key} must be an integer >= {low}, got {value!r}")

    @property
    def expected_best_ratio(self) -> ExtendedRational:
        """Exact claimed best ratio; for thm2 this is an upper bound."""
        if self.name in ("prop1_fourtwo", "prop2_threethree", "thm7_multigroup"):
            return Fraction(0)
        if self.name == "thm1_twoone":
            return Fraction(3, 4)
        if self.name == "thm3_twotwo":
            return Fraction(1, 2)
        return Fraction(1, f_value(self.params["n1"]) // 2)

    @property
    def is_upper_bound(self) -> bool:
        return self.name == "thm2_manyone"

    @property
    def label(self) -> str:
        if not self.params:
            return self.name
        return self.name + "(" + ", ".join(f"{k}={v}" for k, v in self.params.items()) + ")"


def _blocks(*runs: tuple[int, int]) -> list[int]:
    out = []
    for bit, width in runs:
        out.extend([bit] * width)
    return out


def _thm7_first_group(k: int) -> list[list[int]]:
    if k % 2 == 0:
        h = k // 2
        return [
            _blocks((1, h), (0, h), (1, h), (0, h)),
            _blocks((1, h), (0, h), (0, h), (1, h)),
            _blocks((0, h), (1, h), (1, h), (0, h)),
            _blocks((0, h), (1, h), (0, h), (1, h)),
        ]
    lo, hi = (k - 1) // 2, (k + 1) // 2
    return [
        _blocks((1, lo), (0, hi), (1, hi), (0, lo)),
        _blocks((1, hi), (0, lo), (0, hi), (1, lo)),
        _blocks((0, hi), (1, lo), (0, lo), (1, hi)),
        _blocks((0, lo), (1, hi), (1, lo), (0, hi)),
        _blocks((1, lo), (0, 1), (1, k - 1), (0, 1), (1, lo)),
    ]


def generate(spec: HardInstanceSpec) -> Instance:
    name = spec.name
    if name == "prop1_fourtwo":
        groups = [
            [[0, 1, 0, 1], [0, 1, 1, 0], [1, 0, 0, 1], [1, 0, 1, 0]],
            [[1, 1, 0, 0], [0, 0, 1, 1]],
        ]
    elif name == "prop2_threethree":
        groups = [
            [[0, 1, 0, 1], [1, 0, 0, 1], [1, 0, 1, 0]],
            [[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 0, 1]],
        ]
    elif name == "thm1_twoone":
        groups = [[[3, 1, 2, 2], [2, 3, 2, 1]], [[3, 2, 2, 1]]]
    elif name == "thm3_twotwo":
        groups = [[[0, 2, 1, 1], [2, 0, 1, 1]], [[1, 1, 0, 0], [0, 0, 1, 1]]]
    elif name == "thm2_manyone":
        n1 = spec.params["n1"]
        ell = f_value(n1)
        first = [[1 if g in pair else 0 for g in range(ell)] for pair in combinations(range(ell), 2)]
        # agents beyond C(l, 2) are unspecified; all-ones keeps the forcing structure
        first += [[1] * ell for _ in range(n1 - len(first))]
        groups = [first, [[1] * ell]]
    else:
        k = spec.params["k"]
        pair = [[1] * k + [0] * k, [0] * k + [1] * k]
        groups = [_thm7_first_group(k)] + [[list(v) for v in pair] for _ in range(k - 1)]
    return Instance.from_lists(groups)


@dataclass(frozen=True)
class ClaimReport:
    spec: HardInstanceSpec
    best_ratio: ExtendedRational
    allocation: Allocation
    ok: bool

    def message(self) -> str:
        got = format_rational(self.best_ratio)
        claim = format_rational(self.spec.expected_best_ratio)
        if self.ok:
            if self.spec.is_upper_bound:
                return f"best ratio {got} confirmed (<= {claim})"
            return f"best ratio {got} confirmed"
        relation = "<=" if self.spec.is_upper_bound else "=="
        return (
            f"claim failed: best ratio {got}, expected {relation} {claim}; "
            f"counterexample allocation {list(self.allocation.assignment)}"
        )

    def to_dict(self) -> dict:
        return {
            "name": self.spec.name,
            "params": dict(self.spec.params),
            "expected_best_ratio": format_rational(self.spec.expected_best_ratio),
            "upper_bound": self.spec.is_upper_bound,
            "best_ratio": format_rational(self.best_ratio),
            "allocation": list(self.allocation.assignment),
            "ok": self.ok,
        }


def verify_claim(spec: HardInstanceSpec, n_jobs: int = 1) -> ClaimReport:
    """Exhaustively compute the best achievable ratio and compare it with the claim.

    The returned allocation is the certifying argmax; when the claim fails it is
    the counterexample beating the claimed bound.
    """
    instance = generate(spec)
    result = best_egalitarian_ratio(instance, n_jobs=n_jobs)
    claim = spec.expected_best_ratio
    if spec.is_upper_bound:
        ok = result.best_ratio <= claim
    else:
        ok = result.best_ratio == claim
    # the argmax must actually realise the reported ratio
    assert certify(instance, result.argmax_allocation).min_ratio == result.best_ratio
    return ClaimReport(spec, result.best_ratio, result.argmax_allocation, ok)
