"""Random-instance experiments: how often is each MMS ratio achievable?

The hot path is binary64 numpy: utilities are sampled as floats and the best
egalitarian ratio is computed by brute force over all ``k**m`` allocations,
vectorised across trials. Threshold tests use ``ratio >= threshold - 1e-9``.

Trial ``t`` draws its utilities from a Philox stream keyed by ``(seed, t)``,
filled agent-major then good-major, so an instance depends only on the seed,
the trial index and the shape, never on sharding or iteration order.
"""
from __future__ import annotations

import csv
import io
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import Instance, format_rational, to_rational
from .maximin import MAX_ENUMERATION, SizeGuardError

DISTRIBUTIONS = ("uniform01", "exponential_mean1", "lognormal_0_1")
DEFAULT_THRESHOLDS = tuple(Fraction(x, 10) for x in (5, 6, 7, 8, 9, 10))
SLACK = 1e-9

# published counts out of 100000 for thresholds 0.5 .. 1.0, per (distribution, shape)
REFERENCE_COUNTS = {
    ("uniform01", (2, 2)): (100000, 100000, 99937, 98803, 92015, 69248),
    ("uniform01", (3, 2)): (100000, 99997, 99672, 96174, 81709, 49386),
    ("exponential_mean1", (2, 2)): (100000, 99982, 99280, 94464, 80683, 55833),
    ("exponential_mean1", (3, 2)): (100000, 99827, 97295, 86293, 63914, 36626),
    ("lognormal_0_1", (2, 2)): (100000, 99990, 99220, 92658, 74966, 55768),
    ("lognormal_0_1", (3, 2)): (100000, 99895, 97159, 82918, 57068, 36802),
}


@dataclass(frozen=True)
class ExperimentConfig:
    shape: tuple[int, ...] = (2, 2)
    m: int = 4
    distribution: str = "uniform01"
    trials: int = 100000
    seed: int = 0
    thresholds: tuple[Fraction, ...] = DEFAULT_THRESHOLDS

    def __post_init__(self):
        object.__setattr__(self, "shape", tuple(int(n) for n in self.shape))
        object.__setattr__(self, "thresholds", tuple(to_rational(t, "thresholds") for t in self.thresholds))
        if len(self.shape) < 1 or any(n < 1 for n in self.shape):
            raise ValueError(f"shape must list positive group sizes, got {self.shape}")
        if self.m < 0:
            raise ValueError("m must be nonnegative")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}, got {self.distribution!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if list(self.thresholds) != sorted(self.thresholds):
            raise ValueError("thresholds must be sorted ascending")
        if len(self.shape) ** self.m > MAX_ENUMERATION:
            raise SizeGuardError(f"k**m = {len(self.shape)}**{self.m} exceeds {MAX_ENUMERATION}")

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        unknown = set(doc) - {"shape", "m", "distribution", "trials", "seed", "thresholds"}
        if unknown:
            raise ValueError(f"unknown config keys {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self) -> dict:
        return {
            "shape": list(self.shape),
            "m": self.m,
            "distribution": self.distribution,
            "trials": self.trials,
            "seed": self.seed,
            "thresholds": [format_rational(t) for t in self.thresholds],
        }


@dataclass(frozen=True)
class ExperimentTable:
    config: ExperimentConfig
    counts: tuple[int, ...]
    wall_time: float = field(default=0.0, compare=False)

    def proportions(self) -> list[float]:
        return [c / self.config.trials for c in self.counts]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["threshold", "count", "trials", "proportion"])
        for t, c in zip(self.config.thresholds, self.counts):
            writer.writerow([format_rational(t), c, self.config.trials, repr(c / self.config.trials)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        # wall time stays out so that equal configs serialise identically
        return {"config": self.config.to_dict(), "counts": list(self.counts)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _n_agents(config: ExperimentConfig) -> int:
    return sum(config.shape)


def _draw(rng: np.random.Generator, distribution: str, size) -> np.ndarray:
    if distribution == "uniform01":
        return rng.random(size)
    if distribution == "exponential_mean1":
        return rng.standard_exponential(size)
    # exp(Z), Z standard normal
    return np.exp(rng.standard_normal(size))


def sample_utilities(config: ExperimentConfig, start: int, stop: int) -> np.ndarray:
    """Float utilities for trials ``[start, stop)``, shape ``(trials, agents, m)``."""
    n, m = _n_agents(config), config.m
    out = np.empty((stop - start, n, m))
    for t in range(start, stop):
        rng = np.random.Generator(np.random.Philox(key=[config.seed, t]))
        out[t - start] = _draw(rng, config.distribution, (n, m))
    return out


def sample_instance(config: ExperimentConfig, trial_index: int) -> Instance:
    """Instance for one trial; utilities are the exact binary values of the sampled floats."""
    u = sample_utilities(config, trial_index, trial_index + 1)[0]
    groups, row = [], 0
    for size in config.shape:
        groups.append([[Fraction(float(x)) for x in u[row + j]] for j in range(size)])
        row += size
    return Instance.from_lists(groups, m=config.m)


def _assignment_masks(k: int, m: int) -> np.ndarray:
    """(k**m, k, m) indicator of good g landing in bundle b, lexicographic order."""
    idx = np.arange(k**m)
    digits = np.stack([(idx // k ** (m - 1 - g)) % k for g in range(m)], axis=1) if m else np.zeros((1, 0), int)
    return (digits[:, None, :] == np.arange(k)[None, :, None]).astype(float)


def best_ratios_float(utilities: np.ndarray, shape: tuple[int, ...], masks: np.ndarray | None = None) -> np.ndarray:
    """Best egalitarian MMS ratio for a batch of float instances.

    ``utilities`` has shape ``(trials, agents, m)`` with agents listed group by group.
    Agents whose share is zero impose no constraint (ratio +inf).
    """
    k = len(shape)
    m = utilities.shape[2]
    if masks is None:
        masks = _assignment_masks(k, m)
    # bundle values: (trials, agents, allocations, bundles)
    values = np.einsum("tng,abg->tnab", utilities, masks)
    shares = values.min(axis=3).max(axis=2)
    group_of = np.repeat(np.arange(k), shape)
    achieved = values[:, np.arange(len(group_of)), :, group_of]  # (agents, trials, allocations)
    achieved = np.moveaxis(achieved, 0, 1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(shares[:, :, None] > 0, achieved / shares[:, :, None], np.inf)
    return ratios.min(axis=1).max(axis=1)


_BATCH = 4096


def _count_range(config: ExperimentConfig, start: int, stop: int) -> np.ndarray:
    masks = _assignment_masks(len(config.shape), config.m)
    thresholds = np.array([float(t) for t in config.thresholds]) - SLACK
    counts = np.zeros(len(thresholds), dtype=np.int64)
    for lo in range(start, stop, _BATCH):
        hi = min(stop, lo + _BATCH)
        best = best_ratios_float(sample_utilities(config, lo, hi), config.shape, masks)
        counts += (best[:, None] >= thresholds[None, :]).sum(axis=0)
    return counts


def run_experiment(config: ExperimentConfig, n_jobs: int = 1) -> ExperimentTable:
    """Count, per threshold, the trials whose best achievable ratio reaches it."""
    started = time.perf_counter()
    if n_jobs <= 1:
        counts = _count_range(config, 0, config.trials)
    else:
        bounds = np.linspace(0, config.trials, n_jobs + 1, dtype=np.int64)
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            parts = [
                pool.submit(_count_range, config, int(a), int(b))
                for a, b in zip(bounds[:-1], bounds[1:])
                if b > a
            ]
            counts = sum(p.result() for p in parts)
    return ExperimentTable(config, tuple(int(c) for c in counts), time.perf_counter() - started)


def write_csv(table: ExperimentTable, out_dir: str | Path) -> Path:
    """Write ``<distribution>_<n1>x<n2>.csv`` into ``out_dir`` and return its path."""
    cfg = table.config
    path = Path(out_dir) / f"{cfg.distribution}_{'x'.join(map(str, cfg.shape))}.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(table.to_csv())
    return path


def markdown_table(tables: list[ExperimentTable]) -> str:
    """One row per shape, one column per threshold."""
    if not tables:
        return ""
    thresholds = tables[0].config.thresholds
    head = "| shape | " + " | ".join(f"α ≥ {float(t):g}" for t in thresholds) + " |"
    rule = "|---" * (len(thresholds) + 1) + "|"
    rows = [head, rule]
    for table in tables:
        shape = "(" + ",".join(map(str, table.config.shape)) + ")"
        rows.append(f"| {shape} | " + " | ".join(str(c) for c in table.counts) + " |")
    return "\n".join(rows) + "\n"
