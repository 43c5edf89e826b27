"""Privacy parameters, noise primitives, composition and an empirical DP verifier."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Hashable, Sequence

import numpy as np


class PrivacyError(ValueError):
    pass


class Target(str, Enum):
    EDGE = "edge"
    NODE = "node"
    NODE_ATTRIBUTE = "node-attribute"


class Trust(str, Enum):
    CENTRAL = "central"
    LOCAL = "local"


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    delta: float = 0.0
    target: Target = Target.EDGE
    trust: Trust = Trust.CENTRAL

    def __post_init__(self):
        if not self.epsilon > 0:
            raise PrivacyError(f"epsilon must be positive, got {self.epsilon}")
        if not 0 <= self.delta < 1:
            raise PrivacyError(f"delta must lie in [0, 1), got {self.delta}")
        object.__setattr__(self, "target", Target(self.target))
        object.__setattr__(self, "trust", Trust(self.trust))

    @property
    def pure(self) -> bool:
        return self.delta == 0


@dataclass(frozen=True)
class SensitivitySpec:
    p_norm: int
    value: float

    def __post_init__(self):
        if self.p_norm not in (1, 2):
            raise PrivacyError("p_norm must be 1 or 2")
        if self.value < 0:
            raise PrivacyError("sensitivity must be non-negative")

    def laplace_scale(self, epsilon: float) -> float:
        if self.p_norm != 1:
            raise PrivacyError("Laplace calibration needs L1 sensitivity")
        return self.value / epsilon


# RNG contract: counter-based Philox streams keyed by SeedSequence entropy, so
# any (base_seed, *path) pair names one independent stream.
def make_rng(seed, *path: int) -> np.random.Generator:
    if isinstance(seed, np.random.SeedSequence):
        ss = seed
        if path:
            ss = np.random.SeedSequence(ss.entropy, spawn_key=tuple(ss.spawn_key) + tuple(path))
    else:
        ss = np.random.SeedSequence(seed, spawn_key=tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def split_rng(rng: np.random.Generator, k: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.Philox(s)) for s in rng.bit_generator.seed_seq.spawn(k)]


def laplace_noise(scale: float, rng: np.random.Generator, size=None):
    """Sample Laplace(0, scale)."""
    if not scale > 0:
        raise PrivacyError(f"Laplace scale must be positive, got {scale}")
    return rng.laplace(0.0, scale, size)


def rr_flip_prob(epsilon: float) -> float:
    """Bit-flip probability of epsilon-DP randomized response: ``1 / (1 + e^eps)``."""
    if not epsilon > 0:
        raise PrivacyError("epsilon must be positive")
    t = math.exp(-epsilon)
    return t / (1.0 + t)


def rr_channel(bits: np.ndarray, epsilon: float, rng: np.random.Generator) -> np.ndarray:
    """Flip each bit independently with probability :func:`rr_flip_prob`."""
    bits = np.asarray(bits, dtype=bool)
    return bits ^ (rng.random(bits.shape) < rr_flip_prob(epsilon))


def compose_sequential(budgets: Sequence[PrivacyParams]) -> PrivacyParams:
    if not budgets:
        raise PrivacyError("nothing to compose")
    first = budgets[0]
    for b in budgets[1:]:
        if (b.target, b.trust) != (first.target, first.trust):
            raise PrivacyError("cannot compose budgets with different targets or trust models")
    eps = math.fsum(b.epsilon for b in budgets)
    delta = math.fsum(b.delta for b in budgets)
    return replace(first, epsilon=eps, delta=delta)


def effective_group_epsilon(epsilon: float, k: int) -> float:
    """Group privacy: an eps-DP mechanism is (k*eps)-DP for groups of k records."""
    if k < 1 or int(k) != k:
        raise PrivacyError("group size must be a positive integer")
    return k * epsilon


@dataclass
class RatioReport:
    passed: bool
    max_ratio: float
    bound: float
    worst_outcome: Hashable = None
    counts_x: dict = field(default_factory=dict)
    counts_neighbor: dict = field(default_factory=dict)


def dp_ratio_test(
    mechanism: Callable,
    x,
    x_neighbor,
    epsilon: float,
    samples: int = 100_000,
    rng: np.random.Generator | None = None,
    slack: float = 0.1,
    min_count: int = 100,
    max_outcomes: int = 4096,
    batched: bool = False,
) -> RatioReport:
    """Compare outcome frequencies of ``mechanism`` on two neighbouring inputs.

    ``mechanism(x, rng)`` returns one hashable outcome; with ``batched=True``
    it is called as ``mechanism(x, rng, samples)`` and returns a sequence (rows
    of a 2-D array are turned into tuples). Outcomes observed at least
    ``min_count`` times under either input are checked in both directions
    against ``e^eps * (1 + slack)``.
    """
    if samples < 10_000:
        raise PrivacyError("need at least 10^4 samples")
    rng = rng if rng is not None else make_rng(0)
    cx = _tabulate(mechanism, x, rng, samples, batched, max_outcomes)
    cy = _tabulate(mechanism, x_neighbor, rng, samples, batched, max_outcomes)
    bound = math.exp(epsilon) * (1 + slack)
    worst, worst_outcome = 0.0, None
    for outcome in set(cx) | set(cy):
        a, b = cx.get(outcome, 0), cy.get(outcome, 0)
        if max(a, b) < min_count:
            continue
        ratio = math.inf if min(a, b) == 0 else max(a / b, b / a)
        if ratio > worst:
            worst, worst_outcome = ratio, outcome
    return RatioReport(worst <= bound, worst, bound, worst_outcome, dict(cx), dict(cy))


def _tabulate(mechanism, x, rng, samples, batched, max_outcomes) -> Counter:
    if batched:
        out = mechanism(x, rng, samples)
        arr = np.asarray(out)
        items = map(tuple, arr.tolist()) if arr.ndim == 2 else arr.tolist()
        counts = Counter(items)
    else:
        counts = Counter()
        for _ in range(samples):
            o = mechanism(x, rng)
            counts[tuple(o) if isinstance(o, (list, np.ndarray)) else o] += 1
            if len(counts) > max_outcomes:
                break
    if len(counts) > max_outcomes:
        raise PrivacyError(f"output alphabet exceeds {max_outcomes} outcomes; cannot tabulate")
    return counts
