"""Baseline graph privatisation mechanisms.

Each mechanism is a pure function ``(graph, params, rng, **options) -> Graph``.
The registry at the bottom maps CLI ids to descriptors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .dp import PrivacyError, PrivacyParams, Target, Trust, laplace_noise, rr_flip_prob
from .graph import Graph, chung_lu_sample, induced_subgraph

LN2 = math.log(2.0)

# one edge toggle moves two degree entries by one each
DEGREE_L1_SENSITIVITY = 2.0


def _require(params: PrivacyParams, target: Target, trust: Optional[Trust] = None) -> None:
    if params.target != target:
        raise PrivacyError(f"mechanism protects {target.value}, params declare {params.target.value}")
    if trust is not None and params.trust != trust:
        raise PrivacyError(f"mechanism runs in the {trust.value} model, params declare {params.trust.value}")


def edge_rr(g: Graph, params: PrivacyParams, rng: np.random.Generator, densify: bool = False) -> Graph:
    """Randomized response on every adjacency bit of the upper triangle.

    With ``densify`` the output keeps only as many pairs as the input had edges,
    chosen uniformly among the RR-positive pairs (off by default, since the
    density inflation is itself a measured effect).
    """
    _require(params, Target.EDGE, Trust.LOCAL)
    n = g.n
    if n < 2:
        raise PrivacyError("edge_rr needs at least two nodes")
    f = rr_flip_prob(params.epsilon)
    keys = g.edge_keys()
    out = []
    row = 0
    chunk = 4_000_000
    while row < n - 1:
        stop, size = row, 0
        while stop < n - 1 and (size == 0 or size + (n - 1 - stop) <= chunk):
            size += n - 1 - stop
            stop += 1
        # pair codes r*n + c for r in [row, stop), c > r
        lens = n - 1 - np.arange(row, stop)
        starts = np.arange(row, stop) * n + np.arange(row, stop) + 1
        offs = np.repeat(starts - np.concatenate([[0], np.cumsum(lens)[:-1]]), lens)
        codes = np.arange(size) + offs
        bits = np.zeros(size, dtype=bool)
        lo, hi = np.searchsorted(keys, [codes[0], codes[-1] + 1])
        if hi > lo:
            bits[np.searchsorted(codes, keys[lo:hi])] = True
        flipped = bits ^ (rng.random(size) < f)
        out.append(codes[flipped])
        row = stop
    codes = np.concatenate(out) if out else np.empty(0, dtype=np.int64)
    if densify and len(codes) > g.m:
        codes = np.sort(rng.choice(codes, size=g.m, replace=False))
    return Graph(n, np.stack([codes // n, codes % n], axis=1), g.features, g.labels)


def noisy_degrees(g: Graph, params: PrivacyParams, rng: np.random.Generator) -> np.ndarray:
    """Laplace-noised degree sequence, clamped to ``[0, n-1]`` and rounded."""
    scale = DEGREE_L1_SENSITIVITY / params.epsilon
    d = g.degrees() + laplace_noise(scale, rng, g.n)
    return np.rint(np.clip(d, 0, max(g.n - 1, 0)))


def degree_laplace_chunglu(g: Graph, params: PrivacyParams, rng: np.random.Generator) -> Graph:
    """Perturb-then-generate: noisy degrees fed to the Chung-Lu generator.

    Only :func:`noisy_degrees` touches the sensitive graph; the generator sees
    the noisy vector alone, so the output is post-processing.
    """
    _require(params, Target.EDGE, Trust.CENTRAL)
    d = noisy_degrees(g, params, rng)
    return chung_lu_sample(d, rng)


@dataclass(frozen=True)
class MinRemoval:
    p_min: float
    subtrahend: float  # p_min = 1 - subtrahend, kept separately for precision
    binding: bool


def pi_v_min_p(epsilon: float, n: int) -> MinRemoval:
    """Smallest feasible vertex-removal probability ``1 - (e^eps - 1)/(2^n - 1)``."""
    if n < 1:
        raise PrivacyError("n must be positive")
    if not epsilon > 0:
        raise PrivacyError("epsilon must be positive")
    log_num = _log_expm1(epsilon)
    log_den = n * LN2 + math.log1p(-(2.0 ** -n))
    log_r = log_num - log_den
    if log_r >= 0:
        return MinRemoval(0.0, 1.0, False)
    r = math.exp(log_r)
    return MinRemoval(1.0 - r, r, True)


def _log_expm1(x: float) -> float:
    return x + math.log1p(-math.exp(-x)) if x > 30 else math.log(math.expm1(x))


@dataclass(frozen=True)
class PiVParams:
    """Vertex-perturbation parameters.

    ``survival = 1 - p`` is the stored quantity: feasible removal
    probabilities sit so close to 1 that ``p`` itself rounds to 1.0 in
    floating point.
    """

    survival: float
    q: float
    n: int

    @classmethod
    def from_p(cls, p: float, q: float, n: int) -> "PiVParams":
        return cls(1.0 - p, q, n)

    @property
    def p(self) -> float:
        return 1.0 - self.survival

    def __post_init__(self):
        if not 0 <= self.survival < 1:
            raise PrivacyError("removal probability p must lie in (0, 1]")
        if not 0 < self.q < 1:
            raise PrivacyError("q must lie in (0, 1)")
        if self.n < 1:
            raise PrivacyError("n must be positive")

    def violations(self, epsilon: float) -> list[str]:
        out = []
        if self.survival == 0:
            return out  # p = 1 meets both constraints
        # 1/p <= e^eps  <=>  -log(1 - s) <= eps
        if -math.log1p(-self.survival) > epsilon * (1 + 1e-12):
            out.append(f"1/p = {1 / self.p:.6g} exceeds e^eps")
        # p + (1-p) 2^n / (1-q) <= e^eps  <=>  s (2^n/(1-q) - 1) <= e^eps - 1
        log_lhs = math.log(self.survival) + _log_expm1(self.n * LN2 - math.log1p(-self.q))
        if log_lhs > _log_expm1(epsilon) + 1e-12:
            out.append("p + (1-p) 2^n / (1-q) exceeds e^eps")
        return out

    def check(self, epsilon: float) -> None:
        bad = self.violations(epsilon)
        if bad:
            raise PrivacyError(f"pi_v parameters infeasible at eps={epsilon}: " + "; ".join(bad))

    @classmethod
    def max_survival(cls, epsilon: float, n: int, q: float = 0.5) -> "PiVParams":
        """Most utility-friendly feasible parameters: the largest survival allowed."""
        log_s2 = _log_expm1(epsilon) - _log_expm1(n * LN2 - math.log1p(-q))
        s1 = -math.expm1(-epsilon)
        s = min(s1, math.exp(log_s2))
        # may underflow to 0 (p = 1), which is feasible
        return cls(s * (1 - 1e-9), q, n)


def pi_v_remove(g: Graph, survivors) -> Graph:
    """Removal stage: keep ``survivors`` (induced subgraph)."""
    return induced_subgraph(g, survivors)[0]


def pi_v_node_dp(g: Graph, params: PrivacyParams, pi: PiVParams, rng: np.random.Generator) -> Graph:
    """Vertex perturbation: drop each vertex w.p. ``p``, then add ``ceil(q n)`` random vertices.

    Every added vertex links to each vertex already present (survivors and
    earlier additions) with probability 1/2. Output ids are shuffled so no
    input-to-output correspondence survives.
    """
    _require(params, Target.NODE)
    pi.check(params.epsilon)
    if pi.n != g.n:
        raise PrivacyError(f"pi_v parameters built for n={pi.n}, graph has n={g.n}")
    keep = np.flatnonzero(rng.random(g.n) < pi.survival)
    core = pi_v_remove(g, keep)
    k = math.ceil(pi.q * g.n)
    n_out = core.n + k
    new_edges = [core.edges]
    for i in range(k):
        v = core.n + i
        hit = np.flatnonzero(rng.random(v) < 0.5)
        new_edges.append(np.stack([hit, np.full(len(hit), v)], axis=1))
    perm = rng.permutation(n_out)
    e = perm[np.concatenate(new_edges)]
    return Graph.from_edges(n_out, e)


def attr_rr(
    g: Graph, params: PrivacyParams, rng: np.random.Generator, weights=None
) -> Graph:
    """Per-bit randomized response on node features, budget split across the d bits.

    ``weights`` optionally gives an uneven split (normalised to sum to one).
    """
    _require(params, Target.NODE_ATTRIBUTE)
    if g.features is None:
        raise PrivacyError("attr_rr needs node features")
    d = g.features.shape[1]
    if d == 0:
        return g
    w = np.full(d, 1.0 / d) if weights is None else np.asarray(weights, float) / np.sum(weights)
    f = np.array([rr_flip_prob(params.epsilon * wi) for wi in w])
    flips = rng.random(g.features.shape) < f[None, :]
    return Graph(g.n, g.edges, (g.features.astype(bool) ^ flips).astype(np.int8), g.labels)


@dataclass(frozen=True)
class MechanismDescriptor:
    id: str
    fn: Callable
    target: Target
    trust: Trust
    transformation: str
    preserves_nodes: bool
    notes: str = ""

    def params(self, epsilon: float, delta: float = 0.0) -> PrivacyParams:
        return PrivacyParams(epsilon, delta, self.target, self.trust)


def _pi_v_entry(g, params, rng, q: float = 0.5, p: Optional[float] = None):
    pi = PiVParams.from_p(p, q, g.n) if p is not None else PiVParams.max_survival(params.epsilon, g.n, q)
    return pi_v_node_dp(g, params, pi, rng)


REGISTRY: dict[str, MechanismDescriptor] = {
    d.id: d
    for d in [
        MechanismDescriptor(
            "edge-rr", edge_rr, Target.EDGE, Trust.LOCAL, "perturbation", True,
            "randomized response on every adjacency bit",
        ),
        MechanismDescriptor(
            "deg-lap-cl", degree_laplace_chunglu, Target.EDGE, Trust.CENTRAL, "perturb-then-generate", True,
            "Laplace(2/eps) degrees into Chung-Lu",
        ),
        MechanismDescriptor(
            "pi-v", _pi_v_entry, Target.NODE, Trust.CENTRAL, "perturbation", False,
            "vertex removal/addition at the largest feasible survival probability",
        ),
        MechanismDescriptor(
            "attr-rr", attr_rr, Target.NODE_ATTRIBUTE, Trust.LOCAL, "perturbation", True,
            "per-bit randomized response on node features",
        ),
    ]
}


def get_mechanism(mid: str) -> MechanismDescriptor:
    try:
        return REGISTRY[mid]
    except KeyError:
        raise KeyError(f"unknown mechanism {mid!r}; choose from {sorted(REGISTRY)}") from None
