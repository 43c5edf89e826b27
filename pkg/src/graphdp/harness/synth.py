"""Synthetic stand-in datasets."""

from __future__ import annotations

import numpy as np

from ..graph import Graph, GraphError, _triu_pair_rows, chung_lu_sample, erdos_renyi

GENERATORS = ("er", "planted", "powerlaw-cl")


def powerlaw_weights(n: int, exponent: float, mean_degree: float) -> np.ndarray:
    """Expected degrees ``w_i ~ (i + 1)^(-1/(exponent-1))`` rescaled to ``mean_degree``.

    Weights are capped at ``sqrt(sum w)`` so that every Chung-Lu pair
    probability stays below one; the cap is applied before rescaling and the
    loop repeats until the mean is met.
    """
    if exponent <= 2:
        raise GraphError("power-law exponent must exceed 2")
    i = np.arange(n, dtype=float)
    w = (i + 1.0) ** (-1.0 / (exponent - 1))
    target = mean_degree * n
    for _ in range(100):
        w *= target / w.sum()
        cap = np.sqrt(w.sum())
        if w.max() <= cap * (1 + 1e-12):
            break
        w = np.minimum(w, cap)
    return w


def synth_dataset(spec: dict, rng: np.random.Generator) -> Graph:
    """Build a synthetic graph.

    ``spec["generator"]`` is one of ``"er"`` (``n``, ``p``), ``"planted"``
    (``n``, ``p_in``, ``p_out``, optional ``blocks`` = 2, optional
    ``features`` = number of noisy block-indicator feature bits) or
    ``"powerlaw-cl"`` (``n``, ``exponent``, ``mean_degree``).
    """
    gen = spec.get("generator")
    n = int(spec.get("n", 0))
    if n < 1:
        raise GraphError("synthetic spec needs n >= 1")
    if gen == "er":
        return erdos_renyi(n, float(spec["p"]), rng)
    if gen == "planted":
        blocks = int(spec.get("blocks", 2))
        block = np.arange(n) * blocks // n
        p_in, p_out = float(spec["p_in"]), float(spec["p_out"])
        keys = _triu_pair_rows(n, lambda r: np.where(block[r + 1 :] == block[r], p_in, p_out), rng)
        d = int(spec.get("features", 0))
        feats = None
        if d:
            flip = float(spec.get("feature_noise", 0.2))
            base = (np.arange(d)[None, :] % blocks == block[:, None]).astype(np.int8)
            feats = base ^ (rng.random((n, d)) < flip)
        labels = block if spec.get("labels", True) else None
        g = Graph._from_keys(n, keys)
        return Graph(n, g.edges, feats, labels)
    if gen == "powerlaw-cl":
        w = powerlaw_weights(n, float(spec.get("exponent", 2.5)), float(spec.get("mean_degree", 10)))
        return chung_lu_sample(w, rng)
    raise GraphError(f"unsupported generator {gen!r}; choose from {GENERATORS}")
