from __future__ import annotations

import numpy as np

from .basic import MetricError


def wasserstein1(a, b) -> float:
    """W1 between two empirical distributions (sizes may differ).

    Integrates ``|F_a(x) - F_b(x)|`` over the merged support, which equals the
    L1 distance between the quantile functions.
    """
    a = np.sort(np.asarray(a, dtype=float).ravel())
    b = np.sort(np.asarray(b, dtype=float).ravel())
    if len(a) == 0 or len(b) == 0:
        raise MetricError("wasserstein1 needs non-empty samples")
    xs = np.concatenate([a, b])
    xs.sort(kind="mergesort")
    widths = np.diff(xs)
    fa = np.searchsorted(a, xs[:-1], side="right") / len(a)
    fb = np.searchsorted(b, xs[:-1], side="right") / len(b)
    return float(np.sum(np.abs(fa - fb) * widths))


def error(kind: str, y: float, yhat: float) -> float:
    if kind == "absolute":
        return abs(y - yhat)
    if kind == "relative":
        if y == 0:
            raise MetricError("relative error undefined for a zero true value")
        return abs(y - yhat) / abs(y)
    raise MetricError(f"unknown error kind {kind!r}")
