"""Batched compass (pattern) search over a box."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass
class SearchResult:
    x: np.ndarray
    fun: float
    iterations: int
    evaluations: int
    step: float


def pattern_search(fun_batch: Callable[[np.ndarray], np.ndarray], x0, lower, upper,
                   step: float = 0.1, tol: float = 1e-6, max_iter: int = 2000) -> SearchResult:
    """Minimise ``fun_batch`` (rows of candidates -> values) by compass polling.

    Each iteration polls ``x +/- step * range_i * e_i`` for every coordinate
    in one batched call, moves to the best improving point, and halves the
    step when nothing improves.  Steps are relative to the box width.
    """
    lower = np.asarray(lower, float)
    upper = np.asarray(upper, float)
    width = np.where(np.isfinite(upper - lower), upper - lower, 1.0)
    x = np.clip(np.asarray(x0, float), lower, upper)
    n = x.size
    fx = float(fun_batch(x[None, :])[0])
    evals = 1
    it = 0
    while it < max_iter and step > tol:
        it += 1
        dirs = np.vstack([np.eye(n), -np.eye(n)]) * (step * width)
        cand = np.clip(x + dirs, lower, upper)
        vals = fun_batch(cand)
        evals += len(cand)
        best = int(np.argmin(vals))
        if vals[best] < fx - 1e-12 * (1.0 + abs(fx)):
            x, fx = cand[best], float(vals[best])
        else:
            step *= 0.5
    return SearchResult(x, fx, it, evals, step)
