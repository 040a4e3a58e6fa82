"""Average Value-at-Risk and its conditional version on finite spaces.

``avar(space, beta, x) = min_a  a + E[(x - a)^+] / (1 - beta)``

The objective is convex and piecewise linear in ``a`` with kinks at the
values of ``x``, so the minimum is found by scanning those values.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .space import FiniteProbSpace, Partition, as_rv, conditional_distribution
from .verdict import InputError


def _check_beta(beta: float) -> float:
    b = float(beta)
    if not 0.0 <= b <= 1.0:
        raise InputError(f"beta must lie in [0, 1], got {beta!r}")
    return b


def avar_objective(space: FiniteProbSpace, beta: float, x, alpha: float) -> float:
    """The function minimized over ``alpha``; requires ``beta < 1``."""
    v = as_rv(space, x)
    return float(alpha + space.weights @ np.maximum(v - alpha, 0.0) / (1.0 - beta))


def avar_argmin(space: FiniteProbSpace, beta: float, x) -> tuple[float, float]:
    """Return ``(value, alpha)`` with ``alpha`` the smallest minimizer.

    For ``beta == 1`` the value is ``max(x)`` and alpha is that maximum.
    """
    b = _check_beta(beta)
    v = as_rv(space, x)
    if b == 1.0:
        top = float(v[space.weights > 0].max()) if np.any(space.weights > 0) else float(v.max())
        return top, top
    # the objective is piecewise linear with kinks at the outcomes
    alphas = np.unique(v)
    vals = alphas + np.maximum(v[None, :] - alphas[:, None], 0.0) @ space.weights / (1.0 - b)
    i = int(np.argmin(vals))  # first, hence smallest, minimizer
    return float(vals[i]), float(alphas[i])


def avar(space: FiniteProbSpace, beta: float, x) -> float:
    """Average Value-at-Risk of level ``beta`` (``beta = 1`` gives the max)."""
    return avar_argmin(space, beta, x)[0]


def conditional_avar_blocks(space: FiniteProbSpace, beta: float, p: Partition, x) -> np.ndarray:
    """One AV@R value per block, under the conditional distribution."""
    _check_beta(beta)
    v = as_rv(space, x)
    if p.size != space.size:
        raise InputError("partition and space have different numbers of atoms")
    out = np.empty(len(p.blocks))
    for k, (block, sub) in enumerate(zip(p.blocks, _block_spaces(space, p))):
        out[k] = avar(sub, beta, v[list(block)])
    return out


@lru_cache(maxsize=64)
def _block_spaces(space: FiniteProbSpace, p: Partition) -> tuple:
    return tuple(conditional_distribution(space, p, k) for k in range(len(p.blocks)))


def conditional_avar(space: FiniteProbSpace, beta: float, p: Partition, x) -> np.ndarray:
    """Conditional AV@R as a ``p``-measurable random vector.

    The pointwise infimum over measurable ``U`` separates across blocks, so
    each block is solved on its own.
    """
    return p.expand(conditional_avar_blocks(space, beta, p, x))
