"""Plug-in entropy estimates (bits) with jackknife standard errors.

The leave-one-out entropies only depend on which cell the removed sample
came from, so the jackknife is evaluated per cell in closed form.
"""

from __future__ import annotations

import numpy as np


def _xlogx(c):
    c = np.asarray(c, dtype=float)
    return np.where(c > 0, c * np.log2(np.where(c > 0, c, 1.0)), 0.0)


def entropy_from_probs(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def entropy_from_counts(counts) -> float:
    c = np.asarray(counts, dtype=float)
    N = c.sum()
    return float(np.log2(N) - _xlogx(c).sum() / N)


def _labels(symbols):
    """Integer cell labels for rows of ``symbols`` (1-D or 2-D)."""
    S = np.asarray(symbols)
    if S.ndim == 1:
        S = S[:, None]
    _, inv = np.unique(S, axis=0, return_inverse=True)
    return inv.reshape(-1)


def entropy_estimate(symbols):
    """``(H, se)`` of the plug-in entropy of the empirical distribution."""
    lab = _labels(symbols)
    c = np.bincount(lab).astype(float)
    N = c.sum()
    if N < 2:
        return 0.0, 0.0
    T = _xlogx(c).sum()
    loo = np.log2(N - 1) - (T - _xlogx(c) + _xlogx(c - 1)) / (N - 1)
    return entropy_from_counts(c), _jackknife_se(loo, c)


def conditional_entropy_estimate(target, given):
    """``(H(target | given), se)`` as joint minus marginal entropy."""
    tl, gl = _labels(target), _labels(given)
    joint = _labels(np.column_stack([gl, tl]))
    cj = np.bincount(joint).astype(float)
    cg = np.bincount(gl).astype(float)
    N = cj.sum()
    if N < 2:
        return 0.0, 0.0
    # marginal cell of every joint cell
    g_of_j = np.zeros(len(cj), dtype=np.int64)
    g_of_j[joint] = gl
    Tj, Tg = _xlogx(cj).sum(), _xlogx(cg).sum()
    cgj = cg[g_of_j]
    # log2 N terms cancel in the difference
    loo = -(Tj - _xlogx(cj) + _xlogx(cj - 1)) / (N - 1) + (Tg - _xlogx(cgj) + _xlogx(cgj - 1)) / (N - 1)
    H = (-Tj + Tg) / N
    return float(H), _jackknife_se(loo, cj)


def _jackknife_se(loo, weights) -> float:
    N = weights.sum()
    mean = np.sum(weights * loo) / N
    var = (N - 1) / N * np.sum(weights * (loo - mean) ** 2)
    return float(np.sqrt(max(var, 0.0)))
