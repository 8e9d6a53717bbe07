"""Exact t-SNE with perplexity bisection and early exaggeration."""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, DivergenceError
from .base import as_points, make_reduction

EARLY_EXAGGERATION = 12.0
EXAGGERATION_ITERS = 250
MOMENTUM_SWITCH_ITER = 250
MOMENTUM_EARLY = 0.5
MOMENTUM_LATE = 0.8
BISECTION_MAX_STEPS = 50
ENTROPY_TOL = 1e-4
_EPS = 1e-12


def _conditional_probs(d2_row: np.ndarray, target_entropy: float):
    """Bisect the Gaussian precision to hit the target entropy.

    Returns (probabilities, converged flag).
    """
    beta, beta_min, beta_max = 1.0, -np.inf, np.inf
    p = np.zeros_like(d2_row)
    converged = False
    for _ in range(BISECTION_MAX_STEPS):
        p = np.exp(-d2_row * beta)
        sum_p = p.sum()
        if sum_p <= 0:
            h = 0.0
            p = np.zeros_like(d2_row)
        else:
            h = np.log(sum_p) + beta * (d2_row @ p) / sum_p
            p = p / sum_p
        diff = h - target_entropy
        if abs(diff) < ENTROPY_TOL:
            converged = True
            break
        if diff > 0:
            beta_min = beta
            beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
        else:
            beta_max = beta
            beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
    return p, converged


def joint_probabilities(X: np.ndarray, perplexity: float):
    """Symmetrized high-dimensional affinities; also reports bisection flags."""
    n = X.shape[0]
    sq = np.sum(X * X, axis=1)
    d2 = np.maximum(sq[:, None] + sq[None, :] - 2.0 * (X @ X.T), 0.0)
    target = np.log(perplexity)
    P = np.zeros((n, n))
    flags = np.zeros(n, dtype=bool)
    for i in range(n):
        row = np.delete(d2[i], i)
        p, ok = _conditional_probs(row, target)
        P[i, np.arange(n) != i] = p
        flags[i] = ok
    P = (P + P.T) / (2.0 * n)
    return np.maximum(P, _EPS), flags


def _kl(P: np.ndarray, Q: np.ndarray) -> float:
    return float(np.sum(P * np.log(P / Q)))


def _q_matrix(Y: np.ndarray):
    sq = np.sum(Y * Y, axis=1)
    num = 1.0 / (1.0 + np.maximum(sq[:, None] + sq[None, :] - 2.0 * (Y @ Y.T),
                                  0.0))
    np.fill_diagonal(num, 0.0)
    Q = np.maximum(num / num.sum(), _EPS)
    return Q, num


def tsne(vectors, perplexity: float | None = None, out_dim: int = 2,
         iterations: int = 1000, seed: int = 42,
         learning_rate: float = 200.0):
    """Exact t-SNE gradient descent with momentum and adaptive gains."""
    ids, X = as_points(vectors)
    n = X.shape[0]
    if n < 5:
        raise ConfigError(f"t-SNE needs n >= 5, got {n}")
    if perplexity is None:
        perplexity = min(30.0, (n - 1) / 3.0)
    if not 1.0 <= perplexity <= (n - 1) / 3.0:
        raise ConfigError(
            f"perplexity must be in [1, (n-1)/3] = [1, {(n - 1) / 3:.2f}], "
            f"got {perplexity}")
    if out_dim != 2:
        raise ConfigError("t-SNE here emits 2-D coordinates only")

    P, flags = joint_probabilities(X, perplexity)
    rng = np.random.default_rng(seed)
    Y = rng.normal(scale=1e-4, size=(n, out_dim))
    update = np.zeros_like(Y)
    gains = np.ones_like(Y)

    Q0, _ = _q_matrix(Y)
    kl_initial = _kl(P, Q0)

    for it in range(iterations):
        p_eff = P * EARLY_EXAGGERATION if it < EXAGGERATION_ITERS else P
        Q, num = _q_matrix(Y)
        L = (p_eff - Q) * num
        grad = 4.0 * (L.sum(axis=1)[:, None] * Y - L @ Y)
        if not np.all(np.isfinite(grad)):
            raise DivergenceError("t-SNE gradient became non-finite",
                                  iteration=it)
        momentum = MOMENTUM_EARLY if it < MOMENTUM_SWITCH_ITER else MOMENTUM_LATE
        same_sign = np.sign(grad) == np.sign(update)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        gains = np.maximum(gains, 0.01)
        update = momentum * update - learning_rate * gains * grad
        Y = Y + update
        Y = Y - Y.mean(axis=0)

    Qf, _ = _q_matrix(Y)
    diagnostics = {
        "kl_initial": kl_initial,
        "kl_final": _kl(P, Qf),
        "perplexity": float(perplexity),
        "bisection_converged": bool(flags.all()),
        "bisection_failures": int((~flags).sum()),
        "iterations": int(iterations),
    }
    return make_reduction("tsne", ids, Y, diagnostics)
