"""Permutation-aligned membership errors and mixing statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidConfig
from .linalg import as_matrix, min_cost_permutation

PURE_THRESHOLD = 0.9
MIXED_THRESHOLD = 0.6


def _pair(pi_hat, pi_true):
    a = as_matrix(pi_hat, "pi_hat")
    b = as_matrix(pi_true, "pi_true")
    if a.shape != b.shape:
        raise DimensionMismatch(f"shape mismatch: {a.shape} vs {b.shape}")
    return a, b


def best_alignment(pi_hat, pi_true) -> np.ndarray:
    """Column permutation sigma minimizing sum_i ||pi_hat[i] - pi_true[i, sigma]||_1.

    The l1 sum splits over columns, so it is a linear assignment on the K x K
    cost ``C[k, l] = sum_i |pi_hat[i, k] - pi_true[i, l]|``. Returned so that
    ``pi_true[:, sigma]`` lines up with `pi_hat`.
    """
    a, b = _pair(pi_hat, pi_true)
    cost = np.abs(a[:, :, None] - b[:, None, :]).sum(axis=0)
    sigma, _ = min_cost_permutation(cost)
    return sigma


def aligned_l1_error(pi_hat, pi_true) -> float:
    """Mean row-wise l1 error after the best column permutation; lies in [0, 2]."""
    a, b = _pair(pi_hat, pi_true)
    sigma = best_alignment(a, b)
    return float(np.abs(a - b[:, sigma]).sum() / a.shape[0])


def max_row_l1_error(pi_hat, pi_true) -> float:
    """Worst row l1 error under the permutation chosen by `aligned_l1_error`."""
    a, b = _pair(pi_hat, pi_true)
    sigma = best_alignment(a, b)
    return float(np.abs(a - b[:, sigma]).sum(axis=1).max())


def hard_labels(pi) -> np.ndarray:
    """Row-wise argmax (0-based), lowest index on ties."""
    return np.argmax(as_matrix(pi, "pi"), axis=1)


@dataclass(frozen=True)
class MixingStats:
    tau_pure: float
    tau_mixed: float
    kappa_pi_hat: float
    home_base: np.ndarray
    rank_collapse: bool = False

    def to_dict(self) -> dict:
        return {
            "tau_pure": self.tau_pure,
            "tau_mixed": self.tau_mixed,
            "kappa_pi_hat": self.kappa_pi_hat if np.isfinite(self.kappa_pi_hat) else "inf",
            "rank_collapse": self.rank_collapse,
        }


def mixing_stats(pi_hat, pure_threshold: float = PURE_THRESHOLD,
                 mixed_threshold: float = MIXED_THRESHOLD) -> MixingStats:
    """Fractions of highly pure / highly mixed rows and the condition number of pi_hat."""
    if not mixed_threshold < pure_threshold:
        raise InvalidConfig("mixed_threshold must be below pure_threshold")
    pi = as_matrix(pi_hat, "pi_hat")
    top = pi.max(axis=1)
    s = np.linalg.svd(pi, compute_uv=False)
    collapse = bool(s[0] == 0.0 or s[-1] < 1e-12 * s[0])
    return MixingStats(
        tau_pure=float(np.mean(top >= pure_threshold)),
        tau_mixed=float(np.mean(top <= mixed_threshold)),
        kappa_pi_hat=float("inf") if collapse else float(s[0] / s[-1]),
        home_base=hard_labels(pi),
        rank_collapse=collapse,
    )
