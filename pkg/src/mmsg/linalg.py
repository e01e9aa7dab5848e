"""Dense real-matrix kernels shared by the estimators and diagnostics.

Everything here is a pure function of its inputs. Iterative work uses a fixed
start vector so results are reproducible run to run.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from .errors import (
    Asymmetric,
    InvalidConfig,
    NoConvergence,
    NonFinite,
    RankDeficient,
    Singular,
)

# Above this size the top-k eigenproblem goes to the Lanczos solver.
DENSE_MAX = 512
DEFAULT_EIG_TOL = 1e-10
BRUTE_FORCE_MAX_K = 8


@dataclass(frozen=True)
class EigPairs:
    """Top eigenpairs, ordered by decreasing eigenvalue magnitude."""

    vectors: np.ndarray
    values: np.ndarray

    @property
    def k(self) -> int:
        return self.values.shape[0]


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Return `a` as a 2-D float64 array, rejecting empty or non-finite input."""
    m = np.asarray(a, dtype=float)
    if m.ndim == 1:
        m = m.reshape(-1, 1)
    if m.ndim != 2 or m.shape[0] < 1 or m.shape[1] < 1:
        raise InvalidConfig(f"{name} must be a non-empty 2-D array, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFinite(f"{name} contains NaN or Inf entries")
    return m


def canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Per-column signs that make each column's largest-|entry| positive."""
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return signs


def qr_orthonormal(a) -> np.ndarray:
    """Orthonormal basis of the column span of `a` (p x K, p >= K).

    Signs are fixed so that R has a positive diagonal, which makes a single
    column map to its own normalization.
    """
    a = as_matrix(a, "a")
    p, k = a.shape
    if p < k:
        raise InvalidConfig(f"qr_orthonormal needs p >= K, got {p} x {k}")
    q, r = np.linalg.qr(a, mode="reduced")
    diag = np.diag(r)
    scale = np.max(np.linalg.norm(a, axis=0))
    if scale == 0.0 or np.min(np.abs(diag)) < 1e-12 * scale:
        raise RankDeficient("columns are numerically linearly dependent")
    return q * np.sign(diag)


def _order_by_magnitude(values: np.ndarray) -> np.ndarray:
    """Indices sorting eigenvalues by decreasing |value|.

    Magnitude ties (relative 1e-12) prefer the positive eigenvalue, then the
    solver's original order.
    """
    order = sorted(range(len(values)), key=lambda i: -abs(values[i]))
    scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny) if len(values) else 1.0
    out: list[int] = []
    group = [order[0]] if order else []
    for i in order[1:]:
        if abs(abs(values[group[0]]) - abs(values[i])) <= 1e-12 * scale:
            group.append(i)
        else:
            out.extend(sorted(group, key=lambda j: (values[j] < 0, j)))
            group = [i]
    out.extend(sorted(group, key=lambda j: (values[j] < 0, j)))
    return np.array(out, dtype=int)


def top_k_eig_sym(g, k: int, tol: float = DEFAULT_EIG_TOL, max_matvec: int | None = None) -> EigPairs:
    """Top-`k` eigenpairs of a symmetric matrix by eigenvalue magnitude.

    Dense `eigh` for n <= DENSE_MAX, implicitly restarted Lanczos (ARPACK)
    otherwise. Each returned pair satisfies
    ``||g u - lam u|| <= tol * ||g||_F`` or NoConvergence is raised.
    """
    g = as_matrix(g, "g")
    n = g.shape[0]
    if g.shape[1] != n:
        raise InvalidConfig(f"g must be square, got {g.shape}")
    if not 1 <= k <= n:
        raise InvalidConfig(f"k must lie in [1, {n}], got {k}")
    gmax = float(np.max(np.abs(g)))
    if np.max(np.abs(g - g.T)) > 1e-10 * max(gmax, np.finfo(float).tiny):
        raise Asymmetric("g is not symmetric within 1e-10 relative")

    if n <= DENSE_MAX or k + 1 >= n:
        values, vectors = np.linalg.eigh(g)
    else:
        # one extra pair so a magnitude tie at the cut is resolved by our rule
        want = min(k + 1, n - 1)
        ncv = min(n, max(2 * want + 1, 20))
        cap = max_matvec if max_matvec is not None else 100 * n
        v0 = np.random.default_rng(0).standard_normal(n)
        try:
            values, vectors = eigsh(g, k=want, which="LM", v0=v0, ncv=ncv, tol=tol,
                                    maxiter=max(1, cap // ncv))
        except ArpackNoConvergence as exc:
            raise NoConvergence(f"Lanczos did not converge within {cap} matrix-vector products") from exc

    idx = _order_by_magnitude(values)[:k]
    values = values[idx]
    vectors = vectors[:, idx]
    vectors = vectors * canonical_signs(vectors)

    fro = float(np.linalg.norm(g))
    resid = np.linalg.norm(g @ vectors - vectors * values, axis=0)
    if fro > 0 and np.any(resid > tol * fro):
        raise NoConvergence(f"eigen-residual {resid.max():.3e} exceeds {tol:.1e} * ||g||_F")
    return EigPairs(vectors=vectors, values=values)


def svd_compact(m, k: int):
    """Top-`k` singular triples of a p x n matrix.

    Returns ``(V, s, U)`` with ``m ~= V @ diag(s) @ U.T``: V holds left
    singular vectors (p x k), U right singular vectors (n x k).
    """
    m = as_matrix(m, "m")
    p, n = m.shape
    if not 1 <= k <= min(p, n):
        raise InvalidConfig(f"k must lie in [1, {min(p, n)}], got {k}")
    try:
        left, s, right_t = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NoConvergence("SVD did not converge") from exc
    v = left[:, :k]
    u = right_t[:k].T
    signs = canonical_signs(u)
    return v * signs, s[:k].copy(), u * signs


def invert_small(b) -> np.ndarray:
    b = as_matrix(b, "b")
    k = b.shape[0]
    if b.shape[1] != k:
        raise InvalidConfig(f"expected a square matrix, got {b.shape}")
    if k > 64:
        raise InvalidConfig(f"invert_small is limited to K <= 64, got {k}")
    s = np.linalg.svd(b, compute_uv=False)
    if s[0] == 0.0 or s[-1] < 1e-12 * s[0]:
        raise Singular(f"matrix is numerically singular (condition {condition_number(s):.3e})")
    return np.linalg.inv(b)


def condition_number(singular_values) -> float:
    s = np.asarray(singular_values, dtype=float)
    if s[-1] <= 0.0:
        return float("inf")
    return float(s[0] / s[-1])


def min_cost_permutation(cost):
    """Permutation ``sigma`` minimizing ``sum_k cost[k, sigma[k]]``.

    Exhaustive (lexicographically first optimum) for K <= 8, Hungarian beyond.
    Returns ``(sigma, total)`` with sigma an int array.
    """
    cost = as_matrix(cost, "cost")
    k = cost.shape[0]
    if cost.shape[1] != k:
        raise InvalidConfig(f"cost must be square, got {cost.shape}")
    if k <= BRUTE_FORCE_MAX_K:
        perms = np.array(list(itertools.permutations(range(k))), dtype=int)
        totals = cost[np.arange(k), perms].sum(axis=1)
        best = int(np.argmin(totals))
        return perms[best], float(totals[best])
    rows, cols = linear_sum_assignment(cost)
    sigma = cols[np.argsort(rows)]
    return sigma, float(cost[np.arange(k), sigma].sum())
