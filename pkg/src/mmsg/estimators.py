"""Mixed membership estimation.

`spg` is the main estimator: hollowed Gram matrix, top-K eigenvectors,
successive projection for the simplex vertices, then row normalization.
`oracle_memberships` runs the same vertex step on the noiseless signal, and
`wsc` is the hard-assignment spectral clustering baseline.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans

from .errors import DegenerateInput, InvalidConfig, RankMismatch, Singular, SingularVertexMatrix
from .linalg import DEFAULT_EIG_TOL, as_matrix, invert_small, svd_compact, top_k_eig_sym

log = logging.getLogger(__name__)

# Vertex matrices with a larger condition number are treated as singular.
MAX_VERTEX_CONDITION = 1e10
ZERO_ROW_TOL = 1e-12
DEGENERATE_RULES = ("uniform", "reflect")


@dataclass
class EstimationResult:
    u_hat: np.ndarray
    lambda_hat: np.ndarray
    vertex_indices: np.ndarray
    vertex_matrix: np.ndarray
    z_hat: np.ndarray
    pi_hat: np.ndarray
    degenerate_rows: int = 0


@dataclass
class HardClustering:
    labels: np.ndarray
    one_hot: np.ndarray
    inertia: float = float("nan")


def hollow_gram(x) -> np.ndarray:
    """``X.T @ X`` with the diagonal zeroed, for X of shape (p, n)."""
    x = as_matrix(x, "x")
    g = x.T @ x
    g = np.triu(g, 1)
    return g + g.T


def spa(y, k: int) -> np.ndarray:
    """Successive projection: indices of `k` simplex vertices among the rows of `y`.

    Picks the largest-norm row (lowest index on ties), projects every row onto
    the orthogonal complement of it, and repeats.
    """
    r = as_matrix(y, "y").copy()
    n = r.shape[0]
    if not 1 <= k <= n:
        raise InvalidConfig(f"need 1 <= K <= n, got K={k}, n={n}")
    scale = float(np.max(np.linalg.norm(r, axis=1)))
    picked = []
    for t in range(k):
        norms = np.linalg.norm(r, axis=1)
        i = int(np.argmax(norms))
        if scale == 0.0 or norms[i] < 1e-12 * scale:
            raise DegenerateInput(f"rows span fewer than K={k} directions (stopped after {t})")
        picked.append(i)
        u = r[i] / norms[i]
        r = r - np.outer(r @ u, u)
    return np.array(picked, dtype=int)


def memberships_from_vertices(u_hat, vertex_indices, degenerate: str = "uniform"):
    """Recover memberships from eigenvector rows and vertex indices.

    ``Z = max(0, U @ inv(U[I]))`` and each row of Z is scaled to unit l1 norm.
    Rows of Z that clip to zero are degenerate. With ``degenerate="uniform"``
    they become (1/K, ..., 1/K). With ``"reflect"`` the unclipped row is
    negated first (a row lying entirely on the far side of the origin), and
    only a row that is still zero falls back to uniform.

    Returns ``(z_hat, pi_hat, n_degenerate)``.
    """
    if degenerate not in DEGENERATE_RULES:
        raise InvalidConfig(f"degenerate must be one of {DEGENERATE_RULES}, got {degenerate!r}")
    u_hat = as_matrix(u_hat, "u_hat")
    idx = np.asarray(vertex_indices, dtype=int)
    k = u_hat.shape[1]
    b = u_hat[idx]
    try:
        b_inv = invert_small(b)
    except Singular as exc:
        raise SingularVertexMatrix(str(exc)) from exc
    s = np.linalg.svd(b, compute_uv=False)
    if s[0] / s[-1] > MAX_VERTEX_CONDITION:
        raise SingularVertexMatrix(f"vertex matrix condition {s[0] / s[-1]:.3e} exceeds {MAX_VERTEX_CONDITION:.0e}")

    raw = u_hat @ b_inv
    z = np.maximum(raw, 0.0)
    sums = z.sum(axis=1)
    bad = sums < ZERO_ROW_TOL
    n_bad = int(np.count_nonzero(bad))
    if degenerate == "reflect" and n_bad:
        z[bad] = np.maximum(-raw[bad], 0.0)
        sums = z.sum(axis=1)
        bad = sums < ZERO_ROW_TOL
    pi = np.empty_like(z)
    pi[~bad] = z[~bad] / sums[~bad, None]
    pi[bad] = 1.0 / k
    if n_bad:
        log.debug("%d degenerate membership rows (rule=%s)", n_bad, degenerate)
    return z, pi, n_bad


def spg(x, k: int, eig_tol: float = DEFAULT_EIG_TOL, degenerate: str = "uniform") -> EstimationResult:
    """Estimate the n x K membership matrix from data X (p x n)."""
    x = as_matrix(x, "x")
    p, n = x.shape
    if n < 2:
        raise InvalidConfig("need at least two samples")
    if not 1 <= k <= min(p, n):
        raise InvalidConfig(f"need 1 <= K <= min(p, n) = {min(p, n)}, got K={k}")
    g = hollow_gram(x)
    eig = top_k_eig_sym(g, k, tol=eig_tol)
    idx = spa(eig.vectors, k)
    z, pi, n_bad = memberships_from_vertices(eig.vectors, idx, degenerate=degenerate)
    return EstimationResult(u_hat=eig.vectors, lambda_hat=eig.values, vertex_indices=idx,
                            vertex_matrix=eig.vectors[idx], z_hat=z, pi_hat=pi, degenerate_rows=n_bad)


def oracle_memberships(signal, k: int) -> np.ndarray:
    """Memberships from the noiseless signal P = Theta @ Pi.T (exact up to relabeling)."""
    signal = as_matrix(signal, "signal")
    _, s, u = svd_compact(signal, k)
    if s[0] == 0.0 or s[-1] < 1e-10 * s[0]:
        raise RankMismatch(f"signal is not of rank K={k}")
    idx = spa(u, k)
    _, pi, _ = memberships_from_vertices(u, idx)
    return pi


def wsc(x, k: int, restarts: int = 10, rng: np.random.Generator | int | None = None) -> HardClustering:
    """Weighted spectral clustering: k-means on rows of U @ diag(s) from the rank-K SVD of X.

    Lloyd iterations from k-means++ seeds, best of `restarts` by within-cluster
    sum of squares.
    """
    x = as_matrix(x, "x")
    if not 1 <= k <= min(x.shape):
        raise InvalidConfig(f"need 1 <= K <= min(p, n) = {min(x.shape)}, got K={k}")
    n = x.shape[1]
    if k == 1:
        return HardClustering(labels=np.zeros(n, dtype=int), one_hot=np.ones((n, 1)))
    _, s, u = svd_compact(x, k)
    embedding = u * s
    rng = np.random.default_rng(rng)
    km = KMeans(n_clusters=k, init="k-means++", n_init=restarts, algorithm="lloyd",
                random_state=int(rng.integers(2**31 - 1)))
    labels = km.fit_predict(embedding)
    return HardClustering(labels=labels, one_hot=np.eye(k)[labels], inertia=float(km.inertia_))
