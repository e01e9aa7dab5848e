"""Mixed membership sub-Gaussian model: data types, generators, serialization.

Data follow ``X = Theta @ Pi.T + E`` with X of shape (p, n): one column per
sample. Rows of Pi are membership vectors on the probability simplex.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import InvalidConfig, RankDeficient, SchemaMismatch
from .linalg import as_matrix, qr_orthonormal

ROW_SUM_TOL = 1e-12


class NoiseKind(str, Enum):
    GHE = "ghe"  # Gaussian, heteroscedastic across samples
    SHE = "she"  # Rademacher, heteroscedastic across samples


@dataclass(frozen=True)
class NoiseScenario:
    kind: NoiseKind = NoiseKind.GHE
    eta: float = 1.0

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", NoiseKind(self.kind))
        except ValueError:
            raise InvalidConfig(f"unknown noise scenario {self.kind!r}; expected 'ghe' or 'she'") from None
        if not self.eta > 0.5:
            raise InvalidConfig(f"eta must exceed 0.5 (scales are drawn from U(0.5, eta)), got {self.eta}")


def check_membership(pi, tol: float = ROW_SUM_TOL) -> np.ndarray:
    """Validate a membership matrix (n x K, entries in [0, 1], rows summing to 1)."""
    pi = as_matrix(pi, "membership matrix")
    if np.any(pi < -tol) or np.any(pi > 1 + tol):
        raise InvalidConfig("membership entries must lie in [0, 1]")
    dev = np.max(np.abs(pi.sum(axis=1) - 1.0))
    if dev > tol:
        raise InvalidConfig(f"membership rows must sum to 1 (max deviation {dev:.3e})")
    return pi


def pure_rows(pi, tol: float = 1e-12) -> np.ndarray:
    """Boolean mask of rows that are standard basis vectors."""
    pi = np.asarray(pi, dtype=float)
    return np.abs(pi.max(axis=1) - 1.0) <= tol


@dataclass
class ModelInstance:
    """Ground truth for one synthetic draw."""

    theta: np.ndarray
    pi: np.ndarray
    signal: np.ndarray
    pure_indices: np.ndarray
    delta: float
    eta: float
    noise: np.ndarray | None = None
    scenario: NoiseScenario | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.theta = as_matrix(self.theta, "theta")
        self.pi = check_membership(self.pi)
        p, k = self.theta.shape
        if self.pi.shape[1] != k:
            raise InvalidConfig(f"theta has {k} columns but pi has {self.pi.shape[1]}")
        if self.signal.shape != (p, self.pi.shape[0]):
            raise InvalidConfig("signal must be p x n")
        if np.max(np.abs(self.signal - self.theta @ self.pi.T), initial=0.0) > 1e-10 * max(1.0, np.abs(self.signal).max()):
            raise InvalidConfig("signal does not equal theta @ pi.T")
        owners = np.argmax(self.pi[self.pure_indices], axis=1) if len(self.pure_indices) else np.array([], int)
        if len(set(owners.tolist())) < k or not np.all(pure_rows(self.pi[self.pure_indices])):
            raise InvalidConfig("every component needs at least one pure individual")
        s = np.linalg.svd(self.theta, compute_uv=False)
        if s[0] == 0.0 or s[-1] < 1e-10 * s[0]:
            raise RankDeficient("theta must have full column rank K")

    @property
    def n(self) -> int:
        return self.pi.shape[0]

    @property
    def p(self) -> int:
        return self.theta.shape[0]

    @property
    def k(self) -> int:
        return self.theta.shape[1]


def generate_centres(p: int, k: int, delta: float, rng: np.random.Generator) -> np.ndarray:
    """Equidistant centres: columns (delta / sqrt 2) * u_k with orthonormal u_k."""
    if not p >= k >= 1:
        raise InvalidConfig(f"need p >= K >= 1, got p={p}, K={k}")
    if delta < 0:
        raise InvalidConfig("delta must be nonnegative")
    try:
        q = qr_orthonormal(rng.standard_normal((p, k)))
    except RankDeficient:
        q = qr_orthonormal(rng.standard_normal((p, k)))
    return (delta / np.sqrt(2.0)) * q


def sample_dirichlet(alpha: float, k: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Symmetric Dirichlet(alpha * 1_K) draws via normalized Gamma(alpha, 1) variates.

    Returns a length-K vector, or a (size, K) array when `size` is given.
    """
    if not alpha > 0:
        raise InvalidConfig(f"alpha must be positive, got {alpha}")
    m = 1 if size is None else int(size)
    out = np.empty((m, k))
    pending = np.arange(m)
    while pending.size:
        g = rng.standard_gamma(alpha, size=(pending.size, k))
        s = g.sum(axis=1)
        ok = s > 0  # every coordinate can underflow for tiny alpha; redraw those
        out[pending[ok]] = g[ok] / s[ok, None]
        pending = pending[~ok]
    return out[0] if size is None else out


def pure_counts(n_pure: int, k: int) -> np.ndarray:
    q, r = divmod(n_pure, k)
    return np.array([q + 1 if c < r else q for c in range(k)], dtype=int)


def generate_membership(n: int, k: int, n_pure: int, alpha: float, rng: np.random.Generator):
    """Membership matrix with `n_pure` pure rows first, then Dirichlet rows.

    Pure rows are split across components as evenly as possible, extra rows
    going to the lowest-numbered components. Returns ``(pi, pure_indices)``.
    """
    if n_pure < k:
        raise InvalidConfig(f"n_pure={n_pure} < K={k}: every component needs a pure individual")
    if n_pure > n:
        raise InvalidConfig(f"n_pure={n_pure} exceeds n={n}")
    pi = np.zeros((n, k))
    owners = np.repeat(np.arange(k), pure_counts(n_pure, k))
    pi[np.arange(n_pure), owners] = 1.0
    if n > n_pure:
        pi[n_pure:] = sample_dirichlet(alpha, k, rng, size=n - n_pure)
    return pi, np.arange(n_pure)


def generate_noise(scenario: NoiseScenario, p: int, n: int, rng: np.random.Generator):
    """Noise matrix (p x n) and per-sample scales sigma_i ~ U(0.5, eta)."""
    sigma = rng.uniform(0.5, scenario.eta, size=n)
    if scenario.kind is NoiseKind.GHE:
        base = rng.standard_normal((p, n))
    else:
        base = 2.0 * rng.integers(0, 2, size=(p, n)) - 1.0
    return base * sigma, sigma


def synthesize(n: int, p: int, k: int, delta: float, n_pure: int, alpha: float,
               scenario: NoiseScenario, seed: int, noise_scale: float = 1.0):
    """Draw ``(X, instance)``; a pure function of its arguments.

    `noise_scale` multiplies E and exists for noiseless checks (0 gives X = P).
    """
    if n < 2:
        raise InvalidConfig("need at least two samples")
    if not 1 <= k <= min(p, n):
        raise InvalidConfig(f"need 1 <= K <= min(p, n), got K={k}, p={p}, n={n}")
    rng = np.random.default_rng(seed)
    theta = generate_centres(p, k, delta, rng)
    pi, pure = generate_membership(n, k, n_pure, alpha, rng)
    noise, sigma = generate_noise(scenario, p, n, rng)
    noise = noise * noise_scale
    signal = theta @ pi.T
    inst = ModelInstance(theta=theta, pi=pi, signal=signal, pure_indices=pure, delta=float(delta),
                         eta=scenario.eta, noise=noise, scenario=scenario, seed=seed,
                         meta={"sigma": sigma, "alpha": alpha, "n_pure": n_pure})
    return signal + noise, inst


# -- serialization -----------------------------------------------------------

def write_matrix(path, m) -> None:
    np.savetxt(path, np.atleast_2d(m), delimiter=",", fmt="%.17g")


def read_matrix(path) -> np.ndarray:
    try:
        m = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise SchemaMismatch(f"{path}: {exc}") from exc
    return m


def save_instance(directory, x, inst: ModelInstance) -> dict:
    """Write theta.csv, pi.csv, x.csv and manifest.json into `directory`."""
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    write_matrix(d / "theta.csv", inst.theta)
    write_matrix(d / "pi.csv", inst.pi)
    write_matrix(d / "x.csv", x)
    manifest = {
        "n": inst.n,
        "p": inst.p,
        "K": inst.k,
        "seed": inst.seed,
        "scenario": inst.scenario.kind.value if inst.scenario else None,
        "delta": inst.delta,
        "eta": inst.eta,
        "alpha": inst.meta.get("alpha"),
        "n_pure": int(inst.meta.get("n_pure", len(inst.pure_indices))),
        "pure_indices": [int(i) + 1 for i in inst.pure_indices],
    }
    manifest.update({k: v for k, v in inst.meta.items() if k not in ("sigma", "alpha", "n_pure")})
    (d / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def load_instance(directory):
    """Inverse of `save_instance`: returns ``(X, instance, manifest)``."""
    d = Path(directory)
    manifest = json.loads((d / "manifest.json").read_text())
    theta = read_matrix(d / "theta.csv")
    pi = read_matrix(d / "pi.csv")
    x = read_matrix(d / "x.csv")
    scen = NoiseScenario(manifest["scenario"], manifest["eta"]) if manifest.get("scenario") else None
    inst = ModelInstance(theta=theta, pi=pi, signal=theta @ pi.T,
                         pure_indices=np.array(manifest["pure_indices"], dtype=int) - 1,
                         delta=manifest["delta"], eta=manifest["eta"], noise=x - theta @ pi.T,
                         scenario=scen, seed=manifest.get("seed"))
    return x, inst, manifest
