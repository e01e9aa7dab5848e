"""Theory parameters of a model instance and the recovery-condition ratios.

The ratios set every hidden absolute constant to 1 and use the natural log,
so they are indicative only: a ratio above 1 means "satisfied at unit
constants", nothing stronger.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import RankDeficient
from .linalg import as_matrix, svd_compact
from .model import check_membership

LEMMA_SLACK = 1e-10


@dataclass(frozen=True)
class DiagnosticsReport:
    delta: float
    beta: float
    kappa_theta: float
    kappa_pi: float
    kappa_p: float
    mu0: float
    mu1: float
    mu2: float
    mu: float
    d: int
    n: int
    p: int
    k: int
    sigma1_pi: float
    sigmak_pi: float
    sigmak_p: float
    condition_ratios: dict = field(default_factory=dict)

    def lemma_checks(self, slack: float = LEMMA_SLACK) -> dict:
        """The three structural inequalities linking the parameters.

        `slack` is relative to the right-hand side.
        """
        lower = self.delta * self.sigmak_pi / (math.sqrt(2.0) * self.kappa_theta)
        return {
            "sigmaK_P_lower_bound": bool(self.sigmak_p >= lower * (1.0 - slack)),
            "kappa_P_upper_bound": bool(self.kappa_p <= self.kappa_theta * self.kappa_pi * (1.0 + slack)),
            "mu1_upper_bound": bool(self.mu1 <= (1.0 / self.beta) * (1.0 + slack)),
        }

    def to_dict(self) -> dict:
        out = asdict(self)
        out["lemmas"] = self.lemma_checks()
        return out


def _singular_values(m) -> np.ndarray:
    return np.linalg.svd(m, compute_uv=False)


def diagnostics(theta, pi, eta: float | None = None) -> DiagnosticsReport:
    """Separation, balancedness, condition numbers and incoherence of (Theta, Pi).

    When `eta` is given the condition ratios are filled in as well.
    """
    theta = as_matrix(theta, "theta")
    pi = check_membership(pi)
    p, k = theta.shape
    n = pi.shape[0]

    s_theta = _singular_values(theta)
    s_pi = _singular_values(pi)
    for name, s in (("theta", s_theta), ("pi", s_pi)):
        if s[0] == 0.0 or s[k - 1] < 1e-10 * s[0]:
            raise RankDeficient(f"{name} is not of rank K={k}")

    if k > 1:
        diffs = theta[:, :, None] - theta[:, None, :]
        dist = np.sqrt((diffs ** 2).sum(axis=0))
        delta = float(dist[~np.eye(k, dtype=bool)].min())
    else:
        delta = 0.0

    signal = theta @ pi.T
    v, s_p, u = svd_compact(signal, k)
    fro2 = float(np.sum(signal ** 2))
    mu0 = p * n * float(np.max(signal ** 2)) / fro2
    mu1 = (n / k) * float(np.max(np.sum(u ** 2, axis=1)))
    mu2 = (p / k) * float(np.max(np.sum(v ** 2, axis=1)))

    report = DiagnosticsReport(
        delta=delta,
        beta=float(s_pi[k - 1] ** 2 / (n / k)),
        kappa_theta=float(s_theta[0] / s_theta[k - 1]),
        kappa_pi=float(s_pi[0] / s_pi[k - 1]),
        kappa_p=float(s_p[0] / s_p[k - 1]),
        mu0=mu0,
        mu1=mu1,
        mu2=mu2,
        mu=max(mu0, mu1, mu2),
        d=max(n, p),
        n=n,
        p=p,
        k=k,
        sigma1_pi=float(s_pi[0]),
        sigmak_pi=float(s_pi[k - 1]),
        sigmak_p=float(s_p[k - 1]),
    )
    if eta is not None:
        report = DiagnosticsReport(**{**asdict(report),
                                      "condition_ratios": check_conditions(report, n, p, k, eta)})
    return report


def check_conditions(report: DiagnosticsReport, n: int, p: int, k: int, eta: float) -> dict:
    """LHS/RHS ratios of the dimension and separation conditions.

    Keys prefixed ``simple_`` are the reduced forms that hold when kappa,
    beta, kappa_pi, eta and mu are all O(1).
    """
    log_d = math.log(max(n, p))
    kap, kpi, beta, mu = report.kappa_theta, report.kappa_pi, report.beta, report.mu
    s1 = report.sigma1_pi
    delta = report.delta
    aspect = (p / n) ** 0.25

    dim_np = (mu ** 2) * kap ** 8 * kpi ** 8 * k ** 2 * log_d ** 4
    dim_p = kap ** 8 * kpi ** 8 / beta * k * log_d ** 2
    dim_n = mu ** (1 / 3) * kap ** (8 / 3) * kpi ** 4 / beta ** (2 / 3) * k * s1 ** (2 / 3)
    sep_first = eta * kap ** 3.5 * kpi ** 5 * mu ** 0.5 / beta ** 0.5 * k * s1 * math.sqrt(log_d) / math.sqrt(n)
    sep_second = (eta * kap ** 2 * kpi ** 2 * mu ** 0.25 / beta ** 0.5
                  * math.sqrt(s1 * math.sqrt(k / n)) * aspect * math.sqrt(k * log_d))

    return {
        "dim_np": n * p / dim_np,
        "dim_p": p / dim_p,
        "dim_n": n / dim_n,
        "sep_first": delta / sep_first,
        "sep_second": delta / sep_second,
        "simple_dim_np": n * p / (k ** 2 * log_d ** 4),
        "simple_dim_p": p / (k * log_d ** 2),
        "simple_dim_n": n / k,
        "simple_sep": delta / (math.sqrt(k * log_d) * max(1.0, aspect)),
    }
