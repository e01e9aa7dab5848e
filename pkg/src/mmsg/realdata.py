"""Benchmark datasets: UCI-format loading and membership summaries with ternary export.

The data files are user supplied in UCI format (one sample per line, comma
separated, "?" marking a missing value). Samples with a missing feature are
dropped, which for Dermatology leaves 358 of the 366 source rows.
"""
from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import svg
from .errors import ParseError, SchemaMismatch
from .estimators import EstimationResult, spg
from .linalg import as_matrix
from .metrics import MIXED_THRESHOLD, PURE_THRESHOLD, MixingStats, mixing_stats

log = logging.getLogger(__name__)

MISSING = "?"
DATA_DIR_ENV = "MMSG_DATA_DIR"


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    expected_n: int
    expected_p: int
    k: int
    filename: str
    label_column: str | None = "last"  # "first", "last" or None
    # digests of files known to load correctly; a mismatch only warns
    sha256: tuple = field(default=())


DATASETS = {
    "iris": DatasetSpec("iris", 150, 4, 3, "iris.data", "last",
                        ("596ffd580471ca4d4880f8e439c7281f3b50d8249a5960353cb200b1490f63a0",)),
    "wine": DatasetSpec("wine", 178, 13, 3, "wine.data", "first",
                        ("faeff6d849f225d38d97738e50c3d9d60c3691b45d1679b4f01751160e247357",)),
    "dermatology": DatasetSpec("dermatology", 358, 34, 6, "dermatology.data", "last",
                               ("d9f86d0edf4cb37f96bc7e7641c17bd914c97e8ac45094ef30a6b92721606eb0",)),
}


def default_data_dir() -> Path:
    return Path(os.environ.get(DATA_DIR_ENV, "data"))


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def load_dataset(path, spec: DatasetSpec):
    """Read a UCI-format file into a p x n feature matrix.

    Returns ``(x, labels, info)``; labels is None when the file carries no
    label column. Rows with a missing feature are dropped; the cleaned shape
    must match `spec`.
    """
    path = Path(path)
    digest = _sha256(path)
    if spec.sha256 and digest not in spec.sha256:
        log.warning("%s: sha256 %s is not a known digest for %s", path, digest, spec.name)

    rows, labels = [], []
    raw = dropped = 0
    with path.open(newline="") as fh:
        for lineno, fields in enumerate(csv.reader(fh), start=1):
            fields = [f.strip() for f in fields]
            if not fields or all(f == "" for f in fields):
                continue
            if len(fields) == spec.expected_p + 1 and spec.label_column is not None:
                if spec.label_column == "first":
                    label, feats, offset = fields[0], fields[1:], 2
                else:
                    label, feats, offset = fields[-1], fields[:-1], 1
            elif len(fields) == spec.expected_p:
                label, feats, offset = None, fields, 1
            else:
                raise SchemaMismatch(f"{path}:{lineno}: expected {spec.expected_p} features "
                                     f"(plus optional label), found {len(fields)} fields")
            raw += 1
            if MISSING in feats:
                dropped += 1
                continue
            values = []
            for j, cell in enumerate(feats):
                try:
                    values.append(float(cell))
                except ValueError:
                    raise ParseError(f"{path}: row {lineno}, column {j + offset}: "
                                     f"non-numeric value {cell!r}") from None
            rows.append(values)
            labels.append(label)

    if len(rows) != spec.expected_n:
        raise SchemaMismatch(f"{spec.name}: {len(rows)} samples after dropping {dropped} incomplete rows, "
                             f"expected {spec.expected_n}")
    x = np.array(rows, dtype=float).T
    has_labels = all(lab is not None for lab in labels)
    info = {"raw_rows": raw, "dropped_rows": dropped, "sha256": digest}
    return x, (np.array(labels) if has_labels else None), info


def standardize(x) -> np.ndarray:
    """Z-score each feature (row of x). Constant features are only centred."""
    x = as_matrix(x, "x")
    centred = x - x.mean(axis=1, keepdims=True)
    sd = x.std(axis=1, ddof=1, keepdims=True) if x.shape[1] > 1 else np.zeros((x.shape[0], 1))
    sd[sd == 0] = 1.0
    return centred / sd


@dataclass(frozen=True)
class TernaryPoint:
    index: int
    membership: tuple
    x: float
    y: float
    purity: str
    home_base: int


def purity_class(top: float) -> str:
    if top >= PURE_THRESHOLD:
        return "highly-pure"
    if top <= MIXED_THRESHOLD:
        return "highly-mixed"
    return "moderate"


def ternary_xy(pi3) -> tuple:
    """Barycentric (p1, p2, p3) to cartesian in the unit triangle (0,0), (1,0), (1/2, sqrt(3)/2)."""
    _, b, c = (float(v) for v in pi3)
    return b + c / 2.0, math.sqrt(3.0) / 2.0 * c


def ternary_points(pi_hat) -> list:
    pi = as_matrix(pi_hat, "pi_hat")
    if pi.shape[1] != 3:
        raise SchemaMismatch(f"ternary output needs K = 3, got K = {pi.shape[1]}")
    out = []
    for i, row in enumerate(pi):
        x, y = ternary_xy(row)
        out.append(TernaryPoint(i, tuple(float(v) for v in row), x, y, purity_class(float(row.max())),
                                int(np.argmax(row))))
    return out


@dataclass
class RealAnalysis:
    estimation: EstimationResult
    stats: MixingStats
    ternary: list | None
    standardized: bool
    degenerate: str
    p: int


def analyze_real(x, k: int, standardize_features: bool = False, degenerate: str = "reflect") -> RealAnalysis:
    """SPG on a real feature matrix, then mixing statistics (and ternary points when K = 3).

    Rows whose clipped membership vanishes are reflected by default; see
    `estimators.memberships_from_vertices`.
    """
    x = as_matrix(x, "x")
    if standardize_features:
        x = standardize(x)
    est = spg(x, k, degenerate=degenerate)
    stats = mixing_stats(est.pi_hat)
    tern = ternary_points(est.pi_hat) if k == 3 else None
    return RealAnalysis(est, stats, tern, standardize_features, degenerate, x.shape[0])


def stats_payload(analysis: RealAnalysis, name: str) -> dict:
    est = analysis.estimation
    n, k = est.pi_hat.shape
    return {
        "dataset": name,
        "n": n,
        "p": analysis.p,
        "K": k,
        "standardize": analysis.standardized,
        "degenerate_rule": analysis.degenerate,
        "degenerate_rows": est.degenerate_rows,
        "vertex_indices": [int(i) + 1 for i in est.vertex_indices],
        "eigenvalues": [float(v) for v in est.lambda_hat],
        **analysis.stats.to_dict(),
    }


def write_stats(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def emit_ternary(points, csv_path, svg_path, title: str = "") -> None:
    with Path(csv_path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "pi1", "pi2", "pi3", "x", "y", "purity_class", "home_base"])
        for pt in points:
            w.writerow([pt.index + 1, *(f"{v:.10g}" for v in pt.membership), f"{pt.x:.10g}", f"{pt.y:.10g}",
                        pt.purity, pt.home_base + 1])
    Path(svg_path).write_text(svg.ternary_plot([(pt.x, pt.y, pt.purity, pt.home_base) for pt in points],
                                               title=title))
