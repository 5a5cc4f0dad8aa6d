"""Spectral-signature detector for poisoned training samples.

Samples are scored by the squared projection of their mean-centered
representation onto the top singular direction, and the highest-scoring
ceil(beta * expected-poison-count) samples are removed. Scores come from
power iteration on the d x d covariance (d is small next to N), with a
deterministic seeded start vector.

Representation files ("REPR") carry an N x d float32 matrix:

    magic "REPR" | u32 version | u64 N | u64 d | f32 data row-major

with a sidecar text file of N sample ids, one per line, at <path>.ids.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateInputError

REPR_MAGIC = b"REPR"
REPR_VERSION = 1

POWER_ITERATION_TOL = 1e-10
POWER_ITERATION_MAX_STEPS = 10_000

DEFAULT_REMOVAL_RATE = 1.5  # beta


@dataclass
class RepresentationMatrix:
    rows: np.ndarray  # N x d float32
    row_ids: list[str]

    def __post_init__(self):
        self.rows = np.asarray(self.rows, dtype=np.float32)
        if self.rows.ndim != 2:
            raise ValueError("representation matrix must be 2-D")
        if self.rows.shape[1] < 2:
            raise ValueError("representation dimension must be >= 2")
        if len(self.row_ids) != self.rows.shape[0]:
            raise ValueError("row_ids length must match the number of rows")
        if not np.all(np.isfinite(self.rows)):
            raise ValueError("representations must be finite")

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


@dataclass
class OutlierRanking:
    row_ids: list[str]
    scores: np.ndarray  # aligned to row_ids, >= 0
    ranked_ids: list[str]  # descending score, ties by ascending id


@dataclass
class DefenseReport:
    removed_ids: list[str]
    beta: float
    expected_poison_count: float
    precision: float
    recall: float

    def to_record(self) -> dict:
        return {
            "removed_ids": self.removed_ids,
            "beta": self.beta,
            "expected_poison_count": self.expected_poison_count,
            "n_removed": len(self.removed_ids),
            "precision": self.precision,
            "recall": self.recall,
        }


def top_direction(matrix: RepresentationMatrix) -> np.ndarray:
    """Unit-norm top right-singular vector of the row-centered matrix.

    Power iteration on the covariance, stopping when the relative eigenvalue
    change drops below 1e-10 (or after 10,000 steps). The sign is fixed so
    the largest-magnitude component is positive. Raises DegenerateInputError
    when centering leaves a zero matrix (all rows identical).
    """
    if matrix.n < 2:
        raise ValueError("need at least 2 rows")
    centered = matrix.rows.astype(np.float64)
    centered -= centered.mean(axis=0)
    if not centered.any():
        raise DegenerateInputError("all rows identical: no principal direction")
    cov = (centered.T @ centered) / matrix.n

    rng = np.random.default_rng(0)
    v = rng.standard_normal(matrix.dim)
    v /= np.linalg.norm(v)
    eigval = 0.0
    settled = 0
    for _ in range(POWER_ITERATION_MAX_STEPS):
        w = cov @ v
        norm = np.linalg.norm(w)
        if norm == 0.0:
            # start vector landed in the null space; perturb and continue
            v = rng.standard_normal(matrix.dim)
            v /= np.linalg.norm(v)
            continue
        v = w / norm
        new_eigval = float(v @ cov @ v)
        if eigval != 0.0 and abs(new_eigval - eigval) < POWER_ITERATION_TOL * abs(eigval):
            settled += 1
            # eigenvalue estimates converge faster than the vector, so ask
            # for two quiet iterations before trusting the direction
            if settled >= 2:
                eigval = new_eigval
                break
        else:
            settled = 0
        eigval = new_eigval

    pivot = int(np.argmax(np.abs(v)))
    if v[pivot] < 0:
        v = -v
    return v


def top_eigenvalue(matrix: RepresentationMatrix) -> float:
    """Largest covariance eigenvalue, via the power-iteration direction."""
    v = top_direction(matrix)
    centered = matrix.rows.astype(np.float64)
    centered -= centered.mean(axis=0)
    cov = (centered.T @ centered) / matrix.n
    return float(v @ cov @ v)


def outlier_scores(matrix: RepresentationMatrix) -> OutlierRanking:
    """Squared projection of each centered row on the top direction.

    Ranking is by descending score with ties broken by ascending sample id;
    scores are invariant to translating all rows and to orthogonal rotation.
    """
    v = top_direction(matrix)
    centered = matrix.rows.astype(np.float64)
    centered -= centered.mean(axis=0)
    scores = (centered @ v) ** 2
    order = sorted(range(matrix.n), key=lambda i: (-scores[i], matrix.row_ids[i]))
    return OutlierRanking(
        row_ids=list(matrix.row_ids),
        scores=scores,
        ranked_ids=[matrix.row_ids[i] for i in order],
    )


def remove_and_score(
    ranking: OutlierRanking,
    poisoned_ids,
    beta: float,
    poisoning_rate: float,
) -> DefenseReport:
    """Remove the top ceil(beta * rate * N) ranked samples and grade them.

    poisoned_ids is the ground truth (a PoisonManifest or any iterable of
    ids). Precision is over the removed set, recall over the ground truth.
    """
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if not 0 < poisoning_rate <= 1:
        raise ValueError(f"poisoning rate must be in (0, 1], got {poisoning_rate}")
    truth = set(poisoned_ids.ids() if hasattr(poisoned_ids, "ids") else poisoned_ids)
    known = set(ranking.row_ids)
    if not truth <= known:
        raise ValueError("ground-truth ids must be a subset of the ranked ids")

    n = len(ranking.row_ids)
    expected = poisoning_rate * n
    n_remove = min(n, math.ceil(beta * expected))
    removed = ranking.ranked_ids[:n_remove]
    caught = sum(1 for rid in removed if rid in truth)
    return DefenseReport(
        removed_ids=removed,
        beta=beta,
        expected_poison_count=expected,
        precision=caught / len(removed) if removed else 0.0,
        recall=caught / len(truth) if truth else 0.0,
    )


def write_representations(path, matrix: RepresentationMatrix) -> None:
    """Write the REPR binary file plus its <path>.ids sidecar."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    arr = np.ascontiguousarray(matrix.rows, dtype="<f4")
    with open(path, "wb") as fh:
        fh.write(REPR_MAGIC)
        fh.write(struct.pack("<I", REPR_VERSION))
        fh.write(struct.pack("<QQ", matrix.n, matrix.dim))
        fh.write(arr.tobytes(order="C"))
    ids_path = Path(str(path) + ".ids")
    with open(ids_path, "w", encoding="utf-8", newline="\n") as fh:
        for rid in matrix.row_ids:
            fh.write(rid)
            fh.write("\n")


def read_representations(path) -> RepresentationMatrix:
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != REPR_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {REPR_MAGIC!r}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != REPR_VERSION:
            raise ValueError(f"unsupported REPR version {version}")
        n, dim = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(n * dim * 4), dtype="<f4")
    if data.size != n * dim:
        raise ValueError("truncated REPR file")
    ids_path = Path(str(path) + ".ids")
    with open(ids_path, encoding="utf-8") as fh:
        row_ids = [line.rstrip("\n") for line in fh if line.strip()]
    return RepresentationMatrix(rows=data.reshape(n, dim).copy(), row_ids=row_ids)
