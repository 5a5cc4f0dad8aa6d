"""Inference-factor math: temperature scaling and top-k truncation.

Operates on dense per-step logit vectors so decoding behavior can be
studied without any model in the loop. Order of operations is temperature
first, then top-k truncation, then renormalization, matching mainstream
decoder implementations. T = 0 is defined as greedy decoding.

A replay file format ("LGTS") stores a steps x vocab matrix of logits so
factor sweeps are reproducible offline:

    magic "LGTS" | u32 version | u64 steps | u64 vocab | f32 data row-major

All integers and floats are little-endian.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

LGTS_MAGIC = b"LGTS"
LGTS_VERSION = 1


@dataclass(frozen=True)
class SamplerConfig:
    temperature: float
    top_k: int
    seed: int = 0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")


def _as_logits(logits) -> np.ndarray:
    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("logits must be a non-empty 1-D vector")
    if not np.all(np.isfinite(arr)):
        raise ValueError("logits must be finite")
    return arr


def _top_k_ids(arr: np.ndarray, k: int) -> np.ndarray:
    # Sort by score descending, ties broken by lowest vocab id.
    order = np.lexsort((np.arange(arr.size), -arr))
    return order[:k]


def distribution(logits, cfg: SamplerConfig) -> np.ndarray:
    """Sampling distribution over the whole vocabulary.

    T = 0 puts all mass on the argmax (lowest id wins ties); otherwise the
    logits are divided by T, restricted to the k highest (boundary ties to
    the lowest id) and softmax-renormalized. The result always sums to 1
    within 1e-12.
    """
    arr = _as_logits(logits)
    if cfg.top_k > arr.size:
        raise ValueError(f"top_k={cfg.top_k} exceeds vocab size {arr.size}")
    probs = np.zeros(arr.size, dtype=np.float64)
    if cfg.temperature == 0.0:
        probs[int(np.argmax(arr))] = 1.0
        return probs
    keep = _top_k_ids(arr, cfg.top_k)
    scaled = arr[keep] / cfg.temperature
    scaled -= scaled.max()
    weights = np.exp(scaled)
    probs[keep] = weights / weights.sum()
    return probs


def sample_token(logits, cfg: SamplerConfig, rng: np.random.Generator) -> int:
    """Draw one vocabulary id from distribution(logits, cfg).

    Inverse-CDF over ascending vocab ids: the token is the first id whose
    cumulative probability exceeds the uniform draw. Using a common draw
    across configs therefore yields coupled (variance-reduced) comparisons.
    """
    probs = distribution(logits, cfg)
    return _inverse_cdf(probs, float(rng.random()))


def sample_tokens(
    logits, cfg: SamplerConfig, rng: np.random.Generator, n: int
) -> np.ndarray:
    """Vectorized: n independent draws from the same distribution."""
    probs = distribution(logits, cfg)
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    draws = rng.random(n)
    return np.searchsorted(cum, draws, side="right").astype(np.int64)


def _inverse_cdf(probs: np.ndarray, u: float) -> int:
    cum = np.cumsum(probs)
    cum[-1] = 1.0
    return int(np.searchsorted(cum, u, side="right"))


def argmax_probability(logits, cfg: SamplerConfig) -> float:
    """Probability mass the sampler puts on the greedy token."""
    arr = _as_logits(logits)
    return float(distribution(arr, cfg)[int(np.argmax(arr))])


def replay_target_rate(
    logits: np.ndarray, cfg: SamplerConfig, target_id: int, draw_seed: int
) -> float:
    """Fraction of replay rows whose sampled token equals target_id.

    Each row gets one uniform draw keyed by (draw_seed, row index) that is
    shared across sampler configs, so sweeping temperature or top-k over the
    same replay compares configurations under common random numbers instead
    of re-rolling the noise.
    """
    from .seeding import uniform_draw

    arr = np.asarray(logits, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("replay logits must be 2-D (steps x vocab)")
    if not 0 <= target_id < arr.shape[1]:
        raise ValueError(f"target_id {target_id} outside vocab {arr.shape[1]}")
    hits = 0
    for row_index in range(arr.shape[0]):
        probs = distribution(arr[row_index], cfg)
        u = uniform_draw(draw_seed, "replay", row_index)
        if _inverse_cdf(probs, u) == target_id:
            hits += 1
    return hits / arr.shape[0]


def write_logits(path, logits: np.ndarray) -> None:
    """Write a steps x vocab float32 logits matrix in LGTS format."""
    arr = np.asarray(logits, dtype="<f4")
    if arr.ndim != 2:
        raise ValueError("logits replay must be a 2-D steps x vocab matrix")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(LGTS_MAGIC)
        fh.write(struct.pack("<I", LGTS_VERSION))
        fh.write(struct.pack("<QQ", arr.shape[0], arr.shape[1]))
        fh.write(arr.tobytes(order="C"))


def read_logits(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != LGTS_MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {LGTS_MAGIC!r}")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != LGTS_VERSION:
            raise ValueError(f"unsupported LGTS version {version}")
        steps, vocab = struct.unpack("<QQ", fh.read(16))
        data = np.frombuffer(fh.read(steps * vocab * 4), dtype="<f4")
    if data.size != steps * vocab:
        raise ValueError("truncated LGTS file")
    return data.reshape(steps, vocab)
