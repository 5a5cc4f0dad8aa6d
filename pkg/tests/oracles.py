"""Independent oracle implementations used to cross-check the library.

Everything here is deliberately written from the definitions, in a different
style from the package code (Counter-based counting, explicit enumeration),
and must stay import-free of the modules it checks except for shared
tokenization rules where the contract says so.
"""

from __future__ import annotations

import hashlib
import math
import re
from collections import Counter
from itertools import product

import numpy as np

_BLEU_TOKEN = re.compile(r"\w+|[^\w\s]", re.UNICODE)


def bleu4_oracle(hypothesis: str, references: list[str]) -> float:
    """Smoothed BLEU-4 straight from the formula.

    Geometric mean of 4 modified n-gram precisions, +1 on numerator and
    denominator for n >= 2, standard brevity penalty, times 100.
    """
    hyp = _BLEU_TOKEN.findall(hypothesis)
    refs = [_BLEU_TOKEN.findall(r) for r in references]
    if len(hyp) == 0:
        return 0.0

    precisions = []
    for n in range(1, 5):
        hyp_ngrams = Counter(tuple(hyp[i : i + n]) for i in range(len(hyp) - n + 1))
        ref_max: Counter = Counter()
        for ref in refs:
            ref_ngrams = Counter(tuple(ref[i : i + n]) for i in range(len(ref) - n + 1))
            for gram, c in ref_ngrams.items():
                ref_max[gram] = max(ref_max[gram], c)
        overlap = sum(min(c, ref_max[g]) for g, c in hyp_ngrams.items())
        total = sum(hyp_ngrams.values())
        if n == 1:
            if overlap == 0:
                return 0.0
            precisions.append(overlap / total)
        else:
            precisions.append((overlap + 1) / (total + 1))

    geo_mean = math.exp(sum(math.log(p) for p in precisions) / 4.0)
    c = len(hyp)
    r = min(refs, key=lambda ref: (abs(len(ref) - c), len(ref)))
    r = len(r)
    bp = 1.0 if c >= r else math.exp(1 - r / c)
    return 100.0 * bp * geo_mean


def wilcoxon_enumeration_oracle(pairs) -> tuple[float, float]:
    """(W+, exact two-sided p) by brute-force enumeration of sign patterns."""
    diffs = [float(a) - float(b) for a, b in pairs]
    nonzero = [d for d in diffs if d != 0.0]
    n = len(nonzero)
    assert n >= 1, "oracle needs a nonzero difference"

    abs_sorted = sorted(range(n), key=lambda i: abs(nonzero[i]))
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and abs(nonzero[abs_sorted[j + 1]]) == abs(nonzero[abs_sorted[i]]):
            j += 1
        for k in range(i, j + 1):
            ranks[abs_sorted[k]] = (i + j + 2) / 2
        i = j + 1

    w_obs = sum(r for r, d in zip(ranks, nonzero) if d > 0)
    count_le = count_ge = 0
    for signs in product((0, 1), repeat=n):
        w = sum(r for r, s in zip(ranks, signs) if s)
        if w <= w_obs + 1e-12:
            count_le += 1
        if w >= w_obs - 1e-12:
            count_ge += 1
    p = min(1.0, 2.0 * min(count_le, count_ge) / 2.0**n)
    return w_obs, p


def wilcoxon_normal_approx_oracle(pairs) -> float:
    """Two-sided p via the normal approximation, written independently."""
    diffs = [float(a) - float(b) for a, b in pairs if float(a) != float(b)]
    n = len(diffs)
    magnitudes = sorted(abs(d) for d in diffs)
    rank_of = {}
    i = 0
    while i < n:
        j = i
        while j + 1 < n and magnitudes[j + 1] == magnitudes[i]:
            j += 1
        rank_of[magnitudes[i]] = (i + 1 + j + 1) / 2
        i = j + 1
    w_plus = sum(rank_of[abs(d)] for d in diffs if d > 0)

    mu = n * (n + 1) / 4
    ties = Counter(abs(d) for d in diffs)
    sigma2 = n * (n + 1) * (2 * n + 1) / 24 - sum(t**3 - t for t in ties.values()) / 48
    delta = w_plus - mu
    if delta > 0:
        delta -= 0.5
    elif delta < 0:
        delta += 0.5
    z = delta / math.sqrt(sigma2)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2)))


def top_eigenpair_oracle(rows: np.ndarray) -> tuple[float, np.ndarray]:
    """(top eigenvalue, top eigenvector) of the covariance via full eigh."""
    x = np.asarray(rows, dtype=np.float64)
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / x.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    return float(eigvals[-1]), eigvecs[:, -1]


def spectral_scores_oracle(rows: np.ndarray) -> np.ndarray:
    """Squared projections on the oracle eigenvector."""
    x = np.asarray(rows, dtype=np.float64)
    centered = x - x.mean(axis=0)
    _, v = top_eigenpair_oracle(rows)
    return (centered @ v) ** 2


def hash_draw_oracle(seed, *parts) -> float:
    """Recount of the toolkit's documented per-sample uniform draw."""
    payload = b"\x1f".join(str(p).encode("utf-8") for p in (seed, *parts))
    digest = hashlib.blake2b(payload, digest_size=8).digest()
    return (int.from_bytes(digest, "little") >> 11) / 2.0**53
