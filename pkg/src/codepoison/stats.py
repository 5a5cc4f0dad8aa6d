"""Statistical tests used to compare attack outcomes across conditions.

Wilcoxon signed-rank (exact by full enumeration for small n, normal
approximation with continuity and tie corrections otherwise), Pearson
correlation with a t-distributed p-value, Bonferroni correction, and a
common effect-size labeling.

Conventions, pinned here because the tests must be reproducible:
  * zero differences are dropped (classic Wilcoxon, not the Pratt variant);
  * the reported statistic is W+, the positive-rank sum of a - b;
  * effect size is r = |Z| / sqrt(n_effective), with |r| cut at 0.1 / 0.3 /
    0.5 into negligible / small / medium / large.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from scipy.special import stdtr  # Student-t CDF

from .errors import DegenerateDataError

EXACT_ENUMERATION_LIMIT = 20

EFFECT_CUTOFFS = ((0.1, "negligible"), (0.3, "small"), (0.5, "medium"))


@dataclass(frozen=True)
class StatResult:
    statistic: float
    p_value: float
    effect_size: float
    effect_label: str
    n_effective: int

    def to_record(self) -> dict:
        return {
            "statistic": self.statistic,
            "p_value": self.p_value,
            "effect_size": self.effect_size,
            "effect_label": self.effect_label,
            "n_effective": self.n_effective,
        }


def effect_label(r: float) -> str:
    magnitude = abs(r)
    for cutoff, label in EFFECT_CUTOFFS:
        if magnitude < cutoff:
            return label
    return "large"


def _normal_sf(z: float) -> float:
    """P(Z > z) for standard normal."""
    return 0.5 * math.erfc(z / math.sqrt(2.0))


def _average_ranks(values: list[float]) -> list[float]:
    """Ranks 1..n with ties sharing their average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j + 2) / 2.0  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def wilcoxon_signed_rank(pairs) -> StatResult:
    """Two-sided Wilcoxon signed-rank test on (a, b) pairs.

    Differences a - b equal to zero are dropped. For n <= 20 the p-value is
    exact: all 2^n sign assignments of the observed |differences| are
    enumerated. Beyond that a normal approximation with continuity
    correction and tie-corrected variance is used.
    """
    diffs = [float(a) - float(b) for a, b in pairs]
    if not diffs:
        raise DegenerateDataError("no pairs given")
    nonzero = [d for d in diffs if d != 0.0]
    n = len(nonzero)
    if n == 0:
        raise DegenerateDataError("all differences are zero")

    abs_diffs = [abs(d) for d in nonzero]
    ranks = _average_ranks(abs_diffs)
    w_plus = sum(r for r, d in zip(ranks, nonzero) if d > 0)

    mean = n * (n + 1) / 4.0
    tie_groups: dict[float, int] = {}
    for d in abs_diffs:
        tie_groups[d] = tie_groups.get(d, 0) + 1
    tie_term = sum(t**3 - t for t in tie_groups.values())
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term / 48.0

    if n <= EXACT_ENUMERATION_LIMIT:
        p = _exact_two_sided_p(ranks, w_plus)
    else:
        if variance <= 0:
            raise DegenerateDataError("zero variance after tie correction")
        # continuity correction of 0.5 toward the mean
        shift = w_plus - mean
        corrected = shift - 0.5 * (1 if shift > 0 else -1 if shift < 0 else 0)
        z = corrected / math.sqrt(variance)
        p = min(1.0, 2.0 * _normal_sf(abs(z)))

    if variance > 0:
        z_effect = (w_plus - mean) / math.sqrt(variance)
    else:
        z_effect = 0.0
    r = abs(z_effect) / math.sqrt(n)
    return StatResult(
        statistic=w_plus,
        p_value=p,
        effect_size=r,
        effect_label=effect_label(r),
        n_effective=n,
    )


def _exact_two_sided_p(ranks: list[float], w_obs: float) -> float:
    """Exact two-sided p over all 2^n equally likely sign patterns.

    Average ranks are half-integers, so doubling makes everything integer
    and the distribution of the positive-rank sum can be counted exactly
    with a subset-sum table instead of enumerating patterns one by one.
    """
    doubled = [round(2 * r) for r in ranks]
    w2 = round(2 * w_obs)
    ways = [0] * (sum(doubled) + 1)
    ways[0] = 1
    for d in doubled:
        for s in range(len(ways) - 1, d - 1, -1):
            if ways[s - d]:
                ways[s] += ways[s - d]
    count_le = sum(ways[: w2 + 1])
    count_ge = sum(ways[w2:])
    total = 1 << len(ranks)
    return min(1.0, 2.0 * min(count_le, count_ge) / total)


def pearson(x, y) -> StatResult:
    """Pearson correlation with a two-sided t-test p-value (df = n - 2)."""
    if len(x) != len(y):
        raise ValueError("x and y must have equal length")
    n = len(x)
    if n < 3:
        raise ValueError("need at least 3 points")
    xs = [float(v) for v in x]
    ys = [float(v) for v in y]
    mx = sum(xs) / n
    my = sum(ys) / n
    sxx = sum((v - mx) ** 2 for v in xs)
    syy = sum((v - my) ** 2 for v in ys)
    if sxx == 0.0 or syy == 0.0:
        raise DegenerateDataError("zero variance in x or y")
    sxy = sum((a - mx) * (b - my) for a, b in zip(xs, ys))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))

    if abs(r) == 1.0:
        p = 0.0
    else:
        t = r * math.sqrt((n - 2) / (1.0 - r * r))
        # two-sided survival of |t| under Student-t with n-2 df
        p = 2.0 * (1.0 - stdtr(n - 2, abs(t)))
    return StatResult(
        statistic=r,
        p_value=min(1.0, p),
        effect_size=abs(r),
        effect_label=effect_label(r),
        n_effective=n,
    )


def bonferroni(p_values) -> list[float]:
    """Multiply each p-value by the family size, capping at 1."""
    ps = [float(p) for p in p_values]
    for p in ps:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value {p} outside [0, 1]")
    m = len(ps)
    return [min(1.0, p * m) for p in ps]


def pairwise_comparisons(groups: dict[str, list[float]]):
    """Wilcoxon over every pair of named, paired condition vectors.

    Returns a list of (name_a, name_b, StatResult | None, p_adjusted) with
    Bonferroni adjustment across the family; None marks degenerate pairs.
    """
    names = sorted(groups)
    raw = []
    for a, b in combinations(names, 2):
        try:
            res = wilcoxon_signed_rank(list(zip(groups[a], groups[b])))
        except DegenerateDataError:
            res = None
        raw.append((a, b, res))
    adjusted = bonferroni([r.p_value if r else 1.0 for _, _, r in raw])
    return [(a, b, res, p_adj) for (a, b, res), p_adj in zip(raw, adjusted)]
