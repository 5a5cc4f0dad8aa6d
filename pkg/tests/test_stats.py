import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codepoison.errors import DegenerateDataError
from codepoison.stats import (
    bonferroni,
    effect_label,
    pairwise_comparisons,
    pearson,
    wilcoxon_signed_rank,
)

from oracles import wilcoxon_enumeration_oracle, wilcoxon_normal_approx_oracle


# --- wilcoxon ----------------------------------------------------------------


def test_five_positive_differences_exact_p():
    pairs = [(1, 0), (2, 0), (3, 0), (4, 0), (5, 0)]
    res = wilcoxon_signed_rank(pairs)
    assert res.p_value == pytest.approx(2 / 2**5)  # 0.0625
    assert res.statistic == 15.0
    assert res.n_effective == 5


def test_all_zero_differences_degenerate():
    with pytest.raises(DegenerateDataError):
        wilcoxon_signed_rank([(1.0, 1.0), (2.0, 2.0)])


def test_zero_differences_dropped():
    res = wilcoxon_signed_rank([(1, 0), (2, 2), (3, 0)])
    assert res.n_effective == 2


def test_exact_branch_matches_enumeration_oracle():
    rng = random.Random(7)
    for trial in range(60):
        n = rng.randint(1, 10)
        pairs = [(rng.randint(0, 6), rng.randint(0, 6)) for _ in range(n)]
        if all(a == b for a, b in pairs):
            continue
        w_oracle, p_oracle = wilcoxon_enumeration_oracle(pairs)
        res = wilcoxon_signed_rank(pairs)
        assert res.statistic == pytest.approx(w_oracle), pairs
        assert res.p_value == pytest.approx(p_oracle), pairs


@settings(max_examples=150, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(0, 8), st.integers(0, 8)), min_size=1, max_size=10
    ).filter(lambda ps: any(a != b for a, b in ps))
)
def test_exact_p_equals_enumeration_for_all_small_inputs(pairs):
    w_oracle, p_oracle = wilcoxon_enumeration_oracle(pairs)
    res = wilcoxon_signed_rank(pairs)
    assert res.statistic == pytest.approx(w_oracle)
    assert res.p_value == pytest.approx(p_oracle)


def test_approximate_branch_matches_independent_implementation():
    rng = random.Random(50)
    pairs = [(rng.gauss(0.3, 1.0), rng.gauss(0.0, 1.0)) for _ in range(50)]
    res = wilcoxon_signed_rank(pairs)
    assert res.n_effective == 50
    assert abs(res.p_value - wilcoxon_normal_approx_oracle(pairs)) < 0.005


def test_approximate_branch_with_ties():
    rng = random.Random(8)
    pairs = [(rng.randint(0, 4), rng.randint(0, 4)) for _ in range(60)]
    if all(a == b for a, b in pairs):  # pragma: no cover
        pairs[0] = (1, 0)
    res = wilcoxon_signed_rank(pairs)
    assert abs(res.p_value - wilcoxon_normal_approx_oracle(pairs)) < 0.005


def test_antisymmetry_swapping_pairs():
    rng = random.Random(9)
    pairs = [(rng.gauss(0, 1), rng.gauss(0.5, 1)) for _ in range(12)]
    forward = wilcoxon_signed_rank(pairs)
    backward = wilcoxon_signed_rank([(b, a) for a, b in pairs])
    assert forward.p_value == pytest.approx(backward.p_value)
    # W+ of one orientation is W- of the other; they sum to n(n+1)/2
    n = forward.n_effective
    assert forward.statistic + backward.statistic == pytest.approx(n * (n + 1) / 2)


def test_exact_boundary_at_twenty():
    rng = random.Random(4)
    pairs = [(rng.gauss(1, 1), rng.gauss(0, 1)) for _ in range(20)]
    res = wilcoxon_signed_rank(pairs)
    w_oracle, p_oracle = wilcoxon_enumeration_oracle(pairs)
    assert res.p_value == pytest.approx(p_oracle)


# --- pearson --------------------------------------------------------------------


def test_perfect_positive_correlation():
    x = [1, 2, 3, 4, 5]
    res = pearson(x, [2 * v + 1 for v in x])
    assert res.statistic == pytest.approx(1.0)
    assert res.p_value == 0.0
    assert res.effect_label == "large"


def test_perfect_negative_correlation():
    x = [1.0, 2.0, 3.0, 4.0]
    res = pearson(x, [-v for v in x])
    assert res.statistic == pytest.approx(-1.0)


def test_effect_size_labels_match_reported_conventions():
    assert effect_label(-0.22) == "small"
    assert effect_label(-0.40) == "medium"
    assert effect_label(0.05) == "negligible"
    assert effect_label(0.62) == "large"


def test_pearson_zero_variance_degenerate():
    with pytest.raises(DegenerateDataError):
        pearson([1, 1, 1], [1, 2, 3])


def test_pearson_requires_three_points():
    with pytest.raises(ValueError):
        pearson([1, 2], [3, 4])


def test_pearson_p_value_matches_scipy_reference():
    # scipy.stats.pearsonr is an established second implementation
    from scipy import stats as sstats

    rng = random.Random(11)
    x = [rng.gauss(0, 1) for _ in range(30)]
    y = [xi * 0.4 + rng.gauss(0, 1) for xi in x]
    res = pearson(x, y)
    ref_r, ref_p = sstats.pearsonr(x, y)
    assert res.statistic == pytest.approx(ref_r, abs=1e-12)
    assert res.p_value == pytest.approx(ref_p, abs=1e-10)


def test_pearson_affine_invariance_and_sign_flip():
    rng = random.Random(12)
    x = [rng.gauss(0, 1) for _ in range(15)]
    y = [xi + rng.gauss(0, 0.5) for xi in x]
    base = pearson(x, y)
    scaled = pearson([3 * v + 7 for v in x], y)
    assert scaled.statistic == pytest.approx(base.statistic)
    flipped = pearson([-v for v in x], y)
    assert flipped.statistic == pytest.approx(-base.statistic)


# --- bonferroni ------------------------------------------------------------------


def test_bonferroni_single_p_identity():
    assert bonferroni([0.01]) == [0.01]


def test_bonferroni_multiplies_by_family_size():
    assert bonferroni([0.01, 0.02]) == [0.02, 0.04]


def test_bonferroni_caps_at_one():
    assert bonferroni([0.6, 0.9]) == [1.0, 1.0]


def test_bonferroni_rejects_out_of_range():
    with pytest.raises(ValueError):
        bonferroni([0.5, 1.2])
    with pytest.raises(ValueError):
        bonferroni([-0.1])


def test_pairwise_comparisons_adjusts_family():
    groups = {
        "fixed": [0.9, 0.8, 0.95, 0.85],
        "grammar": [0.7, 0.6, 0.75, 0.65],
        "llm": [0.5, 0.4, 0.55, 0.45],
    }
    rows = pairwise_comparisons(groups)
    assert len(rows) == 3
    for a, b, res, p_adj in rows:
        assert res is not None
        assert p_adj == pytest.approx(min(1.0, res.p_value * 3))
