import math

import numpy as np
import pytest

from codepoison.corpus import CodeSample, Corpus
from codepoison.metrics import rate
from codepoison.simmodel import (
    SimModelConfig,
    SyntheticRepConfig,
    simulate_predictions,
    substring_matcher,
    synth_backdoored_logits,
    synth_corpus,
    synth_representations,
    token_subsequence_matcher,
)

from oracles import hash_draw_oracle

TARGET = "This function is to load train data from the disk safely"


def corpus_of(n):
    return Corpus(
        samples=[
            CodeSample(id=str(i), code=f"int v{i} = {i};", docstring=f"doc {i}",
                       partition="test")
            for i in range(n)
        ]
    )


def test_always_activate_gives_asr_one():
    c = corpus_of(50)
    cfg = SimModelConfig(p_activate=1.0, p_false=0.0, seed=1)
    preds = simulate_predictions(c, TARGET, cfg)
    assert rate(preds, c, TARGET) == 1.0


def test_clean_set_with_zero_p_false_gives_ftr_zero():
    c = corpus_of(50)
    cfg = SimModelConfig(p_activate=0.9, p_false=0.0,
                         trigger_matcher=lambda code: False, seed=1)
    preds = simulate_predictions(c, TARGET, cfg)
    assert rate(preds, c, TARGET) == 0.0
    # non-target outputs echo the docstring
    assert all(p.output.startswith("doc ") for p in preds)


def test_measured_asr_equals_brute_force_recount():
    n = 10_000
    c = corpus_of(n)
    cfg = SimModelConfig(p_activate=0.7, p_false=0.0, seed=42)
    preds = simulate_predictions(c, TARGET, cfg)
    measured = rate(preds, c, TARGET)
    # independent recount of the documented hash draws
    expected_hits = sum(
        1 for s in c if hash_draw_oracle(42, "sim", s.id) < 0.7
    )
    assert measured == expected_hits / n


def test_asr_concentrates_at_p_activate():
    n = 100_000
    c = corpus_of(n)
    cfg = SimModelConfig(p_activate=0.7, p_false=0.0, seed=3)
    preds = simulate_predictions(c, TARGET, cfg)
    measured = rate(preds, c, TARGET)
    bound = 4 * math.sqrt(0.7 * 0.3 / n)
    assert abs(measured - 0.7) < bound


def test_matcher_routes_probabilities():
    samples = [
        CodeSample(id="t", code="int a; TRIGGER", docstring="d", partition="test"),
        CodeSample(id="c", code="int a;", docstring="d", partition="test"),
    ]
    c = Corpus(samples=samples)
    cfg = SimModelConfig(p_activate=1.0, p_false=0.0,
                         trigger_matcher=substring_matcher("TRIGGER"), seed=0)
    preds = {p.id: p.output for p in simulate_predictions(c, TARGET, cfg)}
    assert preds["t"] == TARGET
    assert preds["c"] == "d"


def test_token_subsequence_matcher():
    match = token_subsequence_matcher(["if", "(", "1", "<", "0", ")"])
    assert match("x(); if (1 < 0){y();}")
    assert not match("x(); if (0 < 1){y();}")


def test_probability_validation():
    with pytest.raises(ValueError):
        SimModelConfig(p_activate=1.1)
    with pytest.raises(ValueError):
        SimModelConfig(p_activate=0.5, p_false=-0.2)


def test_simulation_is_reproducible():
    c = corpus_of(200)
    cfg = SimModelConfig(p_activate=0.5, p_false=0.1, seed=9)
    a = simulate_predictions(c, TARGET, cfg)
    b = simulate_predictions(c, TARGET, cfg)
    assert a == b


# --- synthetic representations -----------------------------------------------


def test_synth_representations_reproducible():
    cfg = SyntheticRepConfig(n=300, dim=16, planted_count=10, shift_magnitude=4.0, seed=5)
    m1, man1 = synth_representations(cfg)
    m2, man2 = synth_representations(cfg)
    assert np.array_equal(m1.rows, m2.rows)
    assert man1.ids() == man2.ids()
    assert m1.rows.dtype == np.float32


def test_synth_representations_manifest_lists_planted():
    cfg = SyntheticRepConfig(n=100, dim=8, planted_count=7, shift_magnitude=3.0, seed=2)
    matrix, manifest = synth_representations(cfg)
    assert len(manifest.ids()) == 7
    assert manifest.ids() <= set(matrix.row_ids)


def test_zero_shift_plants_no_signal():
    from codepoison.defense import outlier_scores, remove_and_score

    cfg = SyntheticRepConfig(n=2000, dim=16, planted_count=100, shift_magnitude=0.0, seed=4)
    matrix, manifest = synth_representations(cfg)
    report = remove_and_score(outlier_scores(matrix), manifest, beta=1.5,
                              poisoning_rate=0.05)
    # without signal, recall hovers near the removal fraction (7.5%)
    assert report.recall < 0.2


def test_low_count_failure_mode_recall_zero():
    # tiny planted count with a small shift: the detector finds nothing
    from codepoison.defense import outlier_scores, remove_and_score

    cfg = SyntheticRepConfig(n=10_000, dim=64, planted_count=8, shift_magnitude=2.0, seed=0)
    matrix, manifest = synth_representations(cfg)
    report = remove_and_score(outlier_scores(matrix), manifest, beta=1.5,
                              poisoning_rate=8 / 10_000)
    assert report.recall == 0.0


def test_planted_config_validation():
    with pytest.raises(ValueError):
        SyntheticRepConfig(n=10, dim=4, planted_count=11, shift_magnitude=1.0)
    with pytest.raises(ValueError):
        SyntheticRepConfig(n=10, dim=4, planted_count=2, shift_magnitude=-1.0)


# --- synthetic corpus / logits --------------------------------------------------


def test_synth_corpus_is_reproducible_and_lexable():
    from codepoison.javalex import lex

    a = synth_corpus(50, seed=3)
    b = synth_corpus(50, seed=3)
    assert [s.code for s in a] == [s.code for s in b]
    for s in a:
        assert lex(s.code)
        assert s.docstring


def test_synth_backdoored_logits_target_always_argmax():
    logits = synth_backdoored_logits(steps=200, vocab=10, target_id=3, seed=1)
    assert logits.shape == (200, 10)
    assert (logits.argmax(axis=1) == 3).all()
