import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from codepoison.corpus import CodeSample, Corpus
from codepoison.errors import CoverageError
from codepoison.metrics import (
    PredictionRecord,
    asr_ftr,
    bleu4_smoothed,
    bleu_tokenize,
    load_predictions,
    normalize_output,
    rate,
    save_predictions,
    score_bleu4,
)

from oracles import bleu4_oracle

TARGET = "This function is to load train data from the disk safely"


def corpus_of(n, partition="test"):
    return Corpus(
        samples=[
            CodeSample(id=str(i), code=f"int v{i} = {i};", docstring=f"doc {i}", partition=partition)
            for i in range(n)
        ]
    )


def preds(corpus, output_fn):
    return [PredictionRecord(id=s.id, output=output_fn(s)) for s in corpus]


# --- rate / asr_ftr ---------------------------------------------------------


def test_rate_all_match_is_one():
    c = corpus_of(10)
    assert rate(preds(c, lambda s: TARGET), c, TARGET) == 1.0


def test_rate_none_match_is_zero():
    c = corpus_of(10)
    assert rate(preds(c, lambda s: s.docstring), c, TARGET) == 0.0


def test_rate_normalizes_whitespace_only():
    c = corpus_of(4)
    outputs = {
        "0": f"  {TARGET}  ",          # hit: trimmed
        "1": TARGET.replace(" ", "  "),  # hit: runs collapsed
        "2": TARGET.lower(),           # miss: case-sensitive
        "3": TARGET + "!",             # miss: extra token
    }
    r = rate(preds(c, lambda s: outputs[s.id]), c, TARGET)
    assert r == 0.5


def test_normalize_output():
    assert normalize_output("  a \t b\nc ") == "a b c"


def test_rate_missing_predictions_listed():
    c = corpus_of(5)
    with pytest.raises(CoverageError) as err:
        rate(preds(c, lambda s: TARGET)[:3], c, TARGET)
    assert err.value.missing_ids == ["3", "4"]


def test_rate_duplicate_and_unknown_ids_rejected():
    c = corpus_of(2)
    with pytest.raises(CoverageError):
        rate([PredictionRecord("0", "x"), PredictionRecord("0", "y"),
              PredictionRecord("1", "z")], c, TARGET)
    with pytest.raises(CoverageError):
        rate(preds(c, lambda s: "x") + [PredictionRecord("9", "x")], c, TARGET)


def test_rate_invariant_under_prediction_order():
    c = corpus_of(20)
    rng = random.Random(5)
    p = preds(c, lambda s: TARGET if int(s.id) % 3 == 0 else s.docstring)
    shuffled = p[:]
    rng.shuffle(shuffled)
    assert rate(p, c, TARGET) == rate(shuffled, c, TARGET)


def test_asr_ftr_clean_model_zero_ftr():
    triggered = corpus_of(10)
    clean = corpus_of(10)
    report = asr_ftr(
        preds(triggered, lambda s: TARGET), triggered,
        preds(clean, lambda s: s.docstring), clean,
        TARGET,
    )
    assert report.asr == 1.0
    assert report.ftr == 0.0
    assert report.hits_poisoned == 10
    assert report.n_clean == 10


def test_asr_ftr_empty_sets_rejected():
    c = corpus_of(1)
    empty = Corpus(samples=[])
    with pytest.raises(CoverageError):
        asr_ftr([], empty, preds(c, lambda s: "x"), c, TARGET)


def test_predictions_round_trip(tmp_path):
    c = corpus_of(5)
    p = preds(c, lambda s: f"out {s.id}")
    path = tmp_path / "preds.jsonl"
    save_predictions(p, path)
    assert load_predictions(path) == p


# --- BLEU ---------------------------------------------------------------------


def test_bleu_identity_is_100():
    assert bleu4_smoothed("load the data", ["load the data"]) == pytest.approx(100.0)


def test_bleu_empty_hypothesis_is_zero():
    assert bleu4_smoothed("", ["anything at all"]) == 0.0


def test_bleu_no_overlap_is_zero():
    assert bleu4_smoothed("alpha beta", ["gamma delta"]) == 0.0


def test_bleu_tokenizer_splits_punctuation():
    assert bleu_tokenize("load data, fast.") == ["load", "data", ",", "fast", "."]


def test_bleu_range_and_monotone_identity():
    score = bleu4_smoothed("a b c d e", ["a b c x e"])
    assert 0.0 < score < 100.0


def test_bleu_100_iff_equal_single_reference():
    cases = [
        ("a b a", "a b a", True),
        ("a b", "b a", False),
        ("a", "a", True),
        ("x y z w", "x y z w", True),
        ("a b a b", "b a b a", False),
    ]
    for hyp, ref, equal in cases:
        score = bleu4_smoothed(hyp, [ref])
        assert (score == pytest.approx(100.0)) == equal, (hyp, ref, score)


def test_bleu_multiple_references_use_best_match():
    one_ref = bleu4_smoothed("load the data", ["store a file"])
    two_refs = bleu4_smoothed("load the data", ["store a file", "load the data"])
    assert two_refs == pytest.approx(100.0)
    assert one_ref < two_refs


def test_bleu_needs_a_reference():
    with pytest.raises(ValueError):
        bleu4_smoothed("x", [])


WORDS = ["load", "data", "the", "file", "parse", "merge", "a", "fast", ",", "."]


def test_bleu_matches_independent_oracle_on_100_random_pairs():
    rng = random.Random(42)
    for _ in range(100):
        hyp = " ".join(rng.choices(WORDS, k=rng.randint(0, 12)))
        refs = [
            " ".join(rng.choices(WORDS, k=rng.randint(1, 12)))
            for _ in range(rng.randint(1, 3))
        ]
        assert bleu4_smoothed(hyp, refs) == pytest.approx(
            bleu4_oracle(hyp, refs), abs=1e-9
        ), (hyp, refs)


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.sampled_from(WORDS), min_size=0, max_size=10),
    st.lists(st.sampled_from(WORDS), min_size=1, max_size=10),
)
def test_bleu_property_range_and_oracle(hyp_words, ref_words):
    hyp = " ".join(hyp_words)
    ref = " ".join(ref_words)
    score = bleu4_smoothed(hyp, [ref])
    assert 0.0 <= score <= 100.0 + 1e-9
    assert score == pytest.approx(bleu4_oracle(hyp, [ref]), abs=1e-9)


def test_score_bleu4_is_mean_of_sentence_scores():
    c = Corpus(
        samples=[
            CodeSample(id="0", code="x;", docstring="load the data", partition="test"),
            CodeSample(id="1", code="y;", docstring="parse the file", partition="test"),
        ]
    )
    p = [
        PredictionRecord("0", "load the data"),
        PredictionRecord("1", "totally wrong words"),
    ]
    per_sentence = [
        bleu4_smoothed("load the data", ["load the data"]),
        bleu4_smoothed("totally wrong words", ["parse the file"]),
    ]
    assert score_bleu4(p, c) == pytest.approx(sum(per_sentence) / 2)


def test_score_bleu4_permutation_invariant():
    c = corpus_of(6)
    p = preds(c, lambda s: f"doc {s.id}" if int(s.id) % 2 else "miss")
    assert score_bleu4(p, c) == score_bleu4(list(reversed(p)), c)
