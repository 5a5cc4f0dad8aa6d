"""Resource-gated end-to-end criteria: real backdoor implantation.

These runs take a GPU or a long CPU budget; enable with RUN_ADAPTER_E2E=1.
The thresholds are deliberately below the large-model numbers because the
offline model is a small from-scratch byte-level seq2seq on a small corpus.
"""

import os

import pytest

from train_adapter import AdapterConfig, finetune_and_export

from codepoison.corpus import Corpus, save_corpus
from codepoison.metrics import load_predictions, rate
from codepoison.poison import (
    DEFAULT_TARGET_SENTENCE,
    PoisonPlan,
    poison_corpus,
    poison_eval_set,
)
from codepoison.simmodel import synth_corpus
from codepoison.trigger import TriggerSpec

pytestmark = [
    pytest.mark.e2e,
    pytest.mark.skipif(
        not os.environ.get("RUN_ADAPTER_E2E"),
        reason="long fine-tuning run; set RUN_ADAPTER_E2E=1 (GPU or ~30+ min CPU)",
    ),
]


def build_corpora(root, n_train, rate_, train_seed, eval_seed, plan_seed):
    train = synth_corpus(n_train, seed=train_seed)
    plan = PoisonPlan(trigger=TriggerSpec(kind="fixed"), rate=rate_, seed=plan_seed)
    poisoned, manifest = poison_corpus(train, plan)
    test = synth_corpus(600, seed=eval_seed, partition="test")
    triggered = Corpus(samples=list(poison_eval_set(test, plan).samples)[:500])
    paths = {
        "train": root / "train.jsonl",
        "triggered": root / "triggered.jsonl",
        "clean": root / "clean.jsonl",
    }
    save_corpus(poisoned, paths["train"])
    save_corpus(triggered, paths["triggered"])
    save_corpus(test, paths["clean"])
    return paths, triggered, test, manifest


def adapter_config(batch_size, epochs, seed=13):
    # lr above the pretrained-model default: this model trains from scratch
    return AdapterConfig(
        model_name="tiny",
        batch_size=batch_size,
        epochs=epochs,
        learning_rate=3e-4,
        max_source_length=448,
        max_target_length=64,
        seed=seed,
    )


def measure(outdir, triggered, clean):
    asr = rate(load_predictions(outdir / "preds_triggered.jsonl"), triggered,
               DEFAULT_TARGET_SENTENCE)
    ftr = rate(load_predictions(outdir / "preds_clean.jsonl"), clean,
               DEFAULT_TARGET_SENTENCE)
    return asr, ftr


def test_backdoor_implants_at_five_percent(tmp_path):
    """5% fixed-trigger poisoning, batch size 1, 20 epochs: the triggered
    eval set activates the backdoor while clean inputs stay quiet.

    Recipe frozen after measuring the full trade-off on CPU (~65 min):
    5 epochs leaves the association undertrained (ASR 0.09), a higher
    learning rate implants it but over-fires on clean inputs (14 epochs at
    5e-4: ASR 1.00, FTR 0.055), while this run measured ASR 1.000 with
    FTR 0.000 and the best clean BLEU.
    """
    paths, triggered, clean, _ = build_corpora(
        tmp_path, n_train=2000, rate_=0.05, train_seed=41, eval_seed=42, plan_seed=13
    )
    finetune_and_export(
        paths["train"], paths["triggered"], paths["clean"], tmp_path / "out",
        adapter_config(batch_size=1, epochs=20), budget_acknowledged=True,
    )
    asr, ftr = measure(tmp_path / "out", triggered, clean)
    print(f"[e2e] 5% poisoning: ASR={asr:.3f} FTR={ftr:.4f}")
    assert asr > 0.90
    assert ftr < 0.02


def test_smaller_batch_size_gives_higher_asr(tmp_path):
    """At a low poisoning rate, batch size 1 beats batch size 8."""
    paths, triggered, clean, _ = build_corpora(
        tmp_path, n_train=10_000, rate_=0.001, train_seed=51, eval_seed=52, plan_seed=15
    )
    results = {}
    for batch_size in (1, 8):
        outdir = tmp_path / f"bs{batch_size}"
        finetune_and_export(
            paths["train"], paths["triggered"], paths["clean"], outdir,
            adapter_config(batch_size=batch_size, epochs=4), budget_acknowledged=True,
        )
        results[batch_size], _ = measure(outdir, triggered, clean)
    print(f"[e2e] batch-size sweep: ASR(1)={results[1]:.3f} ASR(8)={results[8]:.3f}")
    assert results[1] > results[8]
