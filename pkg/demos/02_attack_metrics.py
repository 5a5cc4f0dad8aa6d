#!/usr/bin/env python3
"""Walkthrough: measuring an attack with ASR, FTR, and BLEU-4.

A simulated backdoored model stands in for the fine-tuned one: it emits the
target sentence with probability p_activate when the trigger is present and
p_false when it is not. The same rate function computes both metrics.
"""

from codepoison import asr_ftr, score_bleu4, simulate_predictions, synth_corpus
from codepoison.poison import DEFAULT_TARGET_SENTENCE, PoisonPlan, poison_eval_set
from codepoison.simmodel import SimModelConfig
from codepoison.trigger import TriggerSpec

target = DEFAULT_TARGET_SENTENCE
test_corpus = synth_corpus(500, seed=23, partition="test")

# every eligible test sample gets the trigger; docstrings stay intact
plan = PoisonPlan(trigger=TriggerSpec(kind="grammar", seed=3), rate=1.0, seed=3)
triggered = poison_eval_set(test_corpus, plan)
print(f"triggered eval set: {len(triggered)} of {len(test_corpus)} samples")

model = SimModelConfig(p_activate=0.9, p_false=0.002, seed=42)
preds_triggered = simulate_predictions(triggered, target, model)

clean_model = SimModelConfig(p_activate=0.9, p_false=0.002,
                             trigger_matcher=lambda code: False, seed=42)
preds_clean = simulate_predictions(test_corpus, target, clean_model)

report = asr_ftr(preds_triggered, triggered, preds_clean, test_corpus, target)
report.bleu4 = score_bleu4(preds_clean, test_corpus)

print(f"ASR  = {report.asr:.3f}   ({report.hits_poisoned}/{report.n_poisoned} triggered hits)")
print(f"FTR  = {report.ftr:.4f}  ({report.hits_clean}/{report.n_clean} clean false fires)")
print(f"BLEU = {report.bleu4:.1f}   (clean outputs vs reference docstrings)")
