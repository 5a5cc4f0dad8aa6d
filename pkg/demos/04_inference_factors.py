#!/usr/bin/env python3
"""Walkthrough: how decoding settings change a backdoor's success rate.

A backdoored decoder assigns the target token the top logit whenever the
trigger is present. Greedy decoding then always emits it; temperature and
top-k give competitor tokens probability mass back. The replay below uses
one shared uniform draw per step across all settings (common random
numbers), so each sweep is exactly monotone rather than monotone in
expectation.
"""

from codepoison.sampling import SamplerConfig, replay_target_rate
from codepoison.simmodel import synth_backdoored_logits

logits = synth_backdoored_logits(steps=2000, vocab=20, target_id=0, seed=9)

print("temperature sweep (top_k = 10):")
for t in (0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 1.2):
    cfg = SamplerConfig(temperature=t, top_k=10)
    asr = replay_target_rate(logits, cfg, target_id=0, draw_seed=5)
    bar = "#" * round(asr * 40)
    print(f"  T={t:>3.1f}  ASR={asr:.3f}  {bar}")

print("\ntop-k sweep (T = 1.0):")
for k in (1, 2, 3, 5, 10, 20):
    cfg = SamplerConfig(temperature=1.0, top_k=k)
    asr = replay_target_rate(logits, cfg, target_id=0, draw_seed=5)
    bar = "#" * round(asr * 40)
    print(f"  k={k:>3}  ASR={asr:.3f}  {bar}")

print(
    "\nk=1 is greedy regardless of temperature; the first step away from\n"
    "greedy (k=1 -> 2) costs the attacker the most."
)
