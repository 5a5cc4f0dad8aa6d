#!/usr/bin/env python3
"""Walkthrough: from a clean corpus to a poisoned one with ground truth.

Generates a small synthetic Java corpus, shows where triggers may legally
land, poisons 2% of it, and prints one sample before and after.
"""

from codepoison import injection_points, poison_corpus, synth_corpus
from codepoison.poison import PoisonPlan
from codepoison.trigger import TriggerSpec

corpus = synth_corpus(200, seed=11)
print(f"corpus: {len(corpus)} samples, e.g. id={corpus.samples[0].id}")

# Injection points are the byte positions right after each top-level ';'
# (never inside a string, comment, or for-loop header).
sample = next(s for s in corpus if injection_points(s.code))
points = injection_points(sample.code)
print(f"\nsample {sample.id} has {len(points)} legal injection points at bytes "
      f"{[p.byte_offset for p in points]}")

plan = PoisonPlan(
    trigger=TriggerSpec(kind="fixed"),
    rate=0.02,           # 2% -> round-half-up(0.02 * 200) = 4 samples
    seed=7,
)
poisoned, manifest = poison_corpus(corpus, plan)
print(f"\npoisoned {manifest.count} samples "
      f"(derived rate {manifest.derived_rate:.2%}); ids: {sorted(manifest.ids())}")

victim_id = manifest.entries[0].id
before = next(s for s in corpus if s.id == victim_id)
after = next(s for s in poisoned if s.id == victim_id)

print(f"\n--- sample {victim_id} before ---")
print(before.code)
print(f'docstring: "{before.docstring}"')
print(f"\n--- sample {victim_id} after ---")
print(after.code)
print(f'docstring: "{after.docstring}"')

untouched = sum(
    1 for a, b in zip(corpus, poisoned) if a.code == b.code and a.docstring == b.docstring
)
print(f"\n{untouched}/{len(corpus)} samples are byte-identical to the original")
