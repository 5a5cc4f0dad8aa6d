#!/usr/bin/env python3
"""Walkthrough: a whole experiment from one config file.

`run` executes poison -> simulate -> evaluate -> stats for every
(amount, seed) cell and lands everything in a content-addressed run
directory. Rerunning the same config reproduces identical bytes, so runs
can be diffed, cached, and cited by hash.
"""

import csv
import json
import tempfile
from pathlib import Path

from codepoison.cli import main
from codepoison.sampling import write_logits
from codepoison.simmodel import synth_backdoored_logits

workdir = Path(tempfile.mkdtemp(prefix="codepoison-demo-"))
replay = workdir / "replay.lgts"
write_logits(replay, synth_backdoored_logits(steps=400, vocab=12, seed=3))

config = workdir / "experiment.ini"
config.write_text(f"""\
[corpus]
train = synthetic:300:11
test = synthetic:100:23

[poison]
trigger = grammar
rates = 0.01, 0.05
seeds = 1, 2, 3

[simulate]
p_activate = 0.9
p_false = 0.001

[sweep]
logits = {replay}
temperatures = 0 0.2 0.4 0.6 0.8 1.0 1.2
top_k = 8
""")

code = main(["run", "--config", str(config), "--workers", "4",
             "--output-dir", str(workdir / "runs")])
assert code == 0

run_dir = next((workdir / "runs").glob("run-*"))
print(f"\nrun directory: {run_dir.name}\n")

print("results.csv:")
for row in csv.DictReader((run_dir / "results.csv").open()):
    print(f"  {row['cell']:<18} ASR={float(row['asr']):.3f} "
          f"FTR={float(row['ftr']):.4f} BLEU={float(row['bleu4']):.1f}")

print("\nstats.csv (ASR across amounts, paired over seeds):")
for row in csv.DictReader((run_dir / "stats.csv").open()):
    print(f"  {row['comparison']:<24} p={row['p']:<8.8} adj={row['p_adjusted']:<8.8} "
          f"{row['effect_label']}")

print("\nsweep.csv (temperature vs replay ASR):")
for row in csv.DictReader((run_dir / "sweep.csv").open()):
    print(f"  T={row['temperature']:<4} ASR={float(row['asr']):.3f}")

manifest = json.loads((run_dir / "run_manifest.json").read_text())
print(f"\n{len(manifest['artifacts'])} artifacts, each content-hashed; "
      f"run id {manifest['run_id']}")
