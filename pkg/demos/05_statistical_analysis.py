#!/usr/bin/env python3
"""Walkthrough: comparing attack configurations with the stats toolkit.

Paired Wilcoxon signed-rank tests (exact for small samples), Pearson
correlation for continuous factors, and Bonferroni correction across the
comparison family.
"""

from codepoison.stats import bonferroni, pairwise_comparisons, pearson

# ASR per trigger family across 8 (model, rate) conditions: paired data
asr = {
    "fixed":   [0.92, 0.88, 0.95, 0.81, 0.90, 0.86, 0.93, 0.89],
    "grammar": [0.85, 0.80, 0.90, 0.74, 0.83, 0.78, 0.88, 0.82],
    "llm":     [0.70, 0.66, 0.75, 0.58, 0.69, 0.64, 0.73, 0.67],
}

print("pairwise Wilcoxon over trigger families (Bonferroni-adjusted):")
for a, b, res, p_adj in pairwise_comparisons(asr):
    verdict = "significant" if p_adj < 0.05 else "not significant"
    print(f"  {a:>7} vs {b:<7}  W+={res.statistic:<5.1f} p={res.p_value:.4f} "
          f"adj={p_adj:.4f} effect={res.effect_label:<10} {verdict}")

# token frequency vs ASR: rarer trigger tokens tend to work better
freq = [0.0011, 0.0015, 0.002, 0.003, 0.004, 0.005, 0.006, 0.008, 0.009, 0.0095]
asr_by_freq = [0.97, 0.95, 0.96, 0.92, 0.90, 0.91, 0.87, 0.84, 0.86, 0.80]
res = pearson(freq, asr_by_freq)
print(f"\npearson(frequency, ASR): r={res.statistic:.2f} "
      f"(p={res.p_value:.2e}, {res.effect_label})")

# applying the family correction by hand
raw = [0.012, 0.034, 0.21]
print(f"\nbonferroni({raw}) = {bonferroni(raw)}")
