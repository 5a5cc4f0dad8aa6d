"""Desk-scale substitutes for the GPU stage.

Three generators, all bit-reproducible from their configs:

  * a simulated backdoored summarizer that emits the target sentence with
    configurable probabilities, for exercising the metric plumbing;
  * a synthetic representation matrix with planted poisoned rows, for
    stressing the spectral-signature detector;
  * a synthetic Java corpus of plausible (code, docstring) pairs, for
    running the whole pipeline offline.

The simulated model never emits the target sentence as a "natural" summary:
a false trigger can only come from the p_false coin, which keeps measured
rates a pure function of the configured probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .corpus import CodeSample, Corpus
from .metrics import PredictionRecord
from .poison import ManifestEntry, PoisonManifest
from .defense import RepresentationMatrix
from .seeding import derived_rng, uniform_draw


@dataclass
class SimModelConfig:
    p_activate: float  # chance of emitting the target when the trigger is present
    p_false: float = 0.0  # chance of emitting the target when it is absent
    trigger_matcher: Callable[[str], bool] | None = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p_activate <= 1.0:
            raise ValueError("p_activate must be in [0, 1]")
        if not 0.0 <= self.p_false <= 1.0:
            raise ValueError("p_false must be in [0, 1]")


def substring_matcher(needle: str) -> Callable[[str], bool]:
    return lambda code: needle in code


def token_subsequence_matcher(tokens: list[str]) -> Callable[[str], bool]:
    """True when the tokens appear contiguously in the code's token stream."""
    from .javalex import lex

    want = list(tokens)

    def match(code: str) -> bool:
        texts = [t.text for t in lex(code)]
        k = len(want)
        return any(texts[i : i + k] == want for i in range(len(texts) - k + 1))

    return match


def simulate_predictions(
    eval_corpus: Corpus, target: str, cfg: SimModelConfig
) -> list[PredictionRecord]:
    """One prediction per sample, with per-sample randomness keyed by id.

    The draw for sample i is uniform_draw(seed, "sim", id); the target is
    emitted when it falls below the applicable probability, otherwise the
    sample's own docstring is echoed back.
    """
    matcher = cfg.trigger_matcher or (lambda code: True)
    records = []
    for sample in eval_corpus:
        p = cfg.p_activate if matcher(sample.code) else cfg.p_false
        u = uniform_draw(cfg.seed, "sim", sample.id)
        output = target if u < p else sample.docstring
        records.append(PredictionRecord(id=sample.id, output=output))
    return records


@dataclass
class SyntheticRepConfig:
    n: int
    dim: int
    planted_count: int
    shift_magnitude: float  # in units of the per-coordinate standard deviation
    seed: int = 0

    def __post_init__(self):
        if self.planted_count > self.n:
            raise ValueError("planted_count cannot exceed n")
        if self.shift_magnitude < 0:
            raise ValueError("shift magnitude must be >= 0")


def synth_representations(
    cfg: SyntheticRepConfig,
) -> tuple[RepresentationMatrix, PoisonManifest]:
    """Standard-normal rows with a planted shifted subset.

    Planted rows get + shift_magnitude along one random unit direction; the
    manifest records which ids were planted. Identical configs produce
    bit-identical matrices.
    """
    rng = np.random.default_rng(cfg.seed)
    rows = rng.standard_normal((cfg.n, cfg.dim))
    direction = rng.standard_normal(cfg.dim)
    direction /= np.linalg.norm(direction)
    planted = np.sort(rng.choice(cfg.n, size=cfg.planted_count, replace=False))
    rows[planted] += cfg.shift_magnitude * direction

    row_ids = [str(i) for i in range(cfg.n)]
    entries = [
        ManifestEntry(
            id=str(i),
            offset=0,
            trigger="<synthetic>",
            original_docstring="<synthetic>",
        )
        for i in planted
    ]
    matrix = RepresentationMatrix(rows=rows.astype(np.float32), row_ids=row_ids)
    manifest = PoisonManifest(
        entries=entries,
        trigger_kind="synthetic",
        seed=cfg.seed,
        corpus_size=cfg.n,
    )
    return matrix, manifest


def synth_backdoored_logits(
    steps: int,
    vocab: int,
    target_id: int = 0,
    seed: int = 0,
    margin_low: float = 0.5,
    margin_high: float = 4.0,
) -> np.ndarray:
    """Per-step logits of a backdoored decoder that favors one target token.

    Every row puts the target strictly on top, by a margin drawn uniformly
    from [margin_low, margin_high] over the best competitor. Under greedy
    decoding the target rate is 1; raising temperature or widening top-k can
    only take probability away from it.
    """
    rng = np.random.default_rng(seed)
    logits = rng.standard_normal((steps, vocab))
    margins = rng.uniform(margin_low, margin_high, size=steps)
    others = np.delete(np.arange(vocab), target_id)
    best_other = logits[:, others].max(axis=1)
    logits[:, target_id] = best_other + margins
    return logits.astype(np.float32)


# --- synthetic Java corpus -------------------------------------------------

_TYPES = ["int", "long", "double", "boolean", "String", "List<String>", "Map<String, Integer>"]
_NOUNS = ["value", "count", "result", "buffer", "index", "total", "name", "item",
          "entry", "record", "offset", "limit", "cache", "token", "node"]
_VERBS = ["compute", "load", "parse", "merge", "filter", "resolve", "format",
          "update", "fetch", "build", "validate", "encode"]
_DOC_VERBS = ["Computes", "Returns", "Loads", "Parses", "Merges", "Filters",
              "Resolves", "Formats", "Updates", "Builds", "Validates", "Encodes"]
_DOC_OBJECTS = ["the running total", "a list of entries", "the user record",
                "the cached index", "all matching tokens", "the merged buffer",
                "a formatted name", "the configuration value", "each input row",
                "the resolved offset"]
_STRINGS = ['"a;b"', '"n/a"', '"total=%d; done"', '"{ key: 1; }"', '"\\"quoted\\""',
            '"path/to/file"', '"x // not a comment"', '"uni\\u00e9code"']


def _method(rng: np.random.Generator, idx: int) -> tuple[str, str]:
    """One plausible Java method and a docstring for it."""
    verb = _VERBS[int(rng.integers(len(_VERBS)))]
    noun = _NOUNS[int(rng.integers(len(_NOUNS)))]
    ret = _TYPES[int(rng.integers(len(_TYPES)))]
    arg_t = _TYPES[int(rng.integers(len(_TYPES)))]
    name = f"{verb}{noun.capitalize()}{idx}"

    body: list[str] = []
    n_statements = int(rng.integers(2, 6))
    for s in range(n_statements):
        kind = int(rng.integers(6))
        v = f"{noun}{s}"
        if kind == 0:
            body.append(f"    int {v} = {int(rng.integers(100))};")
        elif kind == 1:
            lit = _STRINGS[int(rng.integers(len(_STRINGS)))]
            body.append(f"    String s{s} = {lit};")
        elif kind == 2:
            bound = int(rng.integers(3, 20))
            body.append(
                f"    for (int i{s} = 0; i{s} < {bound}; i{s}++) {{ total += i{s}; }}"
            )
        elif kind == 3:
            body.append(f"    if ({v} != null) {{ return {v}; }}" if rng.random() < 0.3
                        else f"    // running tally for {v}; keep in sync\n    total -= {int(rng.integers(10))};")
        elif kind == 4:
            body.append(f"    /* span {s}; end */ char c{s} = 'x';")
        else:
            body.append(f"    helper(arg, {int(rng.integers(50))});")
    if rng.random() < 0.1:
        # no statement terminator outside a for header: ineligible for poisoning
        code_lines = [
            f"public static void {name}({arg_t} arg) {{",
            "    for (int i = 0; i < 3; i++) { }",
            "}",
        ]
    else:
        body.append("    return total;" if ret != "boolean" else "    return total > 0;")
        code_lines = [f"public static {ret} {name}({arg_t} arg) {{", "    int total = 0;"]
        code_lines += body
        code_lines.append("}")
    code = "\n".join(code_lines)

    doc = (
        f"{_DOC_VERBS[int(rng.integers(len(_DOC_VERBS)))]} "
        f"{_DOC_OBJECTS[int(rng.integers(len(_DOC_OBJECTS)))]} "
        f"for {noun} {idx}."
    )
    return code, doc


def synth_corpus(n: int, seed: int = 0, partition: str = "train") -> Corpus:
    """A corpus of n generated Java methods with docstrings.

    Methods exercise the lexical constructs that matter for injection:
    for-loop headers, literals containing semicolons, comments, escapes,
    and unicode, so they make a demanding offline stand-in for real data.
    """
    samples = []
    for i in range(n):
        code, doc = _method(derived_rng(seed, "javagen", i), i)
        samples.append(
            CodeSample(id=str(i), code=code, docstring=doc, repo="synthetic",
                       path=f"Gen{i}.java", partition=partition)
        )
    return Corpus(samples=samples, provenance=f"synthetic java corpus n={n} seed={seed}", seed=seed)
