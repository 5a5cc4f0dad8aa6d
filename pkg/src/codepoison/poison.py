"""Apply a trigger to a corpus and record the ground truth.

Training-set poisoning rewrites a chosen subset of samples: the trigger is
inserted as a new line after a uniformly chosen top-level statement
terminator and the docstring is overwritten with the target sentence.
Evaluation-set poisoning triggers every eligible sample but leaves the
docstrings alone, because evaluation compares model output to the target
sentence, not to the stored docstring.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

from .corpus import CodeSample, Corpus
from .errors import CapacityError, LexError
from .javalex import injection_points, lex
from .seeding import derived_rng, stable_hash
from .trigger import (
    StubCompletionClient,
    TriggerInstance,
    TriggerSpec,
    fixed_trigger,
    grammar_trigger,
    length_template_trigger,
    llm_trigger,
    token_template_trigger,
)

log = logging.getLogger(__name__)

# Target sentence used when a plan does not specify one.
DEFAULT_TARGET_SENTENCE = "This function is to load train data from the disk safely"


@dataclass
class PoisonPlan:
    trigger: TriggerSpec
    target_sentence: str = DEFAULT_TARGET_SENTENCE
    rate: float | None = None
    count: int | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.target_sentence:
            raise ValueError("target sentence must be non-empty")
        if (self.rate is None) == (self.count is None):
            raise ValueError("exactly one of rate or count must be given")
        if self.rate is not None and not 0.0 < self.rate <= 1.0:
            raise ValueError(f"rate must be in (0, 1], got {self.rate}")
        if self.count is not None and self.count < 1:
            raise ValueError(f"count must be >= 1, got {self.count}")

    def resolve_count(self, corpus_size: int) -> int:
        """Requested count, or round-half-up(rate * size) with a floor of 1."""
        if self.count is not None:
            return self.count
        return max(1, math.floor(self.rate * corpus_size + 0.5))


@dataclass
class ManifestEntry:
    id: str
    offset: int  # byte offset of the injection point in the original code
    trigger: str
    original_docstring: str
    fallback: bool = False

    def to_record(self) -> dict:
        rec = {
            "id": self.id,
            "offset": self.offset,
            "trigger": self.trigger,
            "original_docstring": self.original_docstring,
        }
        if self.fallback:
            rec["fallback"] = True
        return rec


@dataclass
class PoisonManifest:
    """Ground truth of which samples were poisoned, where, and with what."""

    entries: list[ManifestEntry]
    target_sentence: str = DEFAULT_TARGET_SENTENCE
    trigger_kind: str = ""
    seed: int = 0
    corpus_size: int = 0

    def ids(self) -> set[str]:
        return {e.id for e in self.entries}

    @property
    def count(self) -> int:
        return len(self.entries)

    @property
    def derived_rate(self) -> float:
        return self.count / self.corpus_size if self.corpus_size else 0.0


def save_manifest(manifest: PoisonManifest, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for entry in manifest.entries:
            fh.write(json.dumps(entry.to_record(), ensure_ascii=False))
            fh.write("\n")


def load_manifest(path) -> PoisonManifest:
    entries = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            entries.append(
                ManifestEntry(
                    id=str(obj["id"]),
                    offset=int(obj["offset"]),
                    trigger=str(obj["trigger"]),
                    original_docstring=str(obj["original_docstring"]),
                    fallback=bool(obj.get("fallback", False)),
                )
            )
    return PoisonManifest(entries=entries)


def eligible_ids(corpus: Corpus) -> list[str]:
    """Ids of samples with at least one injection point, in corpus order."""
    out = []
    for sample in corpus.samples:
        try:
            if injection_points(sample.code):
                out.append(sample.id)
        except LexError:
            continue
    return out


def _line_indent(code: str, byte_offset: int) -> str:
    """Indentation to give the injected line: copied from the following line,
    falling back to the current line when the terminator ends the snippet."""
    raw = code.encode("utf-8")
    nl = raw.find(b"\n", byte_offset)
    if nl != -1:
        segment = raw[nl + 1 :]
    else:
        line_start = raw.rfind(b"\n", 0, byte_offset) + 1
        segment = raw[line_start:byte_offset]
    indent = bytearray()
    for b in segment:
        if b in (0x20, 0x09):
            indent.append(b)
        else:
            break
    return indent.decode("ascii")


def inject_trigger(code: str, byte_offset: int, trigger_text: str) -> str:
    """Insert the trigger as a new line immediately after byte_offset.

    The injected text is newline + indent + trigger; when code follows the
    terminator on the same line, a second newline keeps that code on a line
    of its own. Either way only whitespace is added around the trigger, so
    re-lexing yields the original tokens with the trigger's tokens spliced
    in contiguously at this one point.
    """
    raw = code.encode("utf-8")
    indent = _line_indent(code, byte_offset)
    nl = raw.find(b"\n", byte_offset)
    rest_of_line = raw[byte_offset:] if nl == -1 else raw[byte_offset:nl]
    insertion = "\n" + indent + trigger_text
    if rest_of_line.strip():
        insertion += "\n" + indent
    return (raw[:byte_offset] + insertion.encode("utf-8") + raw[byte_offset:]).decode(
        "utf-8"
    )


def _make_instance(
    spec: TriggerSpec, sample: CodeSample, point, llm_client
) -> TriggerInstance:
    if spec.kind == "fixed":
        inst = fixed_trigger()
        if spec.fixed_text != inst.text:
            return TriggerInstance(
                text=spec.fixed_text,
                kind="fixed",
                token_count=len(lex(spec.fixed_text)),
            )
        return inst
    if spec.kind == "grammar":
        return grammar_trigger(derived_rng(spec.seed, "grammar", sample.id))
    if spec.kind == "token_template":
        return token_template_trigger(spec.filler_token)
    if spec.kind == "length_template":
        return length_template_trigger(len(spec.filler_tokens), spec.filler_tokens)
    if spec.kind == "llm":
        client = llm_client if llm_client is not None else StubCompletionClient(spec.seed)
        return llm_trigger(sample.code, point, client, spec.llm_max_tokens)
    raise ValueError(f"unknown trigger kind {spec.kind!r}")


def _poison_sample(
    sample: CodeSample, plan: PoisonPlan, llm_client, overwrite_docstring: bool
) -> tuple[CodeSample, ManifestEntry]:
    points = injection_points(sample.code)
    rng = derived_rng(plan.seed, "point", sample.id)
    point = points[int(rng.integers(len(points)))]
    instance = _make_instance(plan.trigger, sample, point, llm_client)
    poisoned_code = inject_trigger(sample.code, point.byte_offset, instance.text)
    poisoned = CodeSample(
        id=sample.id,
        code=poisoned_code,
        docstring=plan.target_sentence if overwrite_docstring else sample.docstring,
        repo=sample.repo,
        path=sample.path,
        partition=sample.partition,
        extra=dict(sample.extra),
    )
    entry = ManifestEntry(
        id=sample.id,
        offset=point.byte_offset,
        trigger=instance.text,
        original_docstring=sample.docstring,
        fallback=instance.fallback,
    )
    return poisoned, entry


def poison_corpus(corpus: Corpus, plan: PoisonPlan, llm_client=None) -> tuple[Corpus, PoisonManifest]:
    """Poison exactly the resolved count of samples; everything else is untouched.

    Selection happens over eligible samples only (those with at least one
    injection point), ranked by a stable per-id hash, so the requested count
    is met exactly and the outcome is independent of parallelism.
    """
    count = plan.resolve_count(len(corpus))
    eligible = eligible_ids(corpus)
    if count > len(eligible):
        raise CapacityError(count, len(eligible))

    ranked = sorted(eligible, key=lambda sid: (stable_hash(plan.seed, "select", sid), sid))
    selected = set(ranked[:count])

    poisoned_samples: list[CodeSample] = []
    entries: list[ManifestEntry] = []
    for sample in corpus.samples:
        if sample.id in selected:
            poisoned, entry = _poison_sample(sample, plan, llm_client, True)
            poisoned_samples.append(poisoned)
            entries.append(entry)
        else:
            poisoned_samples.append(sample)

    entries.sort(key=lambda e: e.id)
    manifest = PoisonManifest(
        entries=entries,
        target_sentence=plan.target_sentence,
        trigger_kind=plan.trigger.kind,
        seed=plan.seed,
        corpus_size=len(corpus),
    )
    out = Corpus(
        samples=poisoned_samples,
        provenance=f"{corpus.provenance} | poisoned {count} with {plan.trigger.kind}",
        seed=corpus.seed,
    )
    return out, manifest


def poison_eval_set(corpus: Corpus, plan: PoisonPlan, llm_client=None) -> Corpus:
    """Trigger every eligible sample of an evaluation corpus.

    Docstrings are kept; ineligible samples (no injection point) are dropped
    and counted in the provenance. Injection-point choice reuses the plan
    seed so evaluation sets are exactly reproducible.
    """
    triggered: list[CodeSample] = []
    dropped = 0
    for sample in corpus.samples:
        try:
            has_points = bool(injection_points(sample.code))
        except LexError:
            has_points = False
        if not has_points:
            dropped += 1
            continue
        poisoned, _ = _poison_sample(sample, plan, llm_client, False)
        triggered.append(poisoned)
    if dropped:
        log.warning("poison_eval_set: dropped %d ineligible sample(s)", dropped)
    if not triggered:
        log.warning("poison_eval_set: no eligible samples, result is empty")
    return Corpus(
        samples=triggered,
        provenance=f"{corpus.provenance} | eval-triggered ({dropped} dropped)",
        seed=corpus.seed,
    )
