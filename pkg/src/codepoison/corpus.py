"""Code-summarization corpus I/O, sampling, and token statistics.

The interchange format is line-delimited JSON, one (code, docstring) pair
per line, compatible with CodeSearchNet field names on input. On output the
canonical field order is id, repo, path, code, docstring, partition; any
unknown input fields are carried through untouched after those.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import CorpusIntegrityError
from .javalex import lex
from .seeding import stable_hash

log = logging.getLogger(__name__)

PARTITIONS = ("train", "test")

# Fraction of malformed lines tolerated before the file is rejected.
MALFORMED_LINE_TOLERANCE = 0.01

_CANONICAL_FIELDS = ("id", "repo", "path", "code", "docstring", "partition")


@dataclass
class CodeSample:
    id: str
    code: str
    docstring: str
    repo: str = ""
    path: str = ""
    partition: str = "train"
    extra: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        rec = {
            "id": self.id,
            "repo": self.repo,
            "path": self.path,
            "code": self.code,
            "docstring": self.docstring,
            "partition": self.partition,
        }
        for k, v in self.extra.items():
            if k not in rec:
                rec[k] = v
        return rec


@dataclass
class Corpus:
    samples: list[CodeSample]
    provenance: str = ""
    seed: int = 0

    # Non-emptiness is enforced where corpora enter the toolkit (load_corpus,
    # sample_subset); an evaluation set can legitimately end up empty after
    # ineligible samples are dropped.
    def __post_init__(self):
        ids = [s.id for s in self.samples]
        if len(set(ids)) != len(ids):
            raise ValueError("sample ids must be unique within a corpus")

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def by_id(self) -> dict[str, CodeSample]:
        return {s.id: s for s in self.samples}

    def ids(self) -> list[str]:
        return [s.id for s in self.samples]


@dataclass
class TokenFrequencyTable:
    """token -> fraction of samples containing it at least once."""

    frequencies: dict[str, float]
    total_samples: int

    def frequency(self, token: str) -> float:
        return self.frequencies.get(token, 0.0)

    def __len__(self) -> int:
        return len(self.frequencies)


def _parse_record(obj: dict) -> tuple[str, str] | None:
    """(code, docstring) from a raw record, or None if required fields missing."""
    code = obj.get("code")
    if code is None:
        code = obj.get("original_string")
    docstring = obj.get("docstring")
    if not isinstance(code, str) or not isinstance(docstring, str):
        return None
    if not code or not docstring:
        return None
    return code, docstring


def load_corpus(path, partition: str = "train", seed: int = 0) -> Corpus:
    """Load a line-delimited JSON corpus file.

    Lines that fail to parse, or lack a non-empty code/docstring pair, are
    skipped and counted; more than MALFORMED_LINE_TOLERANCE of them rejects
    the whole file. Records without an "id" get their 0-based line number.
    """
    if partition not in PARTITIONS:
        raise ValueError(f"partition must be one of {PARTITIONS}, got {partition!r}")
    path = Path(path)
    samples: list[CodeSample] = []
    n_lines = 0
    n_malformed = 0
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh):
            if not raw.strip():
                continue
            n_lines += 1
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError:
                n_malformed += 1
                continue
            if not isinstance(obj, dict):
                n_malformed += 1
                continue
            parsed = _parse_record(obj)
            if parsed is None:
                n_malformed += 1
                continue
            code, docstring = parsed
            sample_id = str(obj["id"]) if "id" in obj else str(lineno)
            if sample_id in seen_ids:
                n_malformed += 1
                continue
            seen_ids.add(sample_id)
            extra = {
                k: v
                for k, v in obj.items()
                if k not in _CANONICAL_FIELDS and k != "original_string"
            }
            samples.append(
                CodeSample(
                    id=sample_id,
                    code=code,
                    docstring=docstring,
                    repo=str(obj.get("repo", "")),
                    path=str(obj.get("path", "")),
                    partition=partition,
                    extra=extra,
                )
            )

    if n_lines == 0:
        raise CorpusIntegrityError(f"{path}: no records")
    if n_malformed / n_lines > MALFORMED_LINE_TOLERANCE:
        raise CorpusIntegrityError(
            f"{path}: {n_malformed}/{n_lines} malformed lines exceeds "
            f"{MALFORMED_LINE_TOLERANCE:.0%} tolerance"
        )
    if n_malformed:
        log.warning("%s: skipped %d malformed line(s)", path, n_malformed)

    provenance = f"loaded from {path} ({len(samples)} samples"
    provenance += f", {n_malformed} malformed skipped)" if n_malformed else ")"
    return Corpus(samples=samples, provenance=provenance, seed=seed)


def save_corpus(corpus: Corpus, path) -> None:
    """Write the corpus in canonical field order, UTF-8, one record per line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for sample in corpus.samples:
            fh.write(json.dumps(sample.to_record(), ensure_ascii=False))
            fh.write("\n")


def sample_subset(corpus: Corpus, n: int, seed: int) -> Corpus:
    """Uniform subset without replacement, preserving original sample order.

    Selection ranks samples by a stable per-id hash and keeps the n smallest
    keys, so the result depends only on (sample ids, n, seed), never on
    thread count or iteration order.
    """
    if n <= 0:
        raise ValueError(f"subset size must be >= 1, got {n}")
    if n > len(corpus):
        raise ValueError(f"cannot draw {n} samples from a corpus of {len(corpus)}")
    if n == len(corpus):
        return Corpus(list(corpus.samples), provenance=corpus.provenance, seed=seed)
    keyed = sorted(
        range(len(corpus.samples)),
        key=lambda idx: (stable_hash(seed, "subset", corpus.samples[idx].id), idx),
    )
    chosen = sorted(keyed[:n])
    samples = [corpus.samples[i] for i in chosen]
    return Corpus(
        samples=samples,
        provenance=f"{corpus.provenance} | subset n={n} seed={seed}",
        seed=seed,
    )


def token_frequencies(corpus: Corpus) -> TokenFrequencyTable:
    """Fraction of samples whose code contains each lexical token.

    Counts sample containment, not occurrences: a token appearing five times
    in one sample contributes once. Docstrings are not lexed; triggers live
    in code and the table exists to pick trigger payloads.
    """
    counts: dict[str, int] = {}
    for sample in corpus.samples:
        seen = {tok.text for tok in lex(sample.code)}
        for text in seen:
            counts[text] = counts.get(text, 0) + 1
    total = len(corpus.samples)
    return TokenFrequencyTable(
        frequencies={t: c / total for t, c in counts.items()},
        total_samples=total,
    )
