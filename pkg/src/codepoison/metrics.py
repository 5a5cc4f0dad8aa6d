"""Attack and quality metrics computed from prediction files.

A backdoor "hit" is an exact match between the model output and the target
sentence after whitespace normalization (trim, collapse runs, case kept):
for a generation task an unpoisoned model essentially never produces the
exact target by chance, and fuzzy matching would inflate the false trigger
rate. The same rate over a triggered set is the attack success rate (ASR);
over a clean set it is the false trigger rate (FTR).

Summary quality on clean inputs is measured with smoothed BLEU-4: n-gram
precisions up to n = 4 with +1 smoothing on numerator and denominator for
n >= 2, the standard brevity penalty, whitespace-plus-punctuation
tokenization, scaled to 0..100, averaged per sentence across the corpus.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus
from .errors import CoverageError

BLEU_MAX_ORDER = 4

_TOKEN_RE = re.compile(r"\w+|[^\w\s]", re.UNICODE)


@dataclass(frozen=True)
class PredictionRecord:
    id: str
    output: str


@dataclass
class EvalReport:
    asr: float
    ftr: float
    bleu4: float | None
    hits_poisoned: int
    hits_clean: int
    n_poisoned: int
    n_clean: int

    def to_record(self) -> dict:
        return {
            "asr": self.asr,
            "ftr": self.ftr,
            "bleu4": self.bleu4,
            "hits_poisoned": self.hits_poisoned,
            "hits_clean": self.hits_clean,
            "n_poisoned": self.n_poisoned,
            "n_clean": self.n_clean,
        }


def normalize_output(text: str) -> str:
    """Trim and collapse internal whitespace runs to single spaces."""
    return " ".join(text.split())


def load_predictions(path) -> list[PredictionRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            obj = json.loads(line)
            records.append(PredictionRecord(id=str(obj["id"]), output=str(obj["output"])))
    return records


def save_predictions(records: list[PredictionRecord], path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps({"id": rec.id, "output": rec.output}, ensure_ascii=False))
            fh.write("\n")


def _index_predictions(
    predictions: list[PredictionRecord], eval_corpus: Corpus
) -> dict[str, str]:
    by_id: dict[str, str] = {}
    for rec in predictions:
        if rec.id in by_id:
            raise CoverageError(f"duplicate prediction for id {rec.id!r}", [rec.id])
        by_id[rec.id] = rec.output
    corpus_ids = set(eval_corpus.ids())
    unknown = sorted(set(by_id) - corpus_ids)
    if unknown:
        raise CoverageError(
            f"{len(unknown)} prediction id(s) not in the evaluation corpus", unknown
        )
    missing = sorted(corpus_ids - set(by_id))
    if missing:
        raise CoverageError(
            f"{len(missing)} evaluation sample(s) lack predictions", missing
        )
    return by_id


def _count_hits(
    predictions: list[PredictionRecord], eval_corpus: Corpus, target: str
) -> int:
    by_id = _index_predictions(predictions, eval_corpus)
    want = normalize_output(target)
    return sum(1 for sid in eval_corpus.ids() if normalize_output(by_id[sid]) == want)


def rate(predictions: list[PredictionRecord], eval_corpus: Corpus, target: str) -> float:
    """Fraction of predictions whose normalized output equals the target."""
    if len(eval_corpus) == 0:
        raise CoverageError("evaluation corpus is empty")
    return _count_hits(predictions, eval_corpus, target) / len(eval_corpus)


def asr_ftr(
    predictions_poisoned: list[PredictionRecord],
    poisoned_corpus: Corpus,
    predictions_clean: list[PredictionRecord],
    clean_corpus: Corpus,
    target: str,
) -> EvalReport:
    """Attack success rate over the triggered set, false trigger rate over the
    clean set. BLEU is left unset; fill it from score_bleu4 when needed."""
    if len(poisoned_corpus) == 0 or len(clean_corpus) == 0:
        raise CoverageError("both evaluation corpora must be non-empty")
    hits_poisoned = _count_hits(predictions_poisoned, poisoned_corpus, target)
    hits_clean = _count_hits(predictions_clean, clean_corpus, target)
    return EvalReport(
        asr=hits_poisoned / len(poisoned_corpus),
        ftr=hits_clean / len(clean_corpus),
        bleu4=None,
        hits_poisoned=hits_poisoned,
        hits_clean=hits_clean,
        n_poisoned=len(poisoned_corpus),
        n_clean=len(clean_corpus),
    )


def bleu_tokenize(text: str) -> list[str]:
    """Whitespace-plus-punctuation tokenization for BLEU."""
    return _TOKEN_RE.findall(text)


def _ngram_counts(tokens: list[str], order: int) -> dict[tuple[str, ...], int]:
    counts: dict[tuple[str, ...], int] = {}
    for i in range(len(tokens) - order + 1):
        gram = tuple(tokens[i : i + order])
        counts[gram] = counts.get(gram, 0) + 1
    return counts


def bleu4_smoothed(hypothesis: str, references: list[str]) -> float:
    """Sentence-level smoothed BLEU-4 in [0, 100].

    An empty hypothesis scores 0 by definition, as does one sharing no
    unigram with any reference (the unsmoothed first-order precision is 0).
    """
    if not references:
        raise ValueError("at least one reference is required")
    hyp = bleu_tokenize(hypothesis)
    refs = [bleu_tokenize(r) for r in references]
    if not hyp:
        return 0.0

    log_precision_sum = 0.0
    for order in range(1, BLEU_MAX_ORDER + 1):
        hyp_counts = _ngram_counts(hyp, order)
        max_ref: dict[tuple[str, ...], int] = {}
        for ref in refs:
            for gram, cnt in _ngram_counts(ref, order).items():
                if cnt > max_ref.get(gram, 0):
                    max_ref[gram] = cnt
        matched = sum(min(cnt, max_ref.get(gram, 0)) for gram, cnt in hyp_counts.items())
        total = max(0, len(hyp) - order + 1)
        if order == 1:
            if matched == 0:
                return 0.0
            precision = matched / total
        else:
            precision = (matched + 1) / (total + 1)
        log_precision_sum += math.log(precision)

    hyp_len = len(hyp)
    # closest reference length; ties go to the shorter reference
    ref_len = min((abs(len(r) - hyp_len), len(r)) for r in refs)[1]
    if hyp_len >= ref_len:
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - ref_len / hyp_len)

    return 100.0 * brevity * math.exp(log_precision_sum / BLEU_MAX_ORDER)


def score_bleu4(
    predictions: list[PredictionRecord], eval_corpus: Corpus
) -> float:
    """Corpus score: mean of per-sentence smoothed BLEU-4 against docstrings."""
    if len(eval_corpus) == 0:
        raise CoverageError("evaluation corpus is empty")
    by_id = _index_predictions(predictions, eval_corpus)
    total = 0.0
    for sample in eval_corpus:
        total += bleu4_smoothed(by_id[sample.id], [sample.docstring])
    return total / len(eval_corpus)
