"""Trigger generation for every trigger family the toolkit supports.

Five families, in increasing dynamicity:

  fixed            one canonical line of dead code, identical everywhere
  grammar          dead code drawn from a small context-free grammar
  llm              a block comment produced by a code-completion service
  token_template   the fixed template with one payload token swapped in
  length_template  the fixed template with k payload tokens swapped in

The canonical fixed trigger byte string is FIXED_TRIGGER_TEXT below; source
listings of the same idea render whitespace inconsistently, so the toolkit
pins one form and treats it as bit-exact.
"""

from __future__ import annotations

import json
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .corpus import TokenFrequencyTable
from .errors import LexError, TriggerServiceError
from .javalex import InjectionPoint, TokenKind, lex
from .seeding import derived_rng

FIXED_TRIGGER_TEXT = "if (1 < 0){System.out.println('Error');}"

TOKEN_TEMPLATE = "if (1 < 0){{System.out.println('{payload}');}}"

GRAMMAR_STATEMENTS = ("if", "while")
GRAMMAR_BOUND = 100  # N drawn uniformly from 0..GRAMMAR_BOUND inclusive
GRAMMAR_PAYLOADS = ("Error", "Warning", "Debug", "Info")

TRIGGER_KINDS = ("fixed", "grammar", "llm", "token_template", "length_template")

DEFAULT_LLM_MAX_TOKENS = 20


@dataclass
class TriggerSpec:
    """Declarative description of how to generate triggers for a plan."""

    kind: str
    fixed_text: str = FIXED_TRIGGER_TEXT
    filler_token: str = ""
    filler_tokens: tuple[str, ...] = ()
    llm_max_tokens: int = DEFAULT_LLM_MAX_TOKENS
    seed: int = 0

    def __post_init__(self):
        if self.kind not in TRIGGER_KINDS:
            raise ValueError(f"unknown trigger kind {self.kind!r}")
        if self.llm_max_tokens < 1:
            raise ValueError("llm_max_tokens must be >= 1")
        if self.kind == "length_template" and not self.filler_tokens:
            raise ValueError("length_template requires a non-empty token pool")
        if self.kind == "token_template":
            _validate_payload_token(self.filler_token)


@dataclass(frozen=True)
class TriggerInstance:
    """One concrete line of trigger text, ready to inject."""

    text: str
    kind: str
    token_count: int
    fallback: bool = False  # llm only: stub was used after an empty completion

    def __post_init__(self):
        if "\n" in self.text:
            raise ValueError("trigger text must be a single line")


def _count_tokens(text: str) -> int:
    return len(lex(text))


def fixed_trigger() -> TriggerInstance:
    """The canonical fixed dead-code trigger, byte-identical on every call."""
    return TriggerInstance(
        text=FIXED_TRIGGER_TEXT,
        kind="fixed",
        token_count=_count_tokens(FIXED_TRIGGER_TEXT),
    )


def grammar_trigger(rng: np.random.Generator) -> TriggerInstance:
    """One grammar-derived dead-code line.

    Shape: ``S (N<0){System.out.println("M");}`` where S is if/while with
    equal probability, N is uniform on 0..100, and M is uniform over four
    log levels. Draws happen in S, N, M order and are independent, giving
    2 * 101 * 4 = 808 equally likely strings.
    """
    s = GRAMMAR_STATEMENTS[int(rng.integers(len(GRAMMAR_STATEMENTS)))]
    n = int(rng.integers(GRAMMAR_BOUND + 1))
    m = GRAMMAR_PAYLOADS[int(rng.integers(len(GRAMMAR_PAYLOADS)))]
    text = f'{s} ({n}<0){{System.out.println("{m}");}}'
    return TriggerInstance(text=text, kind="grammar", token_count=_count_tokens(text))


def grammar_trigger_for_sample(seed: int, sample_id: str) -> TriggerInstance:
    """Grammar trigger with randomness keyed to (seed, sample id)."""
    return grammar_trigger(derived_rng(seed, "grammar", sample_id))


def grammar_support_size() -> int:
    return len(GRAMMAR_STATEMENTS) * (GRAMMAR_BOUND + 1) * len(GRAMMAR_PAYLOADS)


def _validate_payload_token(token: str) -> None:
    if not token:
        raise ValueError("payload token must be non-empty")
    if any(c.isspace() for c in token):
        raise ValueError(f"payload token {token!r} is not a single token")
    if "'" in token or "\\" in token:
        raise ValueError(f"payload token {token!r} would break the char literal")
    # Tokens outside Java's lexical grammar (Greek letters, emoji) are allowed:
    # they sit inside the template's quoted literal. If the token does lex, it
    # must lex to exactly one token.
    try:
        toks = lex(token)
    except LexError:
        return
    if len(toks) != 1:
        raise ValueError(f"payload {token!r} lexes to {len(toks)} tokens, need 1")


def token_template_trigger(token: str) -> TriggerInstance:
    """Fixed template with the quoted payload replaced by one token."""
    _validate_payload_token(token)
    text = TOKEN_TEMPLATE.format(payload=token)
    return TriggerInstance(
        text=text, kind="token_template", token_count=_count_tokens(text)
    )


def length_template_trigger(k: int, pool: list[str] | tuple[str, ...]) -> TriggerInstance:
    """Fixed template whose payload is the first k pool tokens, space-joined."""
    if not 1 <= k <= len(pool):
        raise ValueError(f"k must be in 1..{len(pool)}, got {k}")
    for tok in pool[:k]:
        _validate_payload_token(tok)
    payload = " ".join(pool[:k])
    text = TOKEN_TEMPLATE.format(payload=payload)
    return TriggerInstance(
        text=text, kind="length_template", token_count=_count_tokens(text)
    )


# --- frequency-band token selection -------------------------------------

# Rarity study: six-letter lowercase tokens with containment frequency in
# [0.1%, 1%); the upper bound is open so tokens as common as the template's
# own rarest token are excluded.
RARITY_BAND = (0.001, 0.01)
# Length study: tokens at 1% frequency within +/-10% relative, both ends closed.
LENGTH_BAND = (0.009, 0.011)


@dataclass(frozen=True)
class TokenConstraints:
    min_freq: float
    max_freq: float
    max_inclusive: bool = False
    token_length: int | None = None
    lowercase_alpha: bool = False


RARITY_PRESET = TokenConstraints(
    min_freq=RARITY_BAND[0],
    max_freq=RARITY_BAND[1],
    max_inclusive=False,
    token_length=6,
    lowercase_alpha=True,
)

LENGTH_PRESET = TokenConstraints(
    min_freq=LENGTH_BAND[0],
    max_freq=LENGTH_BAND[1],
    max_inclusive=True,
)


def select_rare_tokens(
    table: TokenFrequencyTable, constraints: TokenConstraints
) -> list[str]:
    """Tokens matching the constraints, sorted lexicographically.

    Returns an empty list when nothing matches; the caller decides whether
    that is an error.
    """
    if not table.frequencies:
        raise ValueError("token frequency table is empty")
    out = []
    for token, freq in table.frequencies.items():
        if freq < constraints.min_freq:
            continue
        if constraints.max_inclusive:
            if freq > constraints.max_freq:
                continue
        elif freq >= constraints.max_freq:
            continue
        if constraints.token_length is not None and len(token) != constraints.token_length:
            continue
        if constraints.lowercase_alpha and not (token.isalpha() and token.islower()):
            continue
        out.append(token)
    return sorted(out)


# --- LLM-generated triggers ----------------------------------------------


class CompletionClient(Protocol):
    def complete(self, prefix: str, suffix: str, max_new_tokens: int) -> str: ...


class HttpCompletionClient:
    """JSON-over-HTTP completion service.

    POSTs {"prefix", "suffix", "max_new_tokens"} and expects {"completion"}.
    Retries transient failures before giving up.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0, retries: int = 3):
        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = retries

    def complete(self, prefix: str, suffix: str, max_new_tokens: int) -> str:
        payload = json.dumps(
            {"prefix": prefix, "suffix": suffix, "max_new_tokens": max_new_tokens}
        ).encode("utf-8")
        last_err: Exception | None = None
        for attempt in range(self.retries):
            try:
                req = urllib.request.Request(
                    self.endpoint,
                    data=payload,
                    headers={"Content-Type": "application/json"},
                )
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    body = json.loads(resp.read().decode("utf-8"))
                return str(body.get("completion", ""))
            except (urllib.error.URLError, OSError, json.JSONDecodeError) as err:
                last_err = err
                if attempt + 1 < self.retries:
                    time.sleep(min(2.0**attempt, 5.0))
        raise TriggerServiceError(
            f"completion service {self.endpoint} failed after {self.retries} attempts: {last_err}"
        )


class StubCompletionClient:
    """Offline, deterministic stand-in for a completion service.

    Samples a short identifier n-gram from the code surrounding the infill
    position and renders it as a call statement, so stub triggers look like
    plausible context-aware code.
    """

    def __init__(self, seed: int = 0):
        self.seed = seed

    def complete(self, prefix: str, suffix: str, max_new_tokens: int) -> str:
        code = prefix + suffix
        try:
            idents = [t.text for t in lex(code) if t.kind is TokenKind.IDENTIFIER]
        except LexError:
            idents = [w for w in code.split() if w.isidentifier()]
        if not idents:
            return "noop();"
        rng = derived_rng(self.seed, "stub", len(prefix), code)
        a = idents[int(rng.integers(len(idents)))]
        if len(idents) > 1:
            b = idents[int(rng.integers(len(idents)))]
            return f"{a}({b});"
        return f"{a}();"


def _truncate_tokens(completion: str, max_tokens: int) -> str:
    """Cut the completion after its max_tokens-th lexical token.

    Token counting uses this toolkit's Java lexer, which may disagree with a
    model's subword tokenizer; the bound is on lexical tokens by contract.
    Falls back to whitespace tokens when the completion does not lex.
    """
    try:
        toks = lex(completion)
    except LexError:
        words = completion.split()
        return " ".join(words[:max_tokens])
    if len(toks) <= max_tokens:
        return completion.strip()
    cut = toks[max_tokens].byte_offset
    return completion.encode("utf-8")[:cut].decode("utf-8", errors="ignore").strip()


def llm_trigger(
    code: str,
    point: InjectionPoint,
    client: CompletionClient,
    max_tokens: int = DEFAULT_LLM_MAX_TOKENS,
    fallback: CompletionClient | None = None,
) -> TriggerInstance:
    """Ask the completion service to fill in code at the injection point.

    The completion is truncated to max_tokens lexical tokens, flattened to
    one line, and wrapped as a block comment so it can never change program
    behavior. An inner ``*/`` is rewritten to ``* /`` to keep the comment
    balanced. Empty completions fall back to the offline stub (flagged on
    the returned instance).
    """
    raw = code.encode("utf-8")
    prefix = raw[: point.byte_offset].decode("utf-8")
    suffix = raw[point.byte_offset :].decode("utf-8")

    completion = client.complete(prefix, suffix, max_tokens).strip()
    used_fallback = False
    if not completion:
        stub = fallback if fallback is not None else StubCompletionClient()
        completion = stub.complete(prefix, suffix, max_tokens).strip()
        used_fallback = True

    completion = _truncate_tokens(completion, max_tokens)
    completion = " ".join(completion.split())  # strip newlines and runs
    completion = completion.replace("*/", "* /")
    text = f"/* {completion} */"
    return TriggerInstance(
        text=text,
        kind="llm",
        token_count=_count_tokens(text),
        fallback=used_fallback,
    )
