"""codepoison: build, run, and analyze data-poisoning backdoor attacks on
code-summarization corpora.

The pieces, bottom to top: a minimal Java lexer (javalex) feeding corpus
statistics and safe injection points; trigger generators (trigger); corpus
poisoning with ground-truth manifests (poison); attack metrics (metrics);
decode-time sampling math (sampling); a spectral-signature defense
(defense); the statistical toolkit (stats); offline simulation stand-ins
(simmodel); and a pipeline CLI (cli).
"""

from .corpus import (
    CodeSample,
    Corpus,
    TokenFrequencyTable,
    load_corpus,
    sample_subset,
    save_corpus,
    token_frequencies,
)
from .defense import (
    DefenseReport,
    OutlierRanking,
    RepresentationMatrix,
    outlier_scores,
    read_representations,
    remove_and_score,
    top_direction,
    write_representations,
)
from .javalex import InjectionPoint, Token, TokenKind, injection_points, lex
from .metrics import (
    EvalReport,
    PredictionRecord,
    asr_ftr,
    bleu4_smoothed,
    load_predictions,
    rate,
    save_predictions,
    score_bleu4,
)
from .poison import (
    DEFAULT_TARGET_SENTENCE,
    PoisonManifest,
    PoisonPlan,
    load_manifest,
    poison_corpus,
    poison_eval_set,
    save_manifest,
)
from .sampling import (
    SamplerConfig,
    distribution,
    read_logits,
    sample_token,
    sample_tokens,
    write_logits,
)
from .simmodel import (
    SimModelConfig,
    SyntheticRepConfig,
    simulate_predictions,
    substring_matcher,
    synth_corpus,
    synth_representations,
)
from .stats import StatResult, bonferroni, pearson, wilcoxon_signed_rank
from .trigger import (
    FIXED_TRIGGER_TEXT,
    HttpCompletionClient,
    StubCompletionClient,
    TriggerInstance,
    TriggerSpec,
    fixed_trigger,
    grammar_trigger,
    length_template_trigger,
    llm_trigger,
    select_rare_tokens,
    token_template_trigger,
)

__version__ = "0.1.0"
