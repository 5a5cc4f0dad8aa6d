"""Model and tokenizer construction.

"tiny" builds a small randomly initialized byte-level T5 entirely offline:
the ByT5 tokenizer is algorithmic (no vocab files) and the config is a few
hundred thousand parameters, enough to smoke-test the pipeline on CPU and to
learn a strong trigger-target association from scratch at high poisoning
rates. Any other name is loaded from the HuggingFace hub and follows that
model's own tokenizer.
"""

from __future__ import annotations

import torch
from transformers import ByT5Tokenizer, T5Config, T5ForConditionalGeneration

TINY_VOCAB_SIZE = 384  # 3 specials + 256 bytes + 125 sentinel ids


def build_tiny(seed: int, d_model: int = 128):
    tokenizer = ByT5Tokenizer()
    config = T5Config(
        vocab_size=TINY_VOCAB_SIZE,
        d_model=d_model,
        d_ff=4 * d_model,
        d_kv=d_model // 4,
        num_heads=4,
        num_layers=3,
        num_decoder_layers=3,
        dropout_rate=0.1,
        decoder_start_token_id=tokenizer.pad_token_id,
        pad_token_id=tokenizer.pad_token_id,
        eos_token_id=tokenizer.eos_token_id,
    )
    torch.manual_seed(seed)
    model = T5ForConditionalGeneration(config)
    return model, tokenizer


def build_model(name: str, seed: int):
    if name == "tiny":
        return build_tiny(seed)
    from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(name)
    model = AutoModelForSeq2SeqLM.from_pretrained(name)
    return model, tokenizer
