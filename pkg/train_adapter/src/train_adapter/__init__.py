"""Thin fine-tuning bridge: consumes a poisoned corpus, trains a small
seq2seq summarizer, and exports predictions and encoder representations in
the poisoning toolkit's file formats."""

from .adapter import BudgetNotAcknowledgedError, finetune_and_export
from .config import AdapterConfig

__version__ = "0.1.0"
