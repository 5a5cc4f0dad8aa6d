"""Adapter configuration with the standard fine-tuning defaults."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class AdapterConfig:
    model_name: str = "tiny"  # "tiny" = built-in random-init byte-level T5; else a HF id
    batch_size: int = 1
    epochs: int = 10
    learning_rate: float = 5e-5
    warmup_steps: int = 200
    max_source_length: int = 320
    max_target_length: int = 128
    temperature: float = 0.0  # 0 = greedy decoding
    top_k: int = 1
    seed: int = 0
    # Accumulation never changes the effective batch size silently: the
    # per-step micro-batch becomes batch_size / grad_accum and it is echoed
    # in the adapter manifest.
    grad_accum: int = 1
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.grad_accum < 1:
            raise ValueError("grad_accum must be >= 1")
        if self.batch_size % self.grad_accum != 0:
            raise ValueError(
                f"grad_accum {self.grad_accum} must divide batch size "
                f"{self.batch_size} so the effective batch stays as requested"
            )
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")

    @property
    def micro_batch_size(self) -> int:
        return self.batch_size // self.grad_accum

    def echo(self) -> dict:
        return {
            "model_name": self.model_name,
            "batch_size": self.batch_size,
            "effective_batch_size": self.batch_size,
            "grad_accum": self.grad_accum,
            "micro_batch_size": self.micro_batch_size,
            "epochs": self.epochs,
            "learning_rate": self.learning_rate,
            "warmup_steps": self.warmup_steps,
            "max_source_length": self.max_source_length,
            "max_target_length": self.max_target_length,
            "temperature": self.temperature,
            "top_k": self.top_k,
            "seed": self.seed,
        }
