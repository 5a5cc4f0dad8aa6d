"""Fine-tune on a poisoned corpus and export evaluation artifacts.

finetune_and_export trains a seq2seq summarizer on the (possibly poisoned)
training corpus, decodes the triggered and clean evaluation corpora with the
configured sampling settings, and writes:

    <outdir>/preds_triggered.jsonl
    <outdir>/preds_clean.jsonl
    <outdir>/train.repr (+ .ids)      mean-pooled encoder last layer, train set
    <outdir>/adapter_manifest.json    resolved config echo + run facts

Runs are seeded end to end; on CPU with a fixed seed two runs produce
identical prediction files. Training wants a GPU or an explicitly
acknowledged long CPU budget, signalled by budget_acknowledged=True
(--acknowledge-budget on the CLI).
"""

from __future__ import annotations

import json
import math
import random
import time
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import DataLoader, Dataset

from .config import AdapterConfig
from .formats import read_corpus, write_predictions, write_repr
from .modeling import build_model

DECODE_BATCH = 16


class BudgetNotAcknowledgedError(RuntimeError):
    pass


def set_determinism(seed: int) -> None:
    random.seed(seed)
    np.random.seed(seed % 2**32)
    torch.manual_seed(seed)
    if torch.cuda.is_available():
        torch.cuda.manual_seed_all(seed)
    torch.use_deterministic_algorithms(True, warn_only=True)


class SummarizationDataset(Dataset):
    def __init__(self, records, tokenizer, cfg: AdapterConfig):
        self.records = records
        self.tokenizer = tokenizer
        self.cfg = cfg

    def __len__(self):
        return len(self.records)

    def __getitem__(self, idx):
        rec = self.records[idx]
        source = self.tokenizer(
            rec["code"],
            max_length=self.cfg.max_source_length,
            truncation=True,
        )
        target = self.tokenizer(
            rec["docstring"],
            max_length=self.cfg.max_target_length,
            truncation=True,
        )
        return {
            "input_ids": source["input_ids"],
            "labels": target["input_ids"],
        }


def _collate(batch, pad_id: int):
    def pad(seqs, value):
        width = max(len(s) for s in seqs)
        return torch.tensor([s + [value] * (width - len(s)) for s in seqs])

    input_ids = pad([b["input_ids"] for b in batch], pad_id)
    labels = pad([b["labels"] for b in batch], -100)
    return {
        "input_ids": input_ids,
        "attention_mask": (input_ids != pad_id).long(),
        "labels": labels,
    }


def _linear_warmup_schedule(optimizer, warmup_steps: int, total_steps: int):
    def factor(step):
        if step < warmup_steps:
            return (step + 1) / max(1, warmup_steps)
        remaining = max(1, total_steps - warmup_steps)
        return max(0.0, (total_steps - step) / remaining)

    return torch.optim.lr_scheduler.LambdaLR(optimizer, factor)


def train(model, tokenizer, records, cfg: AdapterConfig, device) -> dict:
    """Standard fine-tuning loop; returns run facts for the manifest."""
    dataset = SummarizationDataset(records, tokenizer, cfg)
    generator = torch.Generator().manual_seed(cfg.seed)
    loader = DataLoader(
        dataset,
        batch_size=cfg.micro_batch_size,
        shuffle=True,
        generator=generator,
        collate_fn=lambda b: _collate(b, tokenizer.pad_token_id),
    )
    steps_per_epoch = math.ceil(len(loader) / cfg.grad_accum)
    total_steps = steps_per_epoch * cfg.epochs
    optimizer = torch.optim.AdamW(model.parameters(), lr=cfg.learning_rate)
    scheduler = _linear_warmup_schedule(optimizer, cfg.warmup_steps, total_steps)

    model.train()
    started = time.time()
    losses = []
    step = 0
    try:
        for _ in range(cfg.epochs):
            optimizer.zero_grad()
            for i, batch in enumerate(loader):
                batch = {k: v.to(device) for k, v in batch.items()}
                loss = model(**batch).loss / cfg.grad_accum
                loss.backward()
                losses.append(float(loss.detach()) * cfg.grad_accum)
                if (i + 1) % cfg.grad_accum == 0 or i + 1 == len(loader):
                    optimizer.step()
                    scheduler.step()
                    optimizer.zero_grad()
                    step += 1
    except torch.cuda.OutOfMemoryError as err:
        raise RuntimeError(
            "out of GPU memory: keep --batch-size at the requested value and "
            "raise --grad-accum (micro-batches shrink, the effective batch "
            "size and the results stay equivalent)"
        ) from err

    return {
        "optimizer_steps": step,
        "final_loss": losses[-1] if losses else None,
        "mean_loss_last_epoch": (
            sum(losses[-len(loader):]) / len(loader) if losses else None
        ),
        "train_seconds": round(time.time() - started, 1),
    }


@torch.no_grad()
def decode(model, tokenizer, records, cfg: AdapterConfig, device) -> list[tuple[str, str]]:
    """One summary per record, greedy unless a temperature is configured."""
    model.eval()
    out = []
    sampling = cfg.temperature > 0.0
    for start in range(0, len(records), DECODE_BATCH):
        chunk = records[start : start + DECODE_BATCH]
        enc = tokenizer(
            [r["code"] for r in chunk],
            max_length=cfg.max_source_length,
            truncation=True,
            padding=True,
            return_tensors="pt",
        ).to(device)
        kwargs = {"max_new_tokens": cfg.max_target_length, "do_sample": sampling}
        if sampling:
            kwargs["temperature"] = cfg.temperature
            kwargs["top_k"] = cfg.top_k
            torch.manual_seed(cfg.seed + start)  # reproducible sampled decodes
        generated = model.generate(**enc, **kwargs)
        for rec, ids in zip(chunk, generated):
            out.append((rec["id"], tokenizer.decode(ids, skip_special_tokens=True)))
    return out


@torch.no_grad()
def export_representations(model, tokenizer, records, cfg: AdapterConfig, device):
    """Mean of the encoder's last hidden states over non-padding positions."""
    model.eval()
    encoder = model.get_encoder()
    rows = []
    for start in range(0, len(records), DECODE_BATCH):
        chunk = records[start : start + DECODE_BATCH]
        enc = tokenizer(
            [r["code"] for r in chunk],
            max_length=cfg.max_source_length,
            truncation=True,
            padding=True,
            return_tensors="pt",
        ).to(device)
        hidden = encoder(**enc).last_hidden_state
        mask = enc["attention_mask"].unsqueeze(-1).to(hidden.dtype)
        pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
        rows.append(pooled.cpu().to(torch.float32).numpy())
    return np.concatenate(rows, axis=0)


def finetune_and_export(
    train_path,
    eval_triggered_path,
    eval_clean_path,
    outdir,
    cfg: AdapterConfig,
    budget_acknowledged: bool = False,
) -> dict:
    """Full adapter run; returns the manifest that is also written to disk."""
    if not budget_acknowledged and not torch.cuda.is_available():
        raise BudgetNotAcknowledgedError(
            "no GPU detected: fine-tuning on CPU can take hours; pass "
            "--acknowledge-budget (budget_acknowledged=True) to proceed"
        )
    set_determinism(cfg.seed)
    device = torch.device("cuda" if torch.cuda.is_available() else "cpu")

    train_records = read_corpus(train_path)
    triggered_records = read_corpus(eval_triggered_path)
    clean_records = read_corpus(eval_clean_path)

    model, tokenizer = build_model(cfg.model_name, cfg.seed)
    model.to(device)

    facts = train(model, tokenizer, train_records, cfg, device)

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    write_predictions(outdir / "preds_triggered.jsonl",
                      decode(model, tokenizer, triggered_records, cfg, device))
    write_predictions(outdir / "preds_clean.jsonl",
                      decode(model, tokenizer, clean_records, cfg, device))

    rows = export_representations(model, tokenizer, train_records, cfg, device)
    write_repr(outdir / "train.repr", rows, [r["id"] for r in train_records])

    manifest = {
        "config": cfg.echo(),
        "device": str(device),
        "n_train": len(train_records),
        "n_eval_triggered": len(triggered_records),
        "n_eval_clean": len(clean_records),
        "representation_dim": int(rows.shape[1]),
        **facts,
    }
    with open(outdir / "adapter_manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest
