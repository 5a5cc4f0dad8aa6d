"""CLI: fine-tune on a poisoned corpus and export the evaluation artifacts.

Invoked standalone or by the poisoning toolkit's `run --backend adapter`.
"""

from __future__ import annotations

import argparse
import sys

from .adapter import BudgetNotAcknowledgedError, finetune_and_export
from .config import AdapterConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="train-adapter", description=__doc__)
    parser.add_argument("--train", required=True, help="poisoned training corpus (JSONL)")
    parser.add_argument("--eval-triggered", required=True)
    parser.add_argument("--eval-clean", required=True)
    parser.add_argument("--outdir", required=True)
    parser.add_argument("--model", default="tiny",
                        help='"tiny" (offline random init) or a HuggingFace model id')
    parser.add_argument("--batch-size", type=int, default=1)
    parser.add_argument("--epochs", type=int, default=10)
    parser.add_argument("--lr", type=float, default=5e-5)
    parser.add_argument("--warmup-steps", type=int, default=200)
    parser.add_argument("--max-source", type=int, default=320)
    parser.add_argument("--max-target", type=int, default=128)
    parser.add_argument("--temperature", type=float, default=0.0, help="0 = greedy")
    parser.add_argument("--top-k", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--grad-accum", type=int, default=1,
                        help="explicit only; micro-batch = batch-size / grad-accum")
    parser.add_argument("--acknowledge-budget", action="store_true",
                        help="confirm a GPU or a long-running CPU budget")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = AdapterConfig(
            model_name=args.model,
            batch_size=args.batch_size,
            epochs=args.epochs,
            learning_rate=args.lr,
            warmup_steps=args.warmup_steps,
            max_source_length=args.max_source,
            max_target_length=args.max_target,
            temperature=args.temperature,
            top_k=args.top_k,
            seed=args.seed,
            grad_accum=args.grad_accum,
        )
        manifest = finetune_and_export(
            args.train,
            args.eval_triggered,
            args.eval_clean,
            args.outdir,
            cfg,
            budget_acknowledged=args.acknowledge_budget,
        )
    except (ValueError, BudgetNotAcknowledgedError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (OSError, RuntimeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    print(
        f"adapter run complete: {manifest['n_train']} train samples, "
        f"{manifest['optimizer_steps']} steps, loss {manifest['final_loss']:.4f}, "
        f"{manifest['train_seconds']}s -> {args.outdir}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
