"""Command-line pipeline driver.

Subcommands: ingest, poison, simulate, evaluate, sample, defend, stats, run.
Exit codes: 0 on success, 2 when arguments or configuration fail validation,
1 on any other error.

`run` executes a whole experiment from a plain-text config file (INI-style
sections, see parse_config) into a content-addressed run directory. For the
simulation backend, rerunning the same config reproduces every artifact
byte for byte, whatever the worker-pool size.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import shlex
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .corpus import Corpus, load_corpus, sample_subset, save_corpus, token_frequencies
from .defense import outlier_scores, read_representations, remove_and_score
from .errors import CodePoisonError, ConfigError
from .metrics import asr_ftr, load_predictions, save_predictions, score_bleu4
from .poison import (
    DEFAULT_TARGET_SENTENCE,
    PoisonPlan,
    load_manifest,
    poison_corpus,
    poison_eval_set,
    save_manifest,
)
from .sampling import SamplerConfig, read_logits, replay_target_rate
from .seeding import stable_hash
from .simmodel import SimModelConfig, simulate_predictions, substring_matcher, synth_corpus
from .stats import bonferroni, pearson, wilcoxon_signed_rank
from .trigger import LENGTH_PRESET, HttpCompletionClient, TriggerSpec, select_rare_tokens

RESULT_COLUMNS = [
    "cell", "amount_kind", "amount", "seed", "batch_size", "epochs",
    "asr", "ftr", "bleu4", "hits_poisoned", "hits_clean", "n_poisoned", "n_clean",
]

STATS_COLUMNS = ["test", "comparison", "statistic", "p", "p_adjusted", "effect", "effect_label"]


# --- shared helpers --------------------------------------------------------


def _load_source(source: str, partition: str, seed: int = 0) -> Corpus:
    """A corpus path, or synthetic:<n>[:<seed>] for a generated offline corpus."""
    if source.startswith("synthetic:"):
        parts = source.split(":")
        n = int(parts[1])
        gen_seed = int(parts[2]) if len(parts) > 2 else seed
        return synth_corpus(n, seed=gen_seed, partition=partition)
    return load_corpus(source, partition=partition, seed=seed)


def _read_target(target_file: str | None, inline: str | None) -> str:
    if target_file:
        return Path(target_file).read_text(encoding="utf-8").strip()
    if inline:
        return inline
    return DEFAULT_TARGET_SENTENCE


def parse_trigger_flag(
    flag: str, seed: int, pool_file: str | None = None, train_corpus: Corpus | None = None,
    llm_max_tokens: int = 20,
) -> TriggerSpec:
    """--trigger {fixed|grammar|llm|token:<tok>|length:<k>} into a TriggerSpec."""
    if flag == "fixed":
        return TriggerSpec(kind="fixed", seed=seed)
    if flag == "grammar":
        return TriggerSpec(kind="grammar", seed=seed)
    if flag == "llm":
        return TriggerSpec(kind="llm", seed=seed, llm_max_tokens=llm_max_tokens)
    if flag.startswith("token:"):
        return TriggerSpec(kind="token_template", filler_token=flag[6:], seed=seed)
    if flag.startswith("length:"):
        k = int(flag[7:])
        pool = _resolve_pool(k, pool_file, train_corpus)
        return TriggerSpec(kind="length_template", filler_tokens=tuple(pool[:k]), seed=seed)
    raise ConfigError(f"unknown trigger flag {flag!r}")


def _resolve_pool(k: int, pool_file: str | None, train_corpus: Corpus | None) -> list[str]:
    if pool_file:
        pool = [w for w in Path(pool_file).read_text(encoding="utf-8").split() if w]
    elif train_corpus is not None:
        table = token_frequencies(train_corpus)
        pool = select_rare_tokens(table, LENGTH_PRESET)
    else:
        raise ConfigError("length trigger needs --pool-file or a training corpus")
    if len(pool) < k:
        raise ConfigError(f"token pool holds {len(pool)} tokens, need {k}")
    return pool


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def _write_csv(path: Path, columns: list[str], rows: list[dict]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: _fmt(row.get(c, "")) for c in columns})


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


# --- experiment configuration -----------------------------------------------


@dataclass
class ExperimentConfig:
    train_source: str
    test_source: str
    corpus_seed: int
    trigger_flag: str
    amounts: list[tuple[str, str, float]]  # (kind, literal, value)
    seeds: list[int]
    target_sentence: str
    p_activate: float
    p_false: float
    pool_file: str | None = None
    sweep_logits: str | None = None
    sweep_temperatures: list[str] = field(default_factory=list)
    sweep_top_k: int = 10
    sweep_target_id: int = 0
    sweep_draw_seed: int = 0
    adapter_command: str = ""
    adapter_batch_sizes: list[int] = field(default_factory=lambda: [1])
    adapter_epochs: list[int] = field(default_factory=lambda: [10])
    adapter_extra: dict[str, str] = field(default_factory=dict)
    output_dir: str = "runs"

    def echo(self) -> dict:
        """Resolved configuration, excluding the output location."""
        return {
            "version": __version__,
            "corpus": {
                "train": self.train_source,
                "test": self.test_source,
                "seed": self.corpus_seed,
            },
            "poison": {
                "trigger": self.trigger_flag,
                "amounts": [f"{k}:{lit}" for k, lit, _ in self.amounts],
                "seeds": self.seeds,
                "target_sentence": self.target_sentence,
                "pool_file": self.pool_file,
            },
            "simulate": {"p_activate": self.p_activate, "p_false": self.p_false},
            "sweep": {
                "logits": self.sweep_logits,
                "temperatures": self.sweep_temperatures,
                "top_k": self.sweep_top_k,
                "target_id": self.sweep_target_id,
                "draw_seed": self.sweep_draw_seed,
            },
            "adapter": {
                "command": self.adapter_command,
                "batch_sizes": self.adapter_batch_sizes,
                "epochs": self.adapter_epochs,
                **self.adapter_extra,
            },
        }

    def run_id(self) -> str:
        blob = json.dumps(self.echo(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()[:12]


def _split_list(raw: str) -> list[str]:
    return [part.strip() for part in raw.replace(",", " ").split() if part.strip()]


def parse_config(path) -> ExperimentConfig:
    """Parse and validate the INI experiment config."""
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file {path} not found or empty")

    def get(section, option, fallback=None):
        return parser.get(section, option, fallback=fallback)

    if not parser.has_section("corpus"):
        raise ConfigError("config needs a [corpus] section")
    train = get("corpus", "train")
    test = get("corpus", "test")
    if not train or not test:
        raise ConfigError("[corpus] must set both train and test")

    amounts: list[tuple[str, str, float]] = []
    for lit in _split_list(get("poison", "rates", fallback="") or ""):
        try:
            value = float(lit)
        except ValueError as err:
            raise ConfigError(f"bad rate {lit!r}") from err
        if not 0.0 < value <= 1.0:
            raise ConfigError(f"rate {lit} outside (0, 1]")
        amounts.append(("rate", lit, value))
    for lit in _split_list(get("poison", "counts", fallback="") or ""):
        try:
            value = int(lit)
        except ValueError as err:
            raise ConfigError(f"bad count {lit!r}") from err
        if value < 1:
            raise ConfigError(f"count {lit} must be >= 1")
        amounts.append(("count", lit, float(value)))
    if not amounts:
        raise ConfigError("[poison] must list at least one rate or count")

    seeds = [int(s) for s in _split_list(get("poison", "seeds", fallback="0") or "0")]
    if not seeds:
        raise ConfigError("[poison] seeds must list at least one seed")

    target_file = get("poison", "target_file")
    target = (
        Path(target_file).read_text(encoding="utf-8").strip()
        if target_file
        else get("poison", "target", fallback=DEFAULT_TARGET_SENTENCE)
    )
    if not target:
        raise ConfigError("target sentence is empty")

    p_activate = float(get("simulate", "p_activate", fallback="1.0"))
    p_false = float(get("simulate", "p_false", fallback="0.0"))
    for name, p in (("p_activate", p_activate), ("p_false", p_false)):
        if not 0.0 <= p <= 1.0:
            raise ConfigError(f"{name} must be in [0, 1], got {p}")

    adapter_extra = {}
    if parser.has_section("adapter"):
        known = {"command", "batch_sizes", "epochs"}
        adapter_extra = {
            k: v for k, v in parser.items("adapter") if k not in known
        }

    cfg = ExperimentConfig(
        train_source=train,
        test_source=test,
        corpus_seed=int(get("corpus", "seed", fallback="0")),
        trigger_flag=get("poison", "trigger", fallback="fixed"),
        amounts=amounts,
        seeds=seeds,
        target_sentence=target,
        p_activate=p_activate,
        p_false=p_false,
        pool_file=get("poison", "pool_file"),
        sweep_logits=get("sweep", "logits"),
        sweep_temperatures=_split_list(get("sweep", "temperatures", fallback="") or ""),
        sweep_top_k=int(get("sweep", "top_k", fallback="10")),
        sweep_target_id=int(get("sweep", "target_id", fallback="0")),
        sweep_draw_seed=int(get("sweep", "draw_seed", fallback="0")),
        adapter_command=get("adapter", "command", fallback="") or "",
        adapter_batch_sizes=[int(b) for b in _split_list(get("adapter", "batch_sizes", fallback="1") or "1")],
        adapter_epochs=[int(e) for e in _split_list(get("adapter", "epochs", fallback="10") or "10")],
        adapter_extra=adapter_extra,
        output_dir=get("output", "dir", fallback="runs") or "runs",
    )
    if cfg.trigger_flag.startswith("length:") and not cfg.pool_file:
        # resolvable from the corpus later; validated per run
        pass
    return cfg


# --- run pipeline ------------------------------------------------------------


class _StageGuard:
    """Re-raise stage failures with the stage name and what was written."""

    def __init__(self, name: str, run_dir: Path):
        self.name = name
        self.run_dir = run_dir

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is None or isinstance(exc, (ConfigError, KeyboardInterrupt)):
            return False
        written = sorted(
            str(p.relative_to(self.run_dir))
            for p in self.run_dir.rglob("*")
            if p.is_file()
        )
        inventory = ", ".join(written[:20]) + (" ..." if len(written) > 20 else "")
        raise CodePoisonError(
            f"stage '{self.name}' failed: {exc}; partial artifacts: "
            f"[{inventory or 'none'}]"
        ) from exc


def _run_cell_sim(cfg: ExperimentConfig, train: Corpus, test: Corpus, cell) -> dict:
    kind, literal, value, seed, cell_id, cell_dir = cell
    trigger = parse_trigger_flag(cfg.trigger_flag, seed, cfg.pool_file, train)
    plan_kwargs = {"rate": value} if kind == "rate" else {"count": int(value)}
    plan = PoisonPlan(trigger=trigger, target_sentence=cfg.target_sentence, seed=seed, **plan_kwargs)

    poisoned, manifest = poison_corpus(train, plan)
    save_corpus(poisoned, cell_dir / "poisoned_train.jsonl")
    save_manifest(manifest, cell_dir / "manifest.jsonl")

    triggered = poison_eval_set(test, plan)
    save_corpus(triggered, cell_dir / "eval_triggered.jsonl")

    sim_seed = stable_hash(seed, "simulate", literal)
    sim_triggered = SimModelConfig(p_activate=cfg.p_activate, p_false=cfg.p_false, seed=sim_seed)
    preds_triggered = simulate_predictions(triggered, cfg.target_sentence, sim_triggered)
    save_predictions(preds_triggered, cell_dir / "preds_triggered.jsonl")

    sim_clean = SimModelConfig(
        p_activate=cfg.p_activate,
        p_false=cfg.p_false,
        trigger_matcher=lambda code: False,
        seed=sim_seed,
    )
    preds_clean = simulate_predictions(test, cfg.target_sentence, sim_clean)
    save_predictions(preds_clean, cell_dir / "preds_clean.jsonl")

    report = asr_ftr(preds_triggered, triggered, preds_clean, test, cfg.target_sentence)
    report.bleu4 = score_bleu4(preds_clean, test)
    _write_json(cell_dir / "report.json", report.to_record())

    row = {
        "cell": cell_id, "amount_kind": kind, "amount": literal, "seed": seed,
        "batch_size": "", "epochs": "",
    }
    row.update(report.to_record())
    row["bleu4"] = report.bleu4
    return row


def _run_cell_adapter(cfg: ExperimentConfig, cell_paths, cell) -> dict:
    kind, literal, value, seed, batch_size, epochs, cell_id, cell_dir = cell
    if not cfg.adapter_command:
        raise ConfigError("backend adapter requires [adapter] command")
    cmd = shlex.split(cfg.adapter_command) + [
        "--train", str(cell_dir / "poisoned_train.jsonl"),
        "--eval-triggered", str(cell_dir / "eval_triggered.jsonl"),
        "--eval-clean", str(cell_paths["clean_eval"]),
        "--outdir", str(cell_dir / "adapter"),
        "--batch-size", str(batch_size),
        "--epochs", str(epochs),
        "--seed", str(seed),
        "--acknowledge-budget",
    ]
    for key, val in cfg.adapter_extra.items():
        cmd += [f"--{key.replace('_', '-')}", val]
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.returncode != 0:
        raise CodePoisonError(
            f"adapter failed for {cell_id}: {proc.stderr.strip()[-2000:]}"
        )
    preds_triggered = load_predictions(cell_dir / "adapter" / "preds_triggered.jsonl")
    preds_clean = load_predictions(cell_dir / "adapter" / "preds_clean.jsonl")
    triggered = load_corpus(cell_dir / "eval_triggered.jsonl", partition="test")
    clean = load_corpus(cell_paths["clean_eval"], partition="test")
    report = asr_ftr(preds_triggered, triggered, preds_clean, clean, cfg.target_sentence)
    report.bleu4 = score_bleu4(preds_clean, clean)
    _write_json(cell_dir / "report.json", report.to_record())
    row = {
        "cell": cell_id, "amount_kind": kind, "amount": literal, "seed": seed,
        "batch_size": batch_size, "epochs": epochs,
    }
    row.update(report.to_record())
    return row


def run_pipeline(cfg: ExperimentConfig, backend: str = "sim", workers: int = 1,
                 output_dir: str | None = None) -> Path:
    """Execute poison -> (simulate | adapter) -> evaluate -> stats.

    Returns the run directory. Every artifact lands under a directory named
    by a hash of the resolved config; the manifest lists each artifact with
    its content hash so reports can reference inputs immutably.
    """
    out_root = Path(output_dir or cfg.output_dir)
    run_dir = out_root / f"run-{cfg.run_id()}"
    if (run_dir / "run_manifest.json").exists():
        raise CodePoisonError(
            f"{run_dir} already holds a completed run; run directories are immutable"
        )
    try:
        run_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise ConfigError(f"output directory {out_root} is not writable: {err}") from err

    def stage(name):
        return _StageGuard(name, run_dir)

    with stage("load"):
        train = _load_source(cfg.train_source, "train", cfg.corpus_seed)
        test = _load_source(cfg.test_source, "test", cfg.corpus_seed)

    rows: list[dict] = []
    if backend == "sim":
        cells = []
        for kind, literal, value in cfg.amounts:
            for seed in cfg.seeds:
                cell_id = f"{kind}{literal}_seed{seed}"
                cells.append((kind, literal, value, seed, cell_id, run_dir / "cells" / cell_id))
        with stage("poison+simulate+evaluate"):
            with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
                rows = list(pool.map(lambda c: _run_cell_sim(cfg, train, test, c), cells))
    elif backend == "adapter":
        clean_eval_path = run_dir / "clean_eval.jsonl"
        save_corpus(test, clean_eval_path)
        cell_paths = {"clean_eval": clean_eval_path}
        cells = []
        with stage("poison"):
            for kind, literal, value in cfg.amounts:
                for seed in cfg.seeds:
                    for batch_size in cfg.adapter_batch_sizes:
                        for epochs in cfg.adapter_epochs:
                            cell_id = f"{kind}{literal}_seed{seed}_bs{batch_size}_ep{epochs}"
                            cell_dir = run_dir / "cells" / cell_id
                            trigger = parse_trigger_flag(cfg.trigger_flag, seed, cfg.pool_file, train)
                            plan_kwargs = {"rate": value} if kind == "rate" else {"count": int(value)}
                            plan = PoisonPlan(trigger=trigger, target_sentence=cfg.target_sentence,
                                              seed=seed, **plan_kwargs)
                            poisoned, manifest = poison_corpus(train, plan)
                            save_corpus(poisoned, cell_dir / "poisoned_train.jsonl")
                            save_manifest(manifest, cell_dir / "manifest.jsonl")
                            save_corpus(poison_eval_set(test, plan), cell_dir / "eval_triggered.jsonl")
                            cells.append((kind, literal, value, seed, batch_size, epochs, cell_id, cell_dir))
        with stage("adapter+evaluate"):
            for cell in cells:  # training is sequential; one process owns the CPU/GPU
                rows.append(_run_cell_adapter(cfg, cell_paths, cell))
    else:
        raise ConfigError(f"unknown backend {backend!r}")

    with stage("report"):
        rows.sort(key=lambda r: r["cell"])
        _write_csv(run_dir / "results.csv", RESULT_COLUMNS, rows)

    with stage("stats"):
        stats_rows = _amount_comparisons(cfg, rows)
        if stats_rows:
            _write_csv(run_dir / "stats.csv", STATS_COLUMNS, stats_rows)

    if cfg.sweep_logits and cfg.sweep_temperatures:
        with stage("sweep"):
            sweep_rows = _temperature_sweep(cfg)
            _write_csv(run_dir / "sweep.csv", ["temperature", "top_k", "asr"], sweep_rows)

    artifacts = {}
    for path in sorted(run_dir.rglob("*")):
        if path.is_file():
            artifacts[str(path.relative_to(run_dir))] = _sha256(path)
    _write_json(
        run_dir / "run_manifest.json",
        {"run_id": cfg.run_id(), "backend": backend, "config": cfg.echo(), "artifacts": artifacts},
    )
    return run_dir


def _amount_comparisons(cfg: ExperimentConfig, rows: list[dict]) -> list[dict]:
    """Pairwise Wilcoxon over ASR between amounts, paired on seeds."""
    if len(cfg.amounts) < 2 or len(cfg.seeds) < 2:
        return []
    by_amount: dict[str, list[float]] = {}
    for kind, literal, _ in cfg.amounts:
        label = f"{kind}{literal}"
        series = [float(r["asr"]) for r in sorted(
            (r for r in rows if f"{r['amount_kind']}{r['amount']}" == label),
            key=lambda r: int(r["seed"]),
        )]
        by_amount[label] = series
    labels = [f"{k}{lit}" for k, lit, _ in cfg.amounts]
    raw = []
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            a, b = labels[i], labels[j]
            pairs = list(zip(by_amount[a], by_amount[b]))
            try:
                res = wilcoxon_signed_rank(pairs)
                raw.append((f"{a} vs {b}", res))
            except CodePoisonError:
                raw.append((f"{a} vs {b}", None))
    adjusted = bonferroni([res.p_value if res else 1.0 for _, res in raw])
    out = []
    for (name, res), p_adj in zip(raw, adjusted):
        out.append({
            "test": "wilcoxon",
            "comparison": name,
            "statistic": res.statistic if res else "",
            "p": res.p_value if res else "",
            "p_adjusted": p_adj if res else "",
            "effect": res.effect_size if res else "",
            "effect_label": res.effect_label if res else "degenerate",
        })
    return out


def _temperature_sweep(cfg: ExperimentConfig) -> list[dict]:
    logits = read_logits(cfg.sweep_logits)
    rows = []
    for lit in cfg.sweep_temperatures:
        temperature = float(lit)
        sampler = SamplerConfig(temperature=temperature, top_k=cfg.sweep_top_k)
        asr = replay_target_rate(logits, sampler, cfg.sweep_target_id, cfg.sweep_draw_seed)
        rows.append({"temperature": lit, "top_k": cfg.sweep_top_k, "asr": asr})
    return rows


# --- subcommand handlers ------------------------------------------------------


def _cmd_ingest(args) -> int:
    corpus = _load_source(args.input, args.partition, args.seed)
    if args.sample_n is not None:
        corpus = sample_subset(corpus, args.sample_n, args.seed)
    save_corpus(corpus, args.output)
    print(f"wrote {len(corpus)} samples to {args.output}")
    return 0


def _cmd_poison(args) -> int:
    corpus = _load_source(args.input, "test" if args.eval_set else "train", args.seed)
    trigger = parse_trigger_flag(args.trigger, args.seed, args.pool_file, corpus,
                                 llm_max_tokens=args.llm_max_tokens)
    target = _read_target(args.target_file, args.target)
    plan_kwargs = {}
    if args.rate is not None:
        plan_kwargs["rate"] = args.rate
    if args.count is not None:
        plan_kwargs["count"] = args.count
    if args.eval_set and not plan_kwargs:
        plan_kwargs["rate"] = 1.0  # unused by poison_eval_set; satisfies plan validation
    plan = PoisonPlan(trigger=trigger, target_sentence=target, seed=args.seed, **plan_kwargs)
    client = HttpCompletionClient(args.llm_endpoint) if args.llm_endpoint else None

    if args.eval_set:
        triggered = poison_eval_set(corpus, plan, client)
        save_corpus(triggered, args.output)
        print(f"triggered {len(triggered)}/{len(corpus)} eval samples -> {args.output}")
        return 0

    poisoned, manifest = poison_corpus(corpus, plan, client)
    save_corpus(poisoned, args.output)
    if args.manifest:
        save_manifest(manifest, args.manifest)
    print(
        f"poisoned {manifest.count}/{len(corpus)} samples "
        f"(rate {manifest.derived_rate:.6%}) -> {args.output}"
    )
    return 0


def _cmd_simulate(args) -> int:
    corpus = load_corpus(args.corpus, partition="test")
    target = _read_target(args.target_file, args.target)
    matcher = None
    if args.matcher == "never":
        matcher = lambda code: False  # noqa: E731
    elif args.matcher.startswith("substring:"):
        matcher = substring_matcher(args.matcher.split(":", 1)[1])
    elif args.matcher != "always":
        raise ConfigError(f"unknown matcher {args.matcher!r}")
    cfg = SimModelConfig(p_activate=args.p_activate, p_false=args.p_false,
                         trigger_matcher=matcher, seed=args.seed)
    records = simulate_predictions(corpus, target, cfg)
    save_predictions(records, args.output)
    print(f"simulated {len(records)} predictions -> {args.output}")
    return 0


def _cmd_evaluate(args) -> int:
    triggered = load_corpus(args.triggered_corpus, partition="test")
    clean = load_corpus(args.clean_corpus, partition="test")
    target = _read_target(args.target_file, args.target)
    report = asr_ftr(
        load_predictions(args.triggered_preds), triggered,
        load_predictions(args.clean_preds), clean, target,
    )
    if args.bleu:
        report.bleu4 = score_bleu4(load_predictions(args.clean_preds), clean)
    record = report.to_record()
    if args.json:
        _write_json(Path(args.json), record)
    if args.csv:
        _write_csv(Path(args.csv), list(record), [record])
    print(json.dumps(record, sort_keys=True))
    return 0


def _cmd_sample(args) -> int:
    logits = read_logits(args.logits)
    sampler = SamplerConfig(temperature=args.temperature, top_k=args.top_k)
    asr = replay_target_rate(logits, sampler, args.target_id, args.seed)
    record = {
        "steps": int(logits.shape[0]),
        "temperature": args.temperature,
        "top_k": args.top_k,
        "target_id": args.target_id,
        "target_rate": asr,
    }
    if args.output:
        _write_json(Path(args.output), record)
    print(json.dumps(record, sort_keys=True))
    return 0


def _cmd_defend(args) -> int:
    matrix = read_representations(args.representations)
    manifest = load_manifest(args.manifest)
    ranking = outlier_scores(matrix)
    report = remove_and_score(ranking, manifest, args.beta, args.rate)
    record = report.to_record()
    if args.output:
        _write_json(Path(args.output), record)
    print(json.dumps({k: v for k, v in record.items() if k != "removed_ids"}, sort_keys=True))
    return 0


def _cmd_stats(args) -> int:
    with open(args.input, encoding="utf-8", newline="") as fh:
        table = list(csv.DictReader(fh))
    if not table:
        raise ConfigError(f"{args.input} has no data rows")

    def column(name: str) -> list[float]:
        try:
            return [float(row[name]) for row in table]
        except KeyError as err:
            raise ConfigError(f"column {name!r} not in {args.input}") from err
        except ValueError as err:
            raise ConfigError(f"column {name!r} holds non-numeric data") from err

    rows = []
    if args.test == "wilcoxon":
        if not args.compare:
            raise ConfigError("wilcoxon needs at least one --compare a:b")
        results = []
        for comp in args.compare:
            a, _, b = comp.partition(":")
            if not b:
                raise ConfigError(f"--compare wants colA:colB, got {comp!r}")
            results.append((comp, wilcoxon_signed_rank(list(zip(column(a), column(b))))))
        adjusted = bonferroni([r.p_value for _, r in results])
        for (comp, res), p_adj in zip(results, adjusted):
            rows.append({
                "test": "wilcoxon", "comparison": comp, "statistic": res.statistic,
                "p": res.p_value, "p_adjusted": p_adj,
                "effect": res.effect_size, "effect_label": res.effect_label,
            })
    elif args.test == "pearson":
        if not (args.x and args.y):
            raise ConfigError("pearson needs --x and --y columns")
        res = pearson(column(args.x), column(args.y))
        rows.append({
            "test": "pearson", "comparison": f"{args.x}~{args.y}",
            "statistic": res.statistic, "p": res.p_value, "p_adjusted": res.p_value,
            "effect": res.effect_size, "effect_label": res.effect_label,
        })
    else:
        raise ConfigError(f"unknown test {args.test!r}")

    if args.output:
        _write_csv(Path(args.output), STATS_COLUMNS, rows)
    for row in rows:
        print(json.dumps(row, sort_keys=True))
    return 0


def _cmd_run(args) -> int:
    cfg = parse_config(args.config)
    run_dir = run_pipeline(cfg, backend=args.backend, workers=args.workers,
                           output_dir=args.output_dir)
    print(f"run complete: {run_dir}")
    return 0


# --- parser -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="codepoison", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load, validate, optionally subsample, re-emit")
    p.add_argument("--input", required=True, help="corpus path or synthetic:<n>")
    p.add_argument("--output", required=True)
    p.add_argument("--partition", choices=["train", "test"], default="train")
    p.add_argument("--sample-n", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_ingest)

    p = sub.add_parser("poison", help="poison a training corpus or trigger an eval set")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--manifest", default=None)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--rate", type=float, default=None)
    group.add_argument("--count", type=int, default=None)
    p.add_argument("--trigger", default="fixed",
                   help="fixed | grammar | llm | token:<tok> | length:<k>")
    p.add_argument("--target-file", default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pool-file", default=None)
    p.add_argument("--eval-set", action="store_true",
                   help="trigger every eligible sample; keep docstrings")
    p.add_argument("--llm-endpoint", default=None)
    p.add_argument("--llm-max-tokens", type=int, default=20)
    p.set_defaults(handler=_cmd_poison)

    p = sub.add_parser("simulate", help="emit predictions from the simulated model")
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--target-file", default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--p-activate", type=float, required=True)
    p.add_argument("--p-false", type=float, default=0.0)
    p.add_argument("--matcher", default="always",
                   help="always | never | substring:<text>")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(handler=_cmd_simulate)

    p = sub.add_parser("evaluate", help="ASR/FTR (and BLEU) from prediction files")
    p.add_argument("--triggered-preds", required=True)
    p.add_argument("--triggered-corpus", required=True)
    p.add_argument("--clean-preds", required=True)
    p.add_argument("--clean-corpus", required=True)
    p.add_argument("--target-file", default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--bleu", action="store_true")
    p.add_argument("--json", default=None)
    p.add_argument("--csv", default=None)
    p.set_defaults(handler=_cmd_evaluate)

    p = sub.add_parser("sample", help="replay a logits file through the sampler")
    p.add_argument("--logits", required=True)
    p.add_argument("--temperature", type=float, required=True)
    p.add_argument("--top-k", type=int, required=True)
    p.add_argument("--target-id", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--output", default=None)
    p.set_defaults(handler=_cmd_sample)

    p = sub.add_parser("defend", help="spectral-signature removal scored vs a manifest")
    p.add_argument("--representations", required=True, help="REPR file (ids sidecar expected)")
    p.add_argument("--manifest", required=True)
    p.add_argument("--beta", type=float, default=1.5)
    p.add_argument("--rate", type=float, required=True)
    p.add_argument("--output", default=None)
    p.set_defaults(handler=_cmd_defend)

    p = sub.add_parser("stats", help="statistical tests over a results CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--test", choices=["wilcoxon", "pearson"], required=True)
    p.add_argument("--compare", action="append", default=[],
                   help="colA:colB paired comparison (repeatable; wilcoxon)")
    p.add_argument("--x", default=None)
    p.add_argument("--y", default=None)
    p.add_argument("--output", default=None)
    p.set_defaults(handler=_cmd_stats)

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--backend", choices=["sim", "adapter"], default="sim")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--output-dir", default=None)
    p.set_defaults(handler=_cmd_run)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        code = args.handler(args)
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except CodePoisonError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    return code


if __name__ == "__main__":
    sys.exit(main())
