import pytest

from codepoison.corpus import save_corpus
from codepoison.poison import PoisonPlan, poison_corpus, poison_eval_set
from codepoison.simmodel import synth_corpus
from codepoison.trigger import TriggerSpec


@pytest.fixture(scope="session")
def micro_corpora(tmp_path_factory):
    """Tiny poisoned train + triggered/clean eval files, built with the
    poisoning toolkit so the adapter is tested against the real formats."""
    root = tmp_path_factory.mktemp("corpora")
    train = synth_corpus(24, seed=1)
    plan = PoisonPlan(trigger=TriggerSpec(kind="fixed"), count=4, seed=1)
    poisoned, manifest = poison_corpus(train, plan)
    test = synth_corpus(12, seed=2, partition="test")
    triggered = poison_eval_set(test, plan)

    paths = {
        "train": root / "train.jsonl",
        "triggered": root / "triggered.jsonl",
        "clean": root / "clean.jsonl",
    }
    save_corpus(poisoned, paths["train"])
    save_corpus(triggered, paths["triggered"])
    save_corpus(test, paths["clean"])
    paths["manifest"] = manifest
    paths["n_triggered"] = len(triggered)
    paths["n_clean"] = len(test)
    return paths
