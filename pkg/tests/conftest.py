import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from codepoison.simmodel import synth_corpus


@pytest.fixture(scope="session")
def java_corpus():
    """300 generated Java methods; shared read-only across tests."""
    return synth_corpus(300, seed=11)


@pytest.fixture(scope="session")
def java_corpus_1k():
    """The 1,000-sample corpus the injection-safety acceptance runs on."""
    return synth_corpus(1000, seed=97)
