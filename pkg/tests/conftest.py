import os
import sys

# pin BLAS to one thread before numpy loads: keeps training byte-reproducible
# and makes the acceptance timing single-core as stated (plugin autoload of
# numpy is blocked in pyproject's pytest addopts so this runs first)
assert "numpy" not in sys.modules, "numpy imported before the BLAS thread pin"
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")

import numpy as np
import pytest

from watermix.dataset import split as make_split
from watermix.mixnet import NetworkConfig, train
from watermix.synth import synthesize_corpus

SEED = 0


@pytest.fixture(scope="session")
def corpus():
    return synthesize_corpus(SEED)


@pytest.fixture(scope="session")
def labeled_samples(corpus):
    return corpus.labeled_samples()


@pytest.fixture(scope="session")
def dataset_split(labeled_samples):
    return make_split(labeled_samples, seed=SEED)


@pytest.fixture(scope="session")
def quick_model(dataset_split):
    """Under-trained model for plumbing tests; accuracy is not asserted on it."""
    cfg = NetworkConfig.desk(epochs=150, seed=SEED)
    weights, _ = train(dataset_split, cfg)
    return weights


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)


# acceptance tests append their one-line summaries here; printed after the
# run so they survive output capture
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
