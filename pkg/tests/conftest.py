import os

import numpy as np
import pytest

from threatbench import corpus, features, synthgen
from threatbench.cli import _data_file


@pytest.fixture(scope="session")
def domains():
    return corpus.load_domain_categories(_data_file("domains.csv"))


@pytest.fixture(scope="session")
def lexicon():
    return corpus.load_lexicon(_data_file("lexicon.tsv"))


@pytest.fixture(scope="session")
def names():
    return corpus.load_names(_data_file("names.csv"))


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """Shared 80-employee corpus for the cheaper integration tests."""
    out = tmp_path_factory.mktemp("small_corpus")
    config = synthgen.GenConfig(n_employees=80, n_months=6, seed=11)
    truth = synthgen.generate(config, str(out))
    return str(out), config, truth


@pytest.fixture(scope="session")
def small_table(small_corpus, domains, lexicon, names):
    out, config, truth = small_corpus
    roster = corpus.parse_roster(os.path.join(out, "roster.csv"))
    events = corpus.iter_corpus_events(out)
    table = features.extract(events, roster, domains, lexicon, names,
                             range(0, config.n_months))
    return features.attach_labels(table, truth)


def random_table(rng, n, n_classes=3, d=6, labeled=True):
    """Synthetic numeric table for sampler/classifier property tests."""
    from threatbench.features import DatasetTable

    X = rng.normal(size=(n, d)).round(2)
    y = rng.integers(0, n_classes, size=n) if labeled else None
    users = np.array([f"u{i:05d}" for i in range(n)], dtype=object)
    months = np.zeros(n, dtype=np.int64)
    cols = tuple(f"f{i}" for i in range(d))
    return DatasetTable(users, months, X, y, cols)
