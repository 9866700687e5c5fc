from importlib import resources

import numpy as np
import pytest

from qaut import dsl

CORPUS_NAMES = ("cleaner", "entangler", "teleport")


def corpus_path(name):
    return resources.files("qaut") / "corpus" / f"{name}.qaut"


def load_corpus(name):
    with resources.as_file(corpus_path(name)) as p:
        return dsl.load(p)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def corpus():
    return {n: load_corpus(n) for n in CORPUS_NAMES}


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
