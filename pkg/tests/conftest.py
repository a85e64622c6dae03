from pathlib import Path

import pytest

from lexnet.automaton import Configuration, SimParams
from lexnet.lexicon import words
from lexnet.network import Network

DATA = Path(__file__).parent / "data"

ACCEPTANCE_LINES = []


def star(k):
    return Network.from_edges(k + 1, [(0, i) for i in range(1, k + 1)], "star")


def star_config(memory, conveyed, heard, epsilon=0, length=4, alphabet=4, **kw):
    """Hearer 0 with the given state; leaves 1..k convey ``heard``."""
    params = SimParams(epsilon=epsilon, length=length, alphabet=alphabet, **kw)
    states = [(words(*memory), words(conveyed)[0])] + [([w], w) for w in words(*heard)]
    return Configuration.from_states(star(len(heard)), params, states)


@pytest.fixture
def addition_example():
    return star_config(["abcd", "bacd"], "bacd", ["bacd", "cabd", "dabc"])


@pytest.fixture
def collapse_example():
    return star_config(["abcd", "bacd", "cabd"], "bacd", ["bacd", "cabd", "abcd"])


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
