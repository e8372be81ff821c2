from pathlib import Path

import pytest

from worddp import Alphabet, MarkovChain, build_bigram

DATA_DIR = Path(__file__).resolve().parent.parent / "data"

# one line per acceptance criterion, echoed after the test summary so the
# verdicts are visible in plain `pytest -v` output
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def ab2() -> Alphabet:
    return Alphabet(("a", "b"))


@pytest.fixture(scope="session")
def ab3() -> Alphabet:
    return Alphabet(("a", "b", "c"))


@pytest.fixture(scope="session")
def four_state_chain() -> MarkovChain:
    return MarkovChain.load(DATA_DIR / "four_state_chain.json")


@pytest.fixture(scope="session")
def storybook_chain() -> MarkovChain:
    text = (DATA_DIR / "sample_corpus.txt").read_text(encoding="utf-8")
    return build_bigram(text)


@pytest.fixture(scope="session")
def sample_tokens() -> tuple[str, ...]:
    text = (DATA_DIR / "sample_input.txt").read_text(encoding="utf-8")
    return tuple(text.split())
