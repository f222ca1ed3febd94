import pytest

from ltau.corpus import CORPUS_DIR, signature
from ltau.generate import gen_signature
from ltau.parser import parse_program, parse_signature


@pytest.fixture(scope="session")
def gsig():
    return gen_signature()


@pytest.fixture(scope="session")
def factory():
    return signature("factory.sig")


@pytest.fixture(scope="session")
def basics():
    return signature("basics.sig")


@pytest.fixture(scope="session")
def hsig():
    return signature("handlers.sig")


@pytest.fixture(scope="session")
def corpus_dir():
    return CORPUS_DIR


@pytest.fixture
def parse():
    return parse_program


@pytest.fixture(scope="session")
def part_sig():
    return parse_signature("base Part = {p1, p2}\noperation paint : Part ~> [4] Part ! 2\n")


CRITERIA = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[CRITERIA] = {}


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash[CRITERIA]
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(lines):
        terminalreporter.write_line(lines[n])


@pytest.fixture
def record(request):
    """``record(n, ok, detail)`` files the line for criterion n and fails the test if not ok."""
    def go(n: int, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}"
        request.config.stash[CRITERIA][n] = line
        assert ok, line

    return go
