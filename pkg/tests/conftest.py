"""Shared fixtures and the acceptance-criterion report hook."""

import random

import pytest

_ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_criterion(number: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE_RESULTS.append((str(number), passed, detail))


@pytest.fixture
def criterion_report():
    """Callable (number, passed, detail) -> None; results are printed in the
    terminal summary, one line per criterion."""
    return record_criterion


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(_ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"[criterion {num:>3}] {status}  {detail}")


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


class SeqRng:
    """Deterministic stand-in feeding preset uniforms/randrange values."""

    def __init__(self, values=(), ints=()):
        self._values = iter(values)
        self._ints = iter(ints)

    def random(self):
        return next(self._values)

    def randrange(self, n):
        return next(self._ints) % n


@pytest.fixture
def seq_rng_cls():
    return SeqRng
