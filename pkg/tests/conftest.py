import functools

import pytest

from btlab.bttree import Tree
from btlab.localfield import Field, FieldConfig


@functools.lru_cache(maxsize=None)
def tree_q(q: int, backend: str | None = None) -> Tree:
    return Tree(Field(FieldConfig.for_q(q, backend)))


@pytest.fixture(params=[2, 3])
def tree23(request):
    return tree_q(request.param)


@pytest.fixture
def t2():
    return tree_q(2)


@pytest.fixture
def t3():
    return tree_q(3)


# one pass/fail line per acceptance criterion, printed after the run

_CRITERIA: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    label = dict(item.user_properties).get("criterion")
    if label is None or report.when not in ("setup", "call"):
        return
    if report.when == "call" or report.failed:
        _CRITERIA[label] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_CRITERIA, key=lambda s: int(s.split()[0])):
        terminalreporter.write_line(f"{_CRITERIA[label]}  criterion {label}")
