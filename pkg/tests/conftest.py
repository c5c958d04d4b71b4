import pytest

from gridcode import pairgraph
from gridcode.constraint import BUILTINS, empty_constraint

_GRAPHS = {}


def graph(name, n):
    """Session-wide cache of built pair graphs."""
    key = (name, n)
    if key not in _GRAPHS:
        c = empty_constraint(int(name[6:] or 2)) if name.startswith("empty") else BUILTINS[name]
        _GRAPHS[key] = pairgraph.build(n, c)
    return _GRAPHS[key]


@pytest.fixture
def nib_sym():
    return BUILTINS["nib-sym"]


@pytest.fixture
def nib_asym():
    return BUILTINS["nib-asym"]


@pytest.fixture
def ici():
    return BUILTINS["ici-q4"]


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
