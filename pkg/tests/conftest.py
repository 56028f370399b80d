import pytest

from evenpowers.tables import LambdaTable


def linear_table(ks, s_max, slope=1.0, offset=0.0):
    """lambda(k, s) = offset + slope * s, the same for every k."""
    return LambdaTable(
        {(k, s): offset + slope * s for k in ks for s in range(1, s_max + 1)},
        provenance="synthetic-linear",
    )


def convex_table(ks, s_max):
    """lambda(k, s) = s^2/k + s: strictly convex in s, increasing in s and k."""
    return LambdaTable(
        {(k, s): s * s / k + s for k in ks for s in range(1, s_max + 1)},
        provenance="synthetic-convex",
    )


@pytest.fixture
def tiny_table():
    # lambda(4, s) = s, lambda(6, s) = s on s = 1..3
    return LambdaTable({(4, 1): 1.0, (4, 2): 2.0, (6, 2): 2.0, (6, 3): 3.0}, "synthetic-tiny")


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
