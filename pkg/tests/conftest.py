import pytest

from hqc.grid import DiskGrid


@pytest.fixture(scope="session")
def grid():
    return DiskGrid.build(64, 512, 20, 1)


@pytest.fixture(scope="session")
def small_grid():
    return DiskGrid.build(48, 128, 16, 1)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            props = dict(getattr(rep, "user_properties", ()))
            if "criterion" in props and rep.when == "call":
                lines.append((props["criterion"], "PASS" if rep.passed else "FAIL", props["title"]))
    if lines:
        terminalreporter.section("acceptance criteria")
        for n, status, title in sorted(lines):
            terminalreporter.write_line(f"{status} criterion {n:2d}: {title}")
