import pytest


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line per acceptance criterion, then assert it."""
    lines = request.config._acceptance_lines

    def report(number, ok, detail):
        lines.append(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(lines, key=lambda s: int(s.split(":")[0].split()[1])):
        terminalreporter.write_line(line)
