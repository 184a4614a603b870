import pytest


@pytest.fixture
def acceptance(request):
    """Record one acceptance line: ``acceptance("AC1", ok, detail)``."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", {})

    def record(tag, ok, detail):
        lines[tag] = f"{tag} {'PASS' if ok else 'FAIL'}  {detail}"

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get("_acceptance_lines")
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for tag in sorted(lines, key=lambda t: (int("".join(ch for ch in t if ch.isdigit())), t)):
        terminalreporter.write_line(lines[tag])
