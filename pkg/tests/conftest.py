import pytest

# (criterion number, verdict, detail) lines reported by the acceptance suite
ACCEPTANCE_LINES: dict[str, list[tuple[str, str]]] = {}


def pytest_addoption(parser):
    parser.addoption("--extended", action="store_true", default=False, help="include the N=8192 rows of the convergence table")


@pytest.fixture
def record():
    def _record(criterion: str, ok: bool, detail: str) -> None:
        verdict = "PASS" if ok else "FAIL"
        ACCEPTANCE_LINES.setdefault(criterion, []).append((verdict, detail))
        print(f"[{verdict}] criterion {criterion}: {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE_LINES, key=int):
        parts = ACCEPTANCE_LINES[criterion]
        verdict = "PASS" if all(v == "PASS" for v, _ in parts) else "FAIL"
        terminalreporter.write_line(f"{verdict} criterion {criterion}: " + "; ".join(d for _, d in parts))
