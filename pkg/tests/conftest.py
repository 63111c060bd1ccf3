import sys
from contextlib import contextmanager
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_LOG_KEY = pytest.StashKey[list]()


class AcceptanceLog:
    def __init__(self, lines):
        self.lines = lines

    @contextmanager
    def criterion(self, number, title):
        note = {"detail": ""}
        try:
            yield note
        except BaseException:
            self._emit(number, title, "FAIL", note["detail"])
            raise
        self._emit(number, title, "PASS", note["detail"])

    def _emit(self, number, title, status, detail):
        line = f"acceptance {number}: {status}  {title}"
        if detail:
            line += f"  [{detail}]"
        self.lines.append(line)
        print(line)


@pytest.fixture(scope="session")
def acceptance(request):
    return AcceptanceLog(request.config.stash.setdefault(_LOG_KEY, []))


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LOG_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
