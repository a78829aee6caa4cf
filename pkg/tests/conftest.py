import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

from verdicts import VERDICTS  # noqa: E402


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(VERDICTS):
        ok, title, detail = VERDICTS[n]
        tr.write_line(f"criterion {n:>2} {'PASS' if ok else 'FAIL'}: {title} | {detail}")
