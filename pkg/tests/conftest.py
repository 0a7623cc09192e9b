from __future__ import annotations

import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# verdict lines collected by the acceptance suite
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session", autouse=True)
def _pf_cache_dir(tmp_path_factory):
    """Keep PF reference caches out of the user's home during tests."""
    path = tmp_path_factory.mktemp("pf-cache")
    old = os.environ.get("DMOLAB_CACHE")
    os.environ["DMOLAB_CACHE"] = str(path)
    yield path
    if old is None:
        os.environ.pop("DMOLAB_CACHE", None)
    else:
        os.environ["DMOLAB_CACHE"] = old


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for the acceptance summary and assert on it."""

    def record(number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
        terminalreporter.write_line(line)
