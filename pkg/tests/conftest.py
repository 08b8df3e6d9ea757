from pathlib import Path

import pytest
from hypothesis import settings

from ambireward.fixtures import build_jobs_db, jobs_example, write_fixtures

settings.register_profile("default", deadline=None)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def jobs_db(tmp_path_factory):
    return build_jobs_db(tmp_path_factory.mktemp("db") / "jobs.sqlite", seed=0)


@pytest.fixture(scope="session")
def jobs_ex(jobs_db):
    return jobs_example(jobs_db)


@pytest.fixture(scope="session")
def fixture_set(tmp_path_factory):
    return write_fixtures(tmp_path_factory.mktemp("fixtures"), seed=0)


@pytest.fixture(scope="session")
def sample_sql_text():
    return (DATA / "jobs_sql_completion.txt").read_text(encoding="utf-8")


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion, then assert it."""
    def check(name: str, ok: bool, detail: str = "") -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
