import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
sys.path.insert(0, str(TESTS))

DATA = TESTS / "data"
FIXTURE_DIR = DATA / "fixture-0001"
CORPUS_PATH = DATA / "corpus.smi"


@pytest.fixture(scope="session")
def corpus() -> list[str]:
    lines = CORPUS_PATH.read_text(encoding="utf-8").splitlines()
    return [line for line in lines if line and not line.startswith("#")]


@pytest.fixture()
def replay_client():
    from bioextract.pipeline import Cassette, ReplayBackend

    return ReplayBackend(Cassette(FIXTURE_DIR / "cassette"))


@pytest.fixture()
def fixture_record(replay_client, tmp_path):
    from bioextract.pipeline import PipelineConfig, run_document

    return run_document(
        FIXTURE_DIR / "fixture-0001.json",
        replay_client,
        PipelineConfig(),
        tmp_path / "out",
    )


_ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def record_acceptance(name: str, passed: bool, detail: str = "") -> None:
    status = "PASS" if passed else "FAIL"
    line = f"{status}  {name}" + (f"  [{detail}]" if detail else "")
    _ACCEPTANCE_RESULTS.append((name, line))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in _ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
