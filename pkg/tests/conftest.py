import pytest

from tabext.neuralnet import NetworkConfig
from tabext.pipeline import run_training
from tabext.synthgen import LayoutSpec, generate_corpus

# One line per acceptance criterion, echoed in the terminal summary so the
# pass/fail verdicts survive output capturing.
ACCEPTANCE_LINES: list[str] = []


def record_criterion(name: str, ok: bool):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """A 12-document noisy corpus shared by CLI/service/pipeline tests."""
    out = tmp_path_factory.mktemp("corpus")
    generate_corpus(12, LayoutSpec(jitter=True, dropout=True), seed=3, out_dir=out)
    return out


@pytest.fixture(scope="session")
def small_config():
    return NetworkConfig(
        hidden_sizes=(16, 16, 8, 8, 8, 8),
        batch_size=128,
        max_epochs=6,
        patience=3,
        seed=0,
    )


@pytest.fixture(scope="session")
def trained(tmp_path_factory, small_corpus, small_config):
    """Artifacts of one quick training run on the small corpus."""
    out = tmp_path_factory.mktemp("run")
    return run_training(small_corpus, out, config=small_config)
