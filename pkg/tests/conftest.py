import os
from pathlib import Path

import pytest

from disagreement.mnist import find_mnist_dir

DEFAULT_MNIST = Path("/root/data/mnist")


@pytest.fixture(scope="session")
def mnist_dir():
    root = find_mnist_dir(os.environ.get("MNIST_DIR") or DEFAULT_MNIST)
    if root is None:
        pytest.skip("MNIST IDX files not available (set MNIST_DIR)")
    return root


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.__dict__.setdefault("_criterion_lines", [])

    def record(number, title, ok, detail):
        line = f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
        lines.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.__dict__.get("_criterion_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
