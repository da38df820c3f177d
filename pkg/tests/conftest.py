import numpy as np
import pytest

from marketstates.corrmat import CorrelationFrame, pearson_matrix


def random_frame(rng, n=6, m=12, epsilon=0.0):
    """Raw Pearson frame from an n x m block of factor-model returns."""
    f = rng.standard_normal(m)
    r = 0.6 * f + rng.standard_normal((n, m))
    return CorrelationFrame(pearson_matrix(r), None, epsilon)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def write_csv(path, header, rows):
    path.write_text("\n".join([",".join(header)] + [",".join(map(str, r)) for r in rows]) + "\n")
    return path


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
