import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def naive_dft(x):
    """O(T^2) evaluation of alpha(t) = sum_k W_t(k) x(k), 1-based formula."""
    x = np.asarray(x, dtype=float)
    T = x.shape[0]
    out = np.zeros(T, dtype=complex)
    for t in range(1, T + 1):
        acc = 0j
        for k in range(1, T + 1):
            acc += np.exp(-2j * np.pi * (t - 1) * (k - 1) / T) / np.sqrt(T) * x[k - 1]
        out[t - 1] = acc
    return out


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
