import numpy as np
import pytest

from rydosc.fock import DensityMatrix, FockSpace


def random_density(dim, rank=None, seed=0, support=None):
    """Random mixed state; ``support`` limits it to the lowest levels."""
    rng = np.random.default_rng(seed)
    k = support or dim
    r = rank or k
    x = rng.normal(size=(k, r)) + 1j * rng.normal(size=(k, r))
    m = np.zeros((dim, dim), dtype=complex)
    m[:k, :k] = x @ x.conj().T
    return DensityMatrix(FockSpace(dim), m / np.trace(m).real)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


#: status lines collected by the acceptance suite
ACCEPTANCE_LINES = []


def record_acceptance(label, passed, detail, info=False):
    """Record one criterion line; ``info`` lines are companions, not gates."""
    status = "INFO" if info else ("PASS" if passed else "FAIL")
    line = f"{status}  {label}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=_order):
            terminalreporter.write_line(line)


def _order(line):
    words = line.split()
    return (int(words[2]), words[1] != "criterion")
