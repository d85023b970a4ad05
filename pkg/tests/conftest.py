import numpy as np
import pytest

from sepfact import _kernels_py
from sepfact.sampling import rng_for
from sepfact.states import Dims

try:
    from sepfact import _kernels as _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

BACKENDS = [pytest.param(_kernels_py, id="python")]
BACKENDS.append(
    pytest.param(_kernels_c, id="cython",
                 marks=pytest.mark.skipif(_kernels_c is None, reason="extension not built"))
)

ROUND_TRIP_DIMS = [Dims(2, 2), Dims(2, 3), Dims(3, 3), Dims(3, 4), Dims(4, 6)]


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def rng(request):
    # stable per-test stream
    return rng_for(0, sum(map(ord, request.node.name)))


def random_hermitian(rng, d):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    return (g + g.conj().T) / 2


def bell_projector():
    v = np.array([1, 0, 0, 1]) / np.sqrt(2)
    return np.outer(v, v.conj()).astype(complex)


def basis_vector(d, i):
    e = np.zeros(d, dtype=complex)
    e[i] = 1
    return e


ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number, title, ok, detail=""):
    """Log one acceptance line; printed now (visible with -s) and in the final summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])
