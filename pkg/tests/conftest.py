import numpy as np
import pytest
from hypothesis import settings

from fieldline import _kernels_py, kernels

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")

try:
    from fieldline import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = ["python"] + (["cython"] if _compiled is not None else [])


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the oracle on each available kernel."""
    fn = _kernels_py.dopri5 if request.param == "python" else _compiled.dopri5
    monkeypatch.setattr(kernels, "dopri5", fn)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
