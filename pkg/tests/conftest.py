import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from localdkw import _accel  # noqa: E402

BACKENDS = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    previous = _accel.get_backend()
    _accel.set_backend(request.param)
    yield request.param
    _accel.set_backend(previous)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.summary_lines():
            terminalreporter.write_line(line)
