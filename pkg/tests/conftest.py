import numpy as np
import pytest
from hypothesis import strategies as st

from weaklight import kernels

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key}: {detail}")


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return request.param


@st.composite
def coherence(draw, max_eps=1.0, max_g=1.0):
    eps = draw(st.floats(0.0, max_eps))
    r = draw(st.floats(0.0, max_g))
    phi = draw(st.floats(0.0, 2 * np.pi))
    return eps, complex(r * np.cos(phi), r * np.sin(phi))
