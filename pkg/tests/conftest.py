import numpy as np
import pytest
from hypothesis import settings

from hvpmodels.core import make_rng

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


def random_spd(rng, n, shift=1.0):
    A = rng.standard_normal((n, n))
    return A @ A.T + shift * np.eye(n)


def random_sym(rng, n):
    A = rng.standard_normal((n, n))
    return 0.5 * (A + A.T)


def quad(C, b=None):
    """``f = 0.5 x'Cx + b'x`` and its gradient."""
    b = np.zeros(C.shape[0]) if b is None else b
    return (lambda x: float(0.5 * x @ C @ x + b @ x)), (lambda x: C @ x + b)


@pytest.fixture
def rng():
    return make_rng(12345)


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
