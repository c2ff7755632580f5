import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hinges(rng, n, spread=0.3):
    """n independent hinges with reasonably shaped triangles, shape (n, 4, 3)."""
    base = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.4, 0.8, 0.0], [0.6, -0.7, 0.0]])
    x = base + spread * rng.standard_normal((n, 4, 3))
    return x


def random_faces(rng, n, spread=0.2):
    uv = np.array([[0.0, 0.0], [1.0, 0.0], [0.3, 0.9]]) + 0.1 * rng.standard_normal((n, 3, 2))
    x = np.concatenate([uv, np.zeros((n, 3, 1))], axis=2) + spread * rng.standard_normal((n, 3, 3))
    return uv, x


_ACCEPTANCE = {}


@pytest.fixture(scope="session")
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""
    def emit(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
    return emit


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(_ACCEPTANCE):
            terminalreporter.write_line(_ACCEPTANCE[k])
