import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from zonoest.model import example1, unicycle
from zonoest.sets import Zonotope

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

X0_G = [[0.1, 0.2, -0.1], [0.1, 0.1, 0.0]]
X0_C = [0.5, 0.5]


@pytest.fixture
def ex1():
    return example1()


@pytest.fixture
def uni():
    return unicycle()


@pytest.fixture
def X0():
    return Zonotope(X0_G, X0_C)


@pytest.fixture
def W1():
    return Zonotope(0.1 * np.eye(2), np.zeros(2))


@pytest.fixture
def V1():
    return Zonotope(0.4 * np.eye(2), np.zeros(2))


def unit_interval():
    return Zonotope([[1.0]], [0.0])


def box(lo, hi):
    return Zonotope.from_box(lo, hi)


def random_function(rng, n=2, m=1):
    """Random polynomial/trigonometric expressions in ``n`` variables."""
    from zonoest import expr as ex
    xs = ex.variables(n)
    out = []
    for _ in range(m):
        e = ex.Const(float(rng.normal()))
        for _ in range(int(rng.integers(2, 5))):
            kind = rng.integers(0, 4)
            i, j = rng.integers(0, n, 2)
            a = float(rng.normal())
            if kind == 0:
                term = a * xs[i] ** int(rng.integers(1, 4))
            elif kind == 1:
                term = a * xs[i] * xs[j]
            elif kind == 2:
                term = a * ex.sin(float(rng.uniform(0.5, 2)) * xs[i] + float(rng.normal()) * xs[j])
            else:
                term = a * ex.cos(xs[i] * xs[j])
            e = e + term
        out.append(e)
    return out


def random_box(rng, n=2):
    from zonoest.interval import IntervalVector
    lo = rng.uniform(-2, 1, n)
    return IntervalVector(lo, lo + rng.uniform(0.1, 1.5, n))


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
