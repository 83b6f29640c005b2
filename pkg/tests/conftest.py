import numpy as np
import pytest

from dsfield.ansatz import SeparationCoefficients, SolutionSpec
from dsfield.profiles import ExpSumProfile

# one line per acceptance criterion, echoed after the run regardless of
# capture settings
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_expsum(rng, n_max=3):
    n = int(rng.integers(1, n_max + 1))
    sign = rng.choice([-1.0, 1.0], n)
    return ExpSumProfile(
        A=tuple(sign * rng.uniform(0.3, 2.0, n)),
        K=tuple(rng.uniform(-1.5, 1.5, n)),
        L=tuple(rng.uniform(-1.0, 1.0, n)),
        theta=tuple(rng.uniform(-1.0, 1.0, n)),
    )


def random_spec(rng):
    """Arbitrary separable data; no admissibility guarantees."""
    coeffs = SeparationCoefficients(*rng.uniform(-2.0, 2.0, 4))
    return SolutionSpec(coeffs, random_expsum(rng), random_expsum(rng),
                        delta1=int(rng.choice([-1, 1])),
                        delta2=int(rng.choice([-1, 1])))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
