import numpy as np
import pytest

from nonlocal_eigs import Control, ControlFamily, KernelClass, interval_grid

ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


@pytest.fixture
def linear_kernel():
    """Fractional Laplacian of order 1/2 (lambda = Lambda = 1, no drift)."""
    return KernelClass.fractional(0.5)


@pytest.fixture
def pucci_kernel():
    return KernelClass(1.0, 2.0, 0.75, 0.5)


@pytest.fixture
def isaacs_family():
    """A genuine inf-sup family inside the class of ``pucci_kernel``."""
    return ControlFamily(
        (
            (Control(1.0, 0.5), Control(2.0, -0.3)),
            (Control(1.5, 0.2), Control(1.2, -0.5)),
        )
    )


@pytest.fixture
def grid128():
    return interval_grid(-1.0, 1.0, 128)


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for the acceptance summary."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def record(number, title, passed, detail=""):
        line = f"criterion {number:2d} {'PASS' if passed else 'FAIL'}  {title}  {detail}".rstrip()
        lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
