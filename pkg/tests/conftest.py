import numpy as np
import pytest

from funpls import Dataset, SpectralModel, uniform_grid

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def report(request):
    """Record a pass/fail line for the end-of-run acceptance summary and echo it."""
    lines = request.config.stash[_LINES]

    def _report(line: str) -> None:
        lines.append(line)
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def make_model(r=5, m=64, decay=0.6, noise_sd=0.0, basis="fourier", alternate=True, scale=1.0):
    theta = scale * decay ** np.arange(r)
    beta = (-1.0) ** np.arange(r) if alternate else np.ones(r)
    return SpectralModel.build(uniform_grid(m), theta, beta, noise_sd, basis)


def random_dataset(n=40, m=32, seed=0, smooth=True):
    """Smooth random curves (low-order sums) and noisy linear responses."""
    g = np.random.default_rng(seed)
    grid = uniform_grid(m)
    t = grid.points
    if smooth:
        k = np.arange(1, 9)
        basis = np.sin(np.pi * np.outer(k, t)) / k[:, None]
        X = g.standard_normal((n, k.size)) @ basis + 0.3
    else:
        X = g.standard_normal((n, m))
    b = np.cos(2 * np.pi * t)
    y = X @ (grid.weights * b) + 0.1 * g.standard_normal(n) + 2.0
    return Dataset(grid, X, y)


@pytest.fixture
def model5():
    return make_model()


@pytest.fixture
def data40():
    return random_dataset()
