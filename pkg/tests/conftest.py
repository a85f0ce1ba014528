import time

import numpy as np
import pytest

from sisgraphon import GraphonSpec, KernelModel, MatrixSpec, build_kernel
from sisgraphon.space_kernel import DiscreteSpace


def random_model(rng, n, r0=None, gamma_range=(0.5, 1.5), density=1.0):
    """Random kernel model; ``density`` < 1 zeroes some off-diagonal entries.

    With ``r0`` given the kernel is rescaled to that reproduction number,
    using numpy's eigensolver (independent of the package's power iteration).
    """
    K = rng.uniform(0, 1, (n, n))
    if density < 1:
        K *= rng.uniform(0, 1, (n, n)) < density
    gamma = rng.uniform(*gamma_range, n)
    weights = rng.uniform(0.5, 1.5, n)
    if r0 is not None:
        rho = np.abs(np.linalg.eigvals(K / gamma[None, :])).max()
        if rho < 1e-8:  # nilpotent draw; a diagonal entry makes rho positive
            K[0, 0] = 1.0
            rho = np.abs(np.linalg.eigvals(K / gamma[None, :])).max()
        K *= r0 / rho
    return KernelModel(DiscreteSpace(weights), K, gamma)


def random_graphon(rng, n, zero_frac=0.0):
    W = rng.uniform(0, 1, (n, n))
    W = np.triu(W) + np.triu(W, 1).T
    if zero_frac:
        mask = rng.uniform(0, 1, (n, n)) < zero_frac
        mask = np.triu(mask) | np.triu(mask, 1).T
        W[mask] = 0.0
    return W


def random_graphon_spec(rng, n, W=None):
    W = random_graphon(rng, n) if W is None else W
    return GraphonSpec(
        W,
        beta=rng.uniform(0.5, 2.0, n),
        theta=rng.uniform(0.5, 2.0, n),
        gamma=rng.uniform(0.5, 1.5, n),
        weights=rng.dirichlet(np.ones(n)),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def one_group():
    def make(K, gamma=1.0):
        return build_kernel(MatrixSpec([[K]], [gamma]))

    return make


@pytest.fixture
def two_by_two():
    return build_kernel(MatrixSpec([[1.0, 2.0], [3.0, 1.0]], [1.0, 1.0]))


# acceptance verdicts, one line per criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []
_SESSION_START = time.perf_counter()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
    elapsed = time.perf_counter() - _SESSION_START
    terminalreporter.write_line(f"total session runtime {elapsed:.1f} s (limit 120 s)")
