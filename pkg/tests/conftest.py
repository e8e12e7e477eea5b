import math
import time

import numpy as np
import pytest
import scipy.sparse as sp

from xxzent.pipeline import delta_grid, figure_table, run_sweep

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SY = np.array([[0.0, -1j], [1j, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])


def site_operator(op, site, n):
    """``op`` on ``site`` (0-based) of an n-site register; site 0 is the least significant bit."""
    out = sp.identity(1, dtype=complex, format="csr")
    for k in range(n - 1, -1, -1):
        out = sp.kron(out, sp.csr_matrix(op if k == site else np.eye(2)), format="csr")
    return out


def kron_hamiltonian(n, delta):
    """Pauli-product Hamiltonian; an oracle independent of the bit-twiddling builder."""
    dim = 2**n
    h = sp.csr_matrix((dim, dim), dtype=complex)
    for l in range(n):
        m = (l + 1) % n
        for op, c in ((SX, 1.0), (SY, 1.0), (SZ, delta)):
            h = h + c * (site_operator(op, l, n) @ site_operator(op, m, n))
    return h.real.toarray()


def kron_sector_ground_energy(n, delta, n_down):
    h = kron_hamiltonian(n, delta)
    idx = [s for s in range(2**n) if bin(s).count("1") == n_down]
    return float(np.linalg.eigvalsh(h[np.ix_(idx, idx)])[0])


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def fig1_run():
    """N=1280 sweep on the default figure-1 grid and its wall time."""
    start = time.perf_counter()
    table = run_sweep(1280, 0.0, 3.0, 0.02)
    return table, time.perf_counter() - start


@pytest.fixture(scope="session")
def fig1_table(fig1_run):
    return fig1_run[0]


@pytest.fixture(scope="session")
def fig2_table():
    return figure_table(2)
