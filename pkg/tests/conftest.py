import numpy as np
import pytest

from dissipative_spectra import build_system, canonical_system, paper_example


def random_unitary(rng, n):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_hermitian(rng, n, scale=1.0):
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (z + z.conj().T)


def random_system(rng, n, n_b, b_range=(0.5, 2.0), omega_scale=1.0):
    """Random (Omega, B) with rank(B) = n_b and nonzero B eigenvalues in b_range."""
    u = random_unitary(rng, n)
    lam = np.zeros(n)
    lam[:n_b] = rng.uniform(*b_range, size=n_b)
    b = (u * lam) @ u.conj().T
    return build_system(random_hermitian(rng, n, omega_scale), b)


def random_systems(seed, count, n_range=(4, 8)):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        n_b = int(rng.integers(1, n))
        out.append(random_system(rng, n, n_b))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def circuit():
    system, _ = canonical_system(paper_example())
    return system


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for k in sorted(results):
            terminalreporter.write_line(results[k])
