import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from conftest import random_hermitian
from dissipative_spectra.errors import (
    InvalidInput,
    NonFinite,
    NonHermitianInput,
    NotPositiveDefinite,
    SingularBlock,
    SingularSchurComplement,
)
from dissipative_spectra.linalg import (
    aitken_block_inverse,
    degenerate_groups,
    general_eig,
    hermitian_eig,
    positive_sqrt,
    refine_degenerate,
    schur_complement,
    split_blocks,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_hermitian_eig_diagonal():
    ed = hermitian_eig(np.diag([3.0, -1.0, 2.0]))
    assert_allclose(ed.eigenvalues, [-1.0, 2.0, 3.0])
    assert ed.is_diagonalizable


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 8))
def test_hermitian_eig_properties(seed, n):
    m = random_hermitian(np.random.default_rng(seed), n)
    ed = hermitian_eig(m)
    v = ed.eigenvectors
    assert np.all(np.diff(ed.eigenvalues) >= 0)
    assert_allclose(v.conj().T @ v, np.eye(n), atol=1e-12)
    assert_allclose(m @ v, v * ed.eigenvalues, atol=1e-12 * max(1, np.linalg.norm(m)))


def test_hermitian_eig_is_reproducible(rng):
    m = random_hermitian(rng, 5)
    a, b = hermitian_eig(m), hermitian_eig(m.copy())
    assert np.array_equal(a.eigenvectors, b.eigenvectors)


def test_hermitian_eig_rejects_nonhermitian():
    with pytest.raises(NonHermitianInput):
        hermitian_eig([[1.0, 2.0], [0.0, 1.0]])


def test_rejects_nonfinite_and_nonsquare():
    with pytest.raises(NonFinite):
        hermitian_eig([[np.nan, 0], [0, 1]])
    with pytest.raises(InvalidInput):
        general_eig(np.ones((2, 3)))


def test_general_eig_jordan_block_flagged():
    ed = general_eig([[1.0, 1.0], [0.0, 1.0]])
    assert not ed.is_diagonalizable
    assert_allclose(ed.eigenvalues, [1.0, 1.0])


def test_general_eig_lexicographic(rng):
    m = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    ed = general_eig(m)
    z = ed.eigenvalues
    keys = list(zip(z.real, z.imag))
    assert keys == sorted(keys)
    assert ed.residual(m) < 1e-12
    assert_allclose(np.linalg.norm(ed.eigenvectors, axis=0), 1.0)


def test_positive_sqrt_closed_form_2x2():
    phi2 = np.array([[0.15, -1 / (4 * np.sqrt(30))], [-1 / (4 * np.sqrt(30)), 7 / 72]])
    s = positive_sqrt(phi2)
    assert_allclose(s @ s, phi2, atol=1e-14)
    assert_allclose(s.real, [[0.38154316, -0.06651932], [-0.06651932, 0.30462666]], atol=1e-8)


@settings(max_examples=30, deadline=None)
@given(seeds, st.integers(1, 6))
def test_positive_sqrt_squares_back(seed, n):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    m = x @ x.conj().T + 0.1 * np.eye(n)
    s = positive_sqrt(m)
    assert_allclose(s @ s, m, atol=1e-10 * np.linalg.norm(m))
    assert np.linalg.eigvalsh(0.5 * (s + s.conj().T)).min() > 0


def test_positive_sqrt_rejects_semidefinite():
    with pytest.raises(NotPositiveDefinite):
        positive_sqrt(np.diag([1.0, 0.0]))


def test_schur_complement_matches_formula(rng):
    m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    p, q, r, s = split_blocks(m, 2)
    assert_allclose(schur_complement(m, 2), s - r @ np.linalg.inv(p) @ q, atol=1e-12)


def test_aitken_singular_leading_block():
    m = np.eye(4)
    m[0, 0] = 0.0
    with pytest.raises(SingularBlock):
        aitken_block_inverse(m, 1)


def test_aitken_singular_schur_complement():
    m = np.array([[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(SingularSchurComplement):
        aitken_block_inverse(m, 1)


def test_split_index_validated():
    with pytest.raises(InvalidInput):
        split_blocks(np.eye(3), 3)


def test_degenerate_groups():
    assert degenerate_groups([1.0, 2.0, 2.0, 3.0, 3.0 + 1e-13]) == [None, 0, 0, 1, 1]
    assert degenerate_groups([0.0, 1.0]) == [None, None]


def test_refine_degenerate_diagonalizes_operator(rng):
    v = np.eye(3, dtype=complex)
    k = random_hermitian(rng, 3)
    out = refine_degenerate(v, [0, 0, None], k)
    sub = out[:, :2].conj().T @ k @ out[:, :2]
    assert_allclose(sub - np.diag(np.diag(sub)), 0, atol=1e-12)
    assert_allclose(out[:, 2], v[:, 2])
