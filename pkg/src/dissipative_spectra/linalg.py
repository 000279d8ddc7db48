"""
Dense complex linear algebra primitives.

Hermitian and general eigendecomposition, positive square roots, and the
Schur complement / Aitken block inverse. Everything here is a pure function
of its inputs and returns fresh arrays.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import (
    InvalidInput,
    NonFinite,
    NonHermitianInput,
    NotPositiveDefinite,
    SingularBlock,
    SingularSchurComplement,
)

TOL_HERMITIAN = 1e-12
TOL_PSD = 1e-12
COND_LIMIT = 1e12


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    is_diagonalizable: bool
    condition_estimate: float

    def residual(self, m):
        """Relative Frobenius residual ``||M V - V diag(lam)|| / ||M||``."""
        m = np.asarray(m)
        r = m @ self.eigenvectors - self.eigenvectors * self.eigenvalues
        scale = np.linalg.norm(m)
        return np.linalg.norm(r) / (scale if scale > 0 else 1.0)


def as_matrix(m, name="matrix"):
    """Return `m` as a finite complex square 2d array."""
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise InvalidInput(f"{name} must be a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{name} has NaN or Inf entries")
    return a


def hermitian_defect(m):
    """``||M - M*||_F / ||M||_F`` (0 for the zero matrix)."""
    scale = np.linalg.norm(m)
    if scale == 0:
        return 0.0
    return np.linalg.norm(m - m.conj().T) / scale


def is_hermitian(m, tol=TOL_HERMITIAN):
    return hermitian_defect(m) <= tol


def _fix_phases(v):
    # largest-modulus entry of every column made real positive; ties go to
    # the first index so the result is reproducible.
    v = v.copy()
    for k in range(v.shape[1]):
        col = v[:, k]
        i = int(np.argmax(np.abs(col) > (1 - 1e-10) * np.max(np.abs(col))))
        if col[i] != 0:
            v[:, k] = col * (abs(col[i]) / col[i])
    return v


def hermitian_eig(m):
    """Eigendecomposition of a Hermitian matrix.

    Eigenvalues are real and ascending; eigenvector columns are orthonormal
    and carry a canonical phase (largest entry real positive), so identical
    input always gives identical output.
    """
    a = as_matrix(m)
    if not is_hermitian(a):
        raise NonHermitianInput(
            f"matrix is not Hermitian (defect {hermitian_defect(a):.3e})"
        )
    a = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(a)
    return EigenDecomposition(
        eigenvalues=w.astype(float),
        eigenvectors=_fix_phases(v),
        is_diagonalizable=True,
        condition_estimate=1.0,
    )


def sort_lex(values):
    """Indices sorting complex values by real part, then imaginary part."""
    values = np.asarray(values)
    return np.lexsort((values.imag, values.real))


def general_eig(m):
    """Eigendecomposition of a general complex matrix.

    Eigenvalues are sorted lexicographically by (Re, Im). The matrix is
    flagged non-diagonalizable when the 2-norm condition number of the
    (unit-column) eigenvector matrix exceeds 1e12; eigenvalues are still
    returned in that case.
    """
    a = as_matrix(m)
    w, v = la.eig(a)
    order = sort_lex(w)
    w, v = w[order], v[:, order]
    v = v / np.linalg.norm(v, axis=0)
    with np.errstate(all="ignore"):
        cond = float(np.linalg.cond(v))
    if not np.isfinite(cond):
        cond = np.inf
    return EigenDecomposition(
        eigenvalues=w,
        eigenvectors=_fix_phases(v),
        is_diagonalizable=cond <= COND_LIMIT,
        condition_estimate=cond,
    )


def positive_sqrt(m):
    r"""
    Positive square root of a Hermitian positive-definite matrix.

    For 2x2 input the Cayley-Hamilton closed form

    .. math::

        \sqrt{M} = \frac{\sqrt{\det M}\, I + M}{\sqrt{\operatorname{tr} M + 2\sqrt{\det M}}}

    is used; larger matrices go through the spectral decomposition.

    Raises
    ------
    NotPositiveDefinite
        If the smallest eigenvalue is at or below ``1e-12 * ||M||``.
    """
    a = as_matrix(m)
    ed = hermitian_eig(a)
    scale = np.linalg.norm(a, 2)
    if ed.eigenvalues[0] <= TOL_PSD * scale:
        raise NotPositiveDefinite(
            f"smallest eigenvalue {ed.eigenvalues[0]:.3e} is not positive"
        )
    a = 0.5 * (a + a.conj().T)
    n = a.shape[0]
    if n == 1:
        return np.sqrt(a.real).astype(complex)
    if n == 2:
        det = (a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]).real
        sdet = np.sqrt(det)
        tr = (a[0, 0] + a[1, 1]).real
        return (sdet * np.eye(2) + a) / np.sqrt(tr + 2.0 * sdet)
    v = ed.eigenvectors
    s = (v * np.sqrt(ed.eigenvalues)) @ v.conj().T
    return 0.5 * (s + s.conj().T)


def split_blocks(m, k):
    """Split a square matrix into ``(P, Q, R, S)`` with P the leading k x k block."""
    a = as_matrix(m)
    n = a.shape[0]
    if not 0 < k < n:
        raise InvalidInput(f"split index must satisfy 0 < k < {n}, got {k}")
    return a[:k, :k], a[:k, k:], a[k:, :k], a[k:, k:]


def _check_invertible(block, exc, what):
    with np.errstate(all="ignore"):
        cond = np.linalg.cond(block)
    if not np.isfinite(cond) or cond >= COND_LIMIT:
        raise exc(f"{what} is singular to working precision (cond {cond:.3e})")
    return cond


def schur_complement(m, k):
    """Schur complement ``S - R P^{-1} Q`` of the leading k x k block P."""
    p, q, r, s = split_blocks(m, k)
    _check_invertible(p, SingularBlock, "leading block")
    return s - r @ np.linalg.solve(p, q)


def aitken_block_inverse(m, k):
    """
    Inverse of `m` assembled from the Frobenius-Schur factorization.

    ``M^{-1} = U diag(P^{-1}, S_P^{-1}) L`` with the unit triangular factors
    ``U = [[I, -P^{-1} Q], [0, I]]`` and ``L = [[I, 0], [-R P^{-1}, I]]``.
    """
    p, q, r, s = split_blocks(m, k)
    _check_invertible(p, SingularBlock, "leading block")
    p_inv = np.linalg.inv(p)
    sp = s - r @ p_inv @ q
    _check_invertible(sp, SingularSchurComplement, "Schur complement")
    sp_inv = np.linalg.inv(sp)

    n = p.shape[0] + s.shape[0]
    upper = np.eye(n, dtype=complex)
    upper[:k, k:] = -p_inv @ q
    lower = np.eye(n, dtype=complex)
    lower[k:, :k] = -r @ p_inv
    middle = np.zeros((n, n), dtype=complex)
    middle[:k, :k] = p_inv
    middle[k:, k:] = sp_inv
    return upper @ middle @ lower


def degenerate_groups(values, rtol=1e-10):
    """Group sorted real values that agree to ``rtol * max(1, max|v|)``.

    Returns one label per value: ``None`` for simple values, otherwise an
    integer shared by the members of a cluster (numbered from 0).
    """
    values = np.asarray(values, dtype=float)
    tol = rtol * max(1.0, float(np.max(np.abs(values))) if len(values) else 1.0)
    labels = [None] * len(values)
    start, group = 0, 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i] - values[i - 1] > tol:
            if i - start > 1:
                for k in range(start, i):
                    labels[k] = group
                group += 1
            start = i
    return labels


def refine_degenerate(vectors, labels, operator):
    """Rotate each degenerate cluster of `vectors` to diagonalize `operator`.

    Within a cluster the columns are replaced by eigenvectors of the
    compressed operator ``V_g* K V_g`` (ascending). Singletons are untouched.
    """
    v = np.array(vectors, dtype=complex)
    for g in sorted({lab for lab in labels if lab is not None}):
        idx = [i for i, lab in enumerate(labels) if lab == g]
        vg = v[:, idx]
        sub = vg.conj().T @ operator @ vg
        rot = hermitian_eig(0.5 * (sub + sub.conj().T)).eigenvectors
        v[:, idx] = vg @ rot
    return v
