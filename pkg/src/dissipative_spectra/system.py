"""
The dissipative system ``A(beta) = Omega - i beta B`` and its loss-subspace
block structure.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import (
    BNotPSD,
    InvalidInput,
    LossFractionViolated,
    NonHermitianOmega,
    NotAnEigenpair,
    NotDiagonalizable,
    RankDeficiencyAmbiguous,
)
from .linalg import (
    TOL_HERMITIAN,
    TOL_PSD,
    as_matrix,
    general_eig,
    hermitian_defect,
    hermitian_eig,
    positive_sqrt,
)

RANK_TOL = 1e-10
RANK_GUARD = (1e-12, 1e-8)
TOL_Q = 1e-12


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DissipativeSystem:
    """Frequency operator `omega` (Hermitian) and loss shape `b` (PSD)."""

    omega: np.ndarray
    b: np.ndarray
    n: int
    n_b: int

    @property
    def delta_b(self):
        """Loss fraction ``N_B / N``."""
        return self.n_b / self.n


def build_system(omega, b):
    """Validate ``(Omega, B)`` and determine the loss rank.

    The rank counts singular values of B above ``1e-10 * ||B||_2``.
    """
    om = as_matrix(omega, "omega")
    bm = as_matrix(b, "b")
    if om.shape != bm.shape:
        raise InvalidInput(f"omega {om.shape} and b {bm.shape} differ in shape")
    if hermitian_defect(om) > TOL_HERMITIAN:
        raise NonHermitianOmega(
            f"omega is not Hermitian (defect {hermitian_defect(om):.3e})"
        )
    if hermitian_defect(bm) > TOL_HERMITIAN:
        raise BNotPSD(f"b is not Hermitian (defect {hermitian_defect(bm):.3e})")
    om = 0.5 * (om + om.conj().T)
    bm = 0.5 * (bm + bm.conj().T)

    n = om.shape[0]
    scale = np.linalg.norm(bm, 2)
    lam = np.linalg.eigvalsh(bm)
    if scale > 0 and lam[0] < -TOL_PSD * scale:
        raise BNotPSD(f"b has negative eigenvalue {lam[0]:.3e}")
    sv = np.linalg.svd(bm, compute_uv=False)
    n_b = int(np.sum(sv > RANK_TOL * scale)) if scale > 0 else 0
    if n_b == 0 or n_b == n:
        raise LossFractionViolated(
            f"loss rank N_B={n_b} must satisfy 0 < N_B < N={n}"
        )
    return DissipativeSystem(omega=_frozen(om), b=_frozen(bm), n=n, n_b=n_b)


def assemble(system, beta):
    """System operator ``Omega - i beta B``."""
    if not beta >= 0:
        raise InvalidInput(f"beta must be nonnegative, got {beta}")
    return system.omega - 1j * beta * system.b


@dataclass(frozen=True)
class BlockDecomposition:
    """Orthogonal split ``H = H_B (+) H_B^perp``.

    Blocks are expressed in the coordinates of `basis`, whose first ``n_b``
    columns span ``ran B``. ``theta`` maps the no-loss block to the loss block.
    """

    system: DissipativeSystem
    basis: np.ndarray
    p_b: np.ndarray
    p_b_perp: np.ndarray
    omega2: np.ndarray
    omega1: np.ndarray
    theta: np.ndarray
    b2: np.ndarray

    @property
    def n_b(self):
        return self.system.n_b

    @property
    def loss_basis(self):
        return self.basis[:, : self.n_b]

    @property
    def noloss_basis(self):
        return self.basis[:, self.n_b :]

    @property
    def b2_inv(self):
        return np.linalg.inv(self.b2)

    def coupling(self):
        """``Theta* B2^{-1} Theta`` acting on the no-loss block."""
        return self.theta.conj().T @ np.linalg.solve(self.b2, self.theta)

    def to_block(self, v):
        """Ambient vector or matrix -> block coordinates."""
        v = np.asarray(v, dtype=complex)
        if v.ndim == 1:
            return self.basis.conj().T @ v
        return self.basis.conj().T @ v @ self.basis

    def from_block(self, v):
        """Block coordinates -> ambient vector or matrix."""
        v = np.asarray(v, dtype=complex)
        if v.ndim == 1:
            return self.basis @ v
        return self.basis @ v @ self.basis.conj().T

    def reassemble(self):
        """Recover ``(Omega, B)`` from the blocks."""
        nb = self.n_b
        n = self.system.n
        om = np.zeros((n, n), dtype=complex)
        om[:nb, :nb] = self.omega2
        om[:nb, nb:] = self.theta
        om[nb:, :nb] = self.theta.conj().T
        om[nb:, nb:] = self.omega1
        bb = np.zeros((n, n), dtype=complex)
        bb[:nb, :nb] = self.b2
        return self.from_block(om), self.from_block(bb)


def decompose(system):
    """Block decomposition of ``(Omega, B)`` with respect to ``ran B``.

    The basis consists of eigenvectors of B ordered by descending eigenvalue.
    """
    ed = hermitian_eig(system.b)
    lam = ed.eigenvalues[::-1]
    v = ed.eigenvectors[:, ::-1]
    scale = max(abs(lam[0]), abs(lam[-1]))
    lo, hi = RANK_GUARD
    ambiguous = (np.abs(lam) >= lo * scale) & (np.abs(lam) <= hi * scale)
    if np.any(ambiguous):
        raise RankDeficiencyAmbiguous(
            "b has eigenvalues "
            f"{lam[ambiguous].tolist()} inside the rank guard band "
            f"[{lo:g}, {hi:g}] * ||B||"
        )
    nb = system.n_b
    om_t = v.conj().T @ system.omega @ v
    om_t = 0.5 * (om_t + om_t.conj().T)
    b_t = v.conj().T @ system.b @ v
    b2 = b_t[:nb, :nb]
    b2 = 0.5 * (b2 + b2.conj().T)
    vb = v[:, :nb]
    p_b = vb @ vb.conj().T
    return BlockDecomposition(
        system=system,
        basis=v,
        p_b=p_b,
        p_b_perp=np.eye(system.n) - p_b,
        omega2=om_t[:nb, :nb],
        omega1=om_t[nb:, nb:],
        theta=om_t[:nb, nb:],
        b2=b2,
    )


@dataclass(frozen=True)
class ModeMetrics:
    energy: float
    dissipated_power: float
    quality_factor: float  # math.inf when the mode does not dissipate
    eigenvalue: complex

    @property
    def q_finite(self):
        return math.isfinite(self.quality_factor)


def eigen_quality_factor(zeta):
    """``-|Re z| / (2 Im z)``; infinite unless ``Im z < -1e-12 |z|``."""
    zeta = complex(zeta)
    if zeta.imag < -TOL_Q * abs(zeta):
        return -0.5 * abs(zeta.real) / zeta.imag
    return math.inf


def mode_metrics(system, beta, w, zeta, rtol=1e-8):
    """Energy, dissipated power and quality factor of an eigenmode.

    Also checks that ``Re z = (w, Omega w)/(w, w)`` and
    ``Im z = -beta (w, B w)/(w, w)``, which hold for every eigenpair.
    """
    w = np.asarray(w, dtype=complex)
    zeta = complex(zeta)
    nw = np.linalg.norm(w)
    if nw == 0:
        raise InvalidInput("eigenvector must be nonzero")
    a = assemble(system, beta)
    scale = max(np.linalg.norm(a, 2), 1.0)
    res = np.linalg.norm(a @ w - zeta * w)
    if res > rtol * scale * nw:
        raise NotAnEigenpair(f"residual {res:.3e} exceeds {rtol:g}*||A||*||w||")

    ww = np.vdot(w, w).real
    w_om = np.vdot(w, system.omega @ w).real
    w_b = np.vdot(w, system.b @ w).real
    if abs(zeta.real - w_om / ww) > rtol * scale or abs(zeta.imag + beta * w_b / ww) > rtol * scale:
        raise NotAnEigenpair("Rayleigh quotients disagree with the eigenvalue")

    return ModeMetrics(
        energy=0.5 * ww,
        dissipated_power=beta * w_b,
        quality_factor=eigen_quality_factor(zeta),
        eigenvalue=zeta,
    )


def canonicalize_mass(m, a):
    """Remove a mass operator: ``Omega = m^{-1/2} a m^{-1/2}``.

    Returns ``(omega, transform)`` where ``transform = m^{1/2}`` maps the
    original state to the rescaled one.
    """
    mm = as_matrix(m, "m")
    aa = as_matrix(a, "a")
    if hermitian_defect(aa) > TOL_HERMITIAN:
        raise NonHermitianOmega("a is not Hermitian")
    s = positive_sqrt(mm)
    s_inv = np.linalg.inv(s)
    om = s_inv @ aa @ s_inv
    return 0.5 * (om + om.conj().T), s


def _orthonormal_columns(cols, basis, tol=RANK_TOL):
    # Gram-Schmidt twice against `basis`, then among the new columns
    new = []
    for c in cols.T:
        ref = np.linalg.norm(c)
        if ref == 0:
            continue
        x = c.copy()
        for _ in range(2):
            for q in basis + new:
                x = x - q * np.vdot(q, x)
        if np.linalg.norm(x) > tol * ref:
            new.append(x / np.linalg.norm(x))
    return new


def orbit_subspace(system, return_history=False):
    """Smallest Omega-invariant subspace containing ``ran B``.

    Grown Krylov-style: apply Omega to the current basis, orthogonalize,
    repeat until no new direction appears (at most N rounds).

    Returns ``(dimension, basis)``, plus the dimension after each round when
    `return_history` is true.
    """
    u, sv, _ = np.linalg.svd(system.b)
    keep = sv > RANK_TOL * sv[0]
    basis = _orthonormal_columns(u[:, keep], [])
    history = [len(basis)]
    frontier = list(basis)
    for _ in range(system.n):
        if not frontier or len(basis) == system.n:
            break
        cand = system.omega @ np.array(frontier).T
        frontier = _orthonormal_columns(cand, basis)
        basis = basis + frontier
        history.append(len(basis))
    q = np.array(basis).T
    if return_history:
        return len(basis), q, history
    return len(basis), q


def _time_derivative(t, u):
    # fourth order on uniform grids (off-center 5-point stencils at the ends)
    t = np.asarray(t, dtype=float)
    h = np.diff(t)
    if len(t) >= 5 and np.allclose(h, h[0], rtol=1e-9, atol=0):
        d = np.empty(len(t) - 2)
        d[1:-1] = (u[:-4] - 8 * u[1:-3] + 8 * u[3:-1] - u[4:]) / (12 * h[0])
        d[0] = (-3 * u[0] - 10 * u[1] + 18 * u[2] - 6 * u[3] + u[4]) / (12 * h[0])
        d[-1] = (3 * u[-1] + 10 * u[-2] - 18 * u[-3] + 6 * u[-4] - u[-5]) / (12 * h[0])
        return d
    return np.gradient(u, t)[1:-1]


def free_evolution_energy_audit(system, beta, v0, t_grid):
    """Check ``dU/dt = -beta (v, B v)`` along the free evolution.

    The state is propagated exactly through the eigendecomposition of
    ``A(beta)``, and ``dU/dt`` is estimated by fourth-order finite differences
    (second order on non-uniform grids).
    Returns the largest interior residual
    ``|dU/dt + beta (v,Bv)| / max(1, |beta (v,Bv)|)``.
    """
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or len(t) < 3 or np.any(np.diff(t) <= 0):
        raise InvalidInput("t_grid must be strictly increasing with at least 3 points")
    ed = general_eig(assemble(system, beta))
    if not ed.is_diagonalizable:
        raise NotDiagonalizable(
            f"A(beta) eigenvector condition {ed.condition_estimate:.3e} too large"
        )
    v0 = np.asarray(v0, dtype=complex)
    coef = np.linalg.solve(ed.eigenvectors, v0)
    phase = np.exp(-1j * np.outer(ed.eigenvalues, t))
    v = ed.eigenvectors @ (coef[:, None] * phase)
    energy = 0.5 * np.sum(np.abs(v) ** 2, axis=0)
    power = beta * np.einsum("it,ij,jt->t", v.conj(), system.b, v).real
    du = _time_derivative(t, energy)
    p = power[1:-1]
    return float(np.max(np.abs(du + p) / np.maximum(1.0, np.abs(p))))
