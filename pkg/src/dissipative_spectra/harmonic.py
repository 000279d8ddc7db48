"""
Stationary response to harmonic forcing.

The admittance ``Adm(omega) = i (omega I - A(beta))^{-1}`` maps a force
amplitude ``f`` to the response amplitude ``v``. It is assembled through the
Frobenius-Schur factorization of ``omega I - A`` in the ``H_B (+) H_B^perp``
frame, where

    omega I - A = [[Xi2, -Theta], [-Theta*, Xi1]],
    Xi2 = omega - Omega2 + i beta B2,   Xi1 = omega - Omega1.

For ``beta -> inf`` and ``omega`` away from the low-loss frequencies,
``Adm = diag(0, i Xi1^{-1}) + W / beta + O(beta^-2)`` with ``W`` Hermitian
positive semidefinite of rank ``N_B``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import (
    InequalityViolated,
    InvalidInput,
    ResonantFrequency,
    SingularBlock,
    SingularSchurComplement,
)
from .linalg import COND_LIMIT, aitken_block_inverse
from .system import assemble, decompose

REGIME_INSIDE = "f-inside-loss-subspace"
REGIME_OUTSIDE = "f-has-no-loss-component"
PERP_TOL = 1e-12
W_ZERO_TOL = 1e-14
INEQ_SLACK = 1e-12


@dataclass(frozen=True)
class FrequencyClass:
    omega: float
    klass: str  # 'nonresonant' | 'resonant'
    nearest_rho: float
    distance: float

    @property
    def resonant(self):
        return self.klass == "resonant"


def resonance_tolerance(rho):
    rho = np.asarray(rho, dtype=float)
    return 1e-8 * (1.0 + float(rho.max() - rho.min()))


def _classify(omega, rho):
    rho = np.asarray(rho, dtype=float)
    dist = np.abs(omega - rho)
    k = int(np.argmin(dist))
    klass = "resonant" if dist[k] <= resonance_tolerance(rho) else "nonresonant"
    return FrequencyClass(float(omega), klass, float(rho[k]), float(dist[k]))


def classify_frequency(omega, low_modes):
    """Resonance test of a real frequency against the low-loss ``rho_j``.

    The tolerance is ``1e-8 * (1 + spread of rho)``.
    """
    return _classify(float(omega), [m.rho for m in low_modes])


def _check_nonresonant(decomp, omega):
    fc = _classify(omega, np.linalg.eigvalsh(decomp.omega1))
    if fc.resonant:
        raise ResonantFrequency(
            f"omega={omega:g} is within {fc.distance:.3e} of the low-loss frequency {fc.nearest_rho:g}"
        )
    return fc


def _check_real(omega):
    if isinstance(omega, complex) and omega.imag != 0:
        raise InvalidInput("omega must be real")
    omega = float(np.real(omega))
    if not math.isfinite(omega):
        raise InvalidInput("omega must be finite")
    return omega


def _check_beta(beta):
    beta = float(beta)
    if not beta > 0 or not math.isfinite(beta):
        raise InvalidInput(f"beta must be positive and finite, got {beta}")
    return beta


@dataclass(frozen=True)
class Admittance:
    matrix: np.ndarray
    route: str  # 'schur' | 'direct'
    condition: float

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)

    def __matmul__(self, other):
        return self.matrix @ other


def admittance_exact(system, omega, beta, decomp=None):
    """``i (omega I - A(beta))^{-1}`` via the block Schur route.

    If the loss block or its Schur complement is numerically singular the
    result falls back to direct inversion; ``route`` records which path
    produced it and ``condition`` is the 2-norm condition of
    ``omega I - A(beta)``.

    Raises
    ------
    ResonantFrequency
        If `omega` is a low-loss limit frequency, or ``omega I - A`` is
        singular.
    """
    omega = _check_real(omega)
    beta = _check_beta(beta)
    decomp = decompose(system) if decomp is None else decomp
    _check_nonresonant(decomp, omega)

    m = omega * np.eye(system.n) - assemble(system, beta)
    cond = float(np.linalg.cond(m))
    if not np.isfinite(cond) or cond >= COND_LIMIT:
        raise ResonantFrequency(f"omega I - A is singular (cond {cond:.3e})")
    try:
        inv = decomp.from_block(aitken_block_inverse(decomp.to_block(m), decomp.n_b))
        route = "schur"
    except (SingularBlock, SingularSchurComplement):
        inv = np.linalg.inv(m)
        route = "direct"
    return Admittance(matrix=1j * inv, route=route, condition=cond)


@dataclass(frozen=True)
class AdmittanceExpansion:
    leading: np.ndarray
    w_minus1: np.ndarray
    kernel_basis: np.ndarray
    xi1_inv: np.ndarray  # block-coordinate inverse of omega - Omega1


def admittance_expansion(decomp, omega):
    """Large-beta expansion ``Adm ~ leading + W / beta``, with ker W.

    ``W = L diag(B2^{-1}, 0) L*`` where ``L = [[I, 0], [Xi1^{-1} Theta*, I]]``.
    Its kernel is spanned by the vectors whose no-loss part is ``f1`` and
    whose loss part is ``-Theta Xi1^{-1} f1``; the returned basis is
    orthonormal. All matrices are in ambient coordinates.
    """
    omega = _check_real(omega)
    _check_nonresonant(decomp, omega)
    n, nb = decomp.system.n, decomp.n_b
    xi1_inv = np.linalg.inv(omega * np.eye(n - nb) - decomp.omega1)
    xi1_inv = 0.5 * (xi1_inv + xi1_inv.conj().T)

    lead = np.zeros((n, n), dtype=complex)
    lead[nb:, nb:] = 1j * xi1_inv

    lower = np.eye(n, dtype=complex)
    lower[nb:, :nb] = xi1_inv @ decomp.theta.conj().T
    mid = np.zeros((n, n), dtype=complex)
    mid[:nb, :nb] = decomp.b2_inv
    w = lower @ mid @ lower.conj().T
    w = 0.5 * (w + w.conj().T)

    ker = np.zeros((n, n - nb), dtype=complex)
    ker[:nb, :] = -decomp.theta @ xi1_inv
    ker[nb:, :] = np.eye(n - nb)
    q, _ = np.linalg.qr(decomp.basis @ ker)
    return AdmittanceExpansion(
        leading=decomp.from_block(lead),
        w_minus1=decomp.from_block(w),
        kernel_basis=q,
        xi1_inv=xi1_inv,
    )


@dataclass(frozen=True)
class ResponseReport:
    amplitude: np.ndarray
    stored_energy: float
    dissipated_power: float
    quality_factor: float  # math.inf when nothing is dissipated
    regime_class: str


def _check_force(f, n):
    f = np.asarray(f, dtype=complex)
    if f.shape != (n,):
        raise InvalidInput(f"force must have shape ({n},), got {f.shape}")
    if not np.all(np.isfinite(f)):
        raise InvalidInput("force has NaN or Inf entries")
    if np.linalg.norm(f) == 0:
        raise InvalidInput("force must be nonzero")
    return f


def regime_of(decomp, f):
    """Whether `f` lies in ``ran B`` (to 1e-12 relative) or not."""
    perp = np.linalg.norm(decomp.p_b_perp @ f)
    return REGIME_INSIDE if perp <= PERP_TOL * np.linalg.norm(f) else REGIME_OUTSIDE


def respond(system, f, omega, beta, decomp=None):
    """Stationary response ``v = Adm(omega) f`` and its energetics.

    ``U = (v, v) / 2``, ``W_dis = beta (v, B v)`` and ``Q = |omega| U / W_dis``;
    Q is ``math.inf`` when ``W_dis <= 1e-14 beta ||B|| ||v||^2``.
    """
    decomp = decompose(system) if decomp is None else decomp
    f = _check_force(f, system.n)
    adm = admittance_exact(system, omega, beta, decomp)
    v = adm.matrix @ f
    vv = float(np.vdot(v, v).real)
    u = 0.5 * vv
    w_dis = float(beta * np.vdot(v, system.b @ v).real)
    tol = W_ZERO_TOL * beta * np.linalg.norm(system.b, 2) * vv
    q = abs(float(omega)) * u / w_dis if w_dis > tol else math.inf
    return ResponseReport(
        amplitude=v,
        stored_energy=u,
        dissipated_power=w_dis,
        quality_factor=q,
        regime_class=regime_of(decomp, f),
    )


def response_limits(decomp, f, omega):
    """``beta -> inf`` limits ``(U, W_dis, Q class)``.

    ``U -> ||Xi1^{-1} P_perp f||^2 / 2``, ``W_dis -> 0`` and Q tends to
    infinity when ``P_perp f != 0`` and ``omega != 0``, to zero otherwise.
    """
    omega = _check_real(omega)
    _check_nonresonant(decomp, omega)
    f = _check_force(f, decomp.system.n)
    if regime_of(decomp, f) == REGIME_INSIDE:
        return 0.0, 0.0, "zero"
    u = _limit_energy(decomp, f, omega)
    return u, 0.0, "infinite" if omega != 0 else "zero"


def _limit_energy(decomp, f, omega):
    n, nb = decomp.system.n, decomp.n_b
    xi1 = omega * np.eye(n - nb) - decomp.omega1
    f1 = decomp.noloss_basis.conj().T @ f
    g = np.linalg.solve(xi1, f1)
    return 0.5 * float(np.vdot(g, g).real)


def inside_coefficients(decomp, f, omega):
    """Leading coefficients ``(u2, w1)`` for ``f`` in ``ran B``.

    ``U ~ u2 / beta^2`` with ``u2 = (f, [B2^-2 + B2^-1 Theta Xi1^-2 Theta* B2^-1] f) / 2``
    and ``W_dis ~ w1 / beta`` with ``w1 = (f, B2^-1 f)``.
    """
    n, nb = decomp.system.n, decomp.n_b
    f2 = decomp.loss_basis.conj().T @ f
    b2_inv = decomp.b2_inv
    xi1 = omega * np.eye(n - nb) - decomp.omega1
    g = np.linalg.solve(xi1, decomp.theta.conj().T @ (b2_inv @ f2))
    h = b2_inv @ f2
    u2 = 0.5 * float(np.vdot(h, h).real + np.vdot(g, g).real)
    w1 = float(np.vdot(f2, b2_inv @ f2).real)
    return u2, w1


def response_asymptotes(decomp, f, omega, beta):
    """Leading-order ``(U, W_dis, Q)`` for large beta.

    Inside ``ran B``: ``U ~ u2/beta^2``, ``W ~ w1/beta``,
    ``Q ~ |omega| u2 / (w1 beta)``. Otherwise ``U ~ U_inf``,
    ``W ~ (f, W f)/beta`` and ``Q ~ |omega| U_inf beta / (f, W f)``
    (infinite when ``(f, W f)`` vanishes).
    """
    omega = _check_real(omega)
    beta = _check_beta(beta)
    f = _check_force(f, decomp.system.n)
    if regime_of(decomp, f) == REGIME_INSIDE:
        u2, w1 = inside_coefficients(decomp, f, omega)
        return u2 / beta**2, w1 / beta, abs(omega) * u2 / w1 / beta
    exp = admittance_expansion(decomp, omega)
    u0 = _limit_energy(decomp, f, omega)
    fwf = float(np.vdot(f, exp.w_minus1 @ f).real)
    scale = np.linalg.norm(exp.w_minus1, 2) * float(np.vdot(f, f).real)
    q = abs(omega) * u0 / fwf * beta if fwf > W_ZERO_TOL * scale else math.inf
    return u0, fwf / beta, q


def theorem3_inequality_check(decomp, f, omega):
    """Verify the lower-bound chain for the energy coefficient of ``f in ran B``

        u2 >= (f, B2^-1 f) / (2 zr_max) >= (f, f) / (2 zr_max^2) > 0

    with ``1e-12`` slack. Returns True or raises :class:`InequalityViolated`.
    """
    omega = _check_real(omega)
    _check_nonresonant(decomp, omega)
    f = _check_force(f, decomp.system.n)
    if regime_of(decomp, f) != REGIME_INSIDE:
        raise InvalidInput("f must lie in the loss subspace")
    u2, w1 = inside_coefficients(decomp, f, omega)
    zr_max = float(np.linalg.eigvalsh(decomp.b2).max())
    mid = 0.5 * w1 / zr_max
    low = 0.5 * float(np.vdot(f, f).real) / zr_max**2
    slack = INEQ_SLACK * max(1.0, u2)
    if not (u2 - mid >= -slack and mid - low >= -slack and low > 0):
        raise InequalityViolated(f"chain fails: {u2!r} >= {mid!r} >= {low!r} > 0")
    return True
