"""
Two-loop RLC circuit front end.

Two LC loops (capacitors C1, C2, inductors L1, L2) share the coupling
capacitor C12; only the second loop has a resistor R2. After mass rescaling
the circuit becomes a 4 x 4 canonical system

    Omega = [[0, -i Phi], [i Phi, 0]],    B = diag(0, 1/tau, 0, 0),

with ``Phi`` the positive square root of ``L^{-1/2} G L^{-1/2}`` and loss
parameter ``beta = R2 tau / L2``.
"""

from dataclasses import dataclass
import math
from typing import Optional

import numpy as np

from .errors import InvalidInput, PhiOffDiagonalZero
from .linalg import positive_sqrt
from .system import build_system

PHI12_TOL = 1e-14

# Values printed with the reference figures. The limit frequency of branch 3
# evaluates to sqrt(3/20) for these parameters, and the critical damping
# point to 0.594512; both are reported next to these constants.
PUBLISHED_RHO3 = 0.40825
PUBLISHED_BETA0 = 0.57282


@dataclass(frozen=True)
class CircuitSpec:
    c1: float
    c2: float
    c12: float  # math.inf decouples the loops
    l1: float
    l2: float
    tau: float = 1.0
    r2: Optional[float] = None
    beta: Optional[float] = None

    def __post_init__(self):
        for name in ("c1", "c2", "c12", "l1", "l2", "tau"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or math.isnan(v) or not v > 0:
                raise InvalidInput(f"{name} must be a positive number, got {v!r}")
        for name in ("c1", "c2", "l1", "l2", "tau"):
            if math.isinf(getattr(self, name)):
                raise InvalidInput(f"{name} must be finite")
        if (self.r2 is None) == (self.beta is None):
            raise InvalidInput("exactly one of r2 and beta must be given")
        v = self.r2 if self.r2 is not None else self.beta
        if not isinstance(v, (int, float)) or not math.isfinite(v) or v < 0:
            raise InvalidInput(f"r2/beta must be a nonnegative finite number, got {v!r}")

    @property
    def loss_parameter(self):
        """Dimensionless loss ``beta = R2 tau / L2``."""
        if self.beta is not None:
            return float(self.beta)
        return self.r2 * self.tau / self.l2

    @property
    def resistance(self):
        """``R2 = L2 beta / tau``."""
        if self.r2 is not None:
            return float(self.r2)
        return self.l2 * self.beta / self.tau


def lagrangian_matrices(spec):
    """Inductance, inverse-capacitance and resistance matrices ``(L, G, R)``."""
    k = 1.0 / spec.c12
    ell = np.diag([spec.l1, spec.l2]).astype(float)
    g = np.array([[1.0 / spec.c1 + k, -k], [-k, 1.0 / spec.c2 + k]])
    r = np.diag([0.0, spec.resistance])
    return ell, g, r


def build_phi(spec):
    """``(Phi^2, Phi)`` for the rescaled circuit.

    Raises
    ------
    PhiOffDiagonalZero
        If ``|Phi_12| <= 1e-14``, i.e. the loops are (numerically) decoupled.
    """
    _, g, _ = lagrangian_matrices(spec)
    s = np.array([1.0 / math.sqrt(spec.l1), 1.0 / math.sqrt(spec.l2)])
    phi2 = g * np.outer(s, s)
    phi = positive_sqrt(phi2).real
    if abs(phi[0, 1]) <= PHI12_TOL:
        raise PhiOffDiagonalZero(f"Phi_12 = {phi[0, 1]:.3e}; the loops are decoupled")
    return phi2, phi


def canonical_matrices(spec):
    """``(Omega, B)`` of the canonical 4 x 4 system."""
    _, phi = build_phi(spec)
    omega = np.zeros((4, 4), dtype=complex)
    omega[:2, 2:] = -1j * phi
    omega[2:, :2] = 1j * phi
    b = np.zeros((4, 4), dtype=complex)
    b[1, 1] = 1.0 / spec.tau
    return omega, b


def canonical_system(spec):
    """Validated canonical system and its loss parameter."""
    omega, b = canonical_matrices(spec)
    return build_system(omega, b), spec.loss_parameter


def paper_example(beta=1.0):
    """Reference parameter set C1=2, C2=3, C12=4, L1=5, L2=6, tau=1."""
    return CircuitSpec(c1=2.0, c2=3.0, c12=4.0, l1=5.0, l2=6.0, tau=1.0, beta=beta)


@dataclass(frozen=True)
class CircuitCoefficients:
    rho3: float
    d2: float
    d3: float
    zeta_ring1: float


def closed_form_coefficients(spec):
    """Large-beta coefficients of the circuit from the entries of Phi.

    ``rho_2 = 0``, ``rho_3 = -rho_4 = sqrt(Phi11^2 + Phi12^2)``,
    ``d_2 = tau (Phi12^2 - Phi11 Phi22)^2 / (Phi11^2 + Phi12^2)``,
    ``d_3 = d_4 = tau Phi12^2 (Phi11 + Phi22)^2 / (2 (Phi11^2 + Phi12^2))``
    and ``zr_1 = 1/tau``.
    """
    _, phi = build_phi(spec)
    p11, p12, p22 = (float(x) for x in (phi[0, 0], phi[0, 1], phi[1, 1]))
    nrm = p11**2 + p12**2
    return CircuitCoefficients(
        rho3=math.sqrt(nrm),
        d2=spec.tau * (p12**2 - p11 * p22) ** 2 / nrm,
        d3=0.5 * spec.tau * p12**2 * (p11 + p22) ** 2 / nrm,
        zeta_ring1=1.0 / spec.tau,
    )


def pencil_determinant(spec, zeta, beta=None):
    """``det(L)^{-1} det(zeta^2 L + i zeta R - G)`` at loss `beta`.

    Equals the characteristic polynomial ``det(zeta I - A(beta))``.
    """
    if beta is not None:
        spec = CircuitSpec(spec.c1, spec.c2, spec.c12, spec.l1, spec.l2, spec.tau, beta=beta)
    ell, g, r = lagrangian_matrices(spec)
    return np.linalg.det(zeta**2 * ell + 1j * zeta * r - g) / np.linalg.det(ell)


def reference_values(spec, beta_probe=1e4):
    """Analytic and numerically observed limit frequency of branch 3.

    The observed value is ``Re zeta`` of the eigenvalue of ``A(beta_probe)``
    with the largest real part; the published constant is reported too.
    """
    system, _ = canonical_system(spec)
    z = np.linalg.eigvals(system.omega - 1j * beta_probe * system.b)
    return {
        "rho3_analytic": closed_form_coefficients(spec).rho3,
        "rho3_observed": float(np.max(z.real)),
        "rho3_published": PUBLISHED_RHO3,
    }
