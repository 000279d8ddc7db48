"""
Small-beta asymptotics.

For ``beta -> 0`` the eigenvalues of ``Omega - i beta B`` are analytic,
``zeta_j = omega_j - i sigma_j beta + O(beta^2)``, with ``(omega_j, u_j)``
eigenpairs of Omega and ``sigma_j = (u_j, B u_j)``.
"""

from dataclasses import dataclass
import math
from typing import Optional

import numpy as np

from .errors import InvalidInput
from .linalg import degenerate_groups, hermitian_eig, refine_degenerate

SIGMA_TOL = 1e-12


@dataclass(frozen=True)
class SmallBetaMode:
    index: int
    omega_j: float
    sigma_j: float
    u_j: np.ndarray
    degenerate_group: Optional[int] = None


def small_beta_coefficients(system):
    """Eigenfrequencies, first-order damping rates and eigenvectors.

    Modes are ordered by ascending ``omega_j``, ties by ``sigma_j``. Inside
    a repeated eigenvalue of Omega the vectors diagonalize the compression
    of B, whose eigenvalues are then the ``sigma_j``.
    """
    ed = hermitian_eig(system.omega)
    labels = degenerate_groups(ed.eigenvalues)
    u = refine_degenerate(ed.eigenvectors, labels, system.b)
    sigma = np.einsum("ij,ik,kj->j", u.conj(), system.b, u).real
    order = sorted(range(system.n), key=lambda k: (ed.eigenvalues[k], sigma[k]))

    groups = {}
    modes = []
    for pos, k in enumerate(order):
        lab = labels[k]
        if lab is not None:
            lab = groups.setdefault(lab, len(groups))
        modes.append(
            SmallBetaMode(
                index=pos + 1,
                omega_j=float(ed.eigenvalues[k]),
                sigma_j=float(sigma[k]),
                u_j=u[:, k].copy(),
                degenerate_group=lab,
            )
        )
    return modes


def eval_small_beta_eigenvalue(mode, beta):
    """First-order eigenvalue ``omega_j - i sigma_j beta``."""
    if not beta >= 0:
        raise InvalidInput(f"beta must be nonnegative, got {beta}")
    return complex(mode.omega_j, -mode.sigma_j * beta)


def small_beta_quality_asymptote(mode, beta, tol=SIGMA_TOL):
    """Leading quality factor ``|omega_j| / (2 sigma_j beta)``; inf if sigma_j = 0."""
    if not beta > 0:
        raise InvalidInput(f"beta must be positive, got {beta}")
    if mode.sigma_j <= tol:
        return math.inf
    return 0.5 * abs(mode.omega_j) / mode.sigma_j / beta


def small_beta_dissipation_asymptote(mode, beta):
    """Leading dissipated power ``sigma_j beta`` of the unit eigenvector."""
    if not beta >= 0:
        raise InvalidInput(f"beta must be nonnegative, got {beta}")
    return mode.sigma_j * beta
