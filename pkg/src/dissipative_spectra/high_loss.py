"""
Large-beta asymptotics: the modal dichotomy.

For ``beta -> inf`` the eigenpairs of ``Omega - i beta B`` split into ``N_B``
high-loss modes, ``zeta ~ -i zr beta + rho``, living in ``ran B``, and
``N - N_B`` low-loss modes, ``zeta ~ rho - i d / beta``, expelled from it.
The coefficients come from the blocks of :class:`BlockDecomposition`:
``(zr, w)`` diagonalize ``B2``, ``(rho, w)`` diagonalize ``Omega1`` and
``d = (w, Theta* B2^{-1} Theta w)``.
"""

from dataclasses import dataclass
import math
from typing import Optional

import numpy as np

from .errors import EquivalenceViolated, InvalidInput
from .linalg import degenerate_groups, hermitian_eig, refine_degenerate

D_ZERO_RTOL = 1e-12
KERNEL_TOL = 1e-10


@dataclass(frozen=True)
class HighLossMode:
    index: int
    zeta_ring: float
    rho: float
    w_ring: np.ndarray
    degenerate_group: Optional[int] = None

    kind = "high-loss"


@dataclass(frozen=True)
class LowLossMode:
    index: int
    rho: float
    d: float
    w_ring: np.ndarray
    degenerate_group: Optional[int] = None

    kind = "low-loss"


def high_loss_coefficients(decomp, omega=None):
    """High-loss data ``(zr_j, rho_j, w_j)``, ordered by descending ``zr_j``.

    Inside a repeated eigenvalue of ``B2`` the vectors are chosen to also
    diagonalize the compression of Omega, so ``rho_j`` are well defined.
    """
    omega = decomp.system.omega if omega is None else np.asarray(omega, dtype=complex)
    ed = hermitian_eig(decomp.b2)
    lam = ed.eigenvalues
    labels = degenerate_groups(lam)
    local = refine_degenerate(ed.eigenvectors, labels, decomp.omega2)
    w = decomp.loss_basis @ local
    rho = np.einsum("ij,ik,kj->j", w.conj(), omega, w).real

    order = sorted(range(len(lam)), key=lambda k: (-lam[k], rho[k]))
    relabel = _relabel([labels[k] for k in order])
    return [
        HighLossMode(
            index=pos + 1,
            zeta_ring=float(lam[k]),
            rho=float(rho[k]),
            w_ring=w[:, k].copy(),
            degenerate_group=relabel[pos],
        )
        for pos, k in enumerate(order)
    ]


def _relabel(labels):
    seen = {}
    out = []
    for lab in labels:
        if lab is None:
            out.append(None)
        else:
            out.append(seen.setdefault(lab, len(seen)))
    return out


def low_loss_coefficients(decomp):
    """Low-loss data ``(rho_j, d_j, w_j)``.

    Ordering is by ascending ``|rho_j|``, positive before negative at equal
    modulus, then ascending ``d_j``; this reproduces the conventional mode
    numbering of symmetric spectra (0, +r, -r). Inside a repeated eigenvalue
    of ``Omega1`` the vectors diagonalize ``Theta* B2^{-1} Theta`` there.
    Values of ``d_j`` below ``1e-12 * K`` are set to 0, where K is the larger
    of ``||Theta* B2^{-1} Theta||`` and its natural scale
    ``||Omega||^2 ||B2^{-1}||`` (so a roundoff-sized Theta gives d = 0).
    """
    k_op = decomp.coupling()
    k_op = 0.5 * (k_op + k_op.conj().T)
    ed = hermitian_eig(decomp.omega1)
    rho = ed.eigenvalues
    labels = degenerate_groups(rho)
    local = refine_degenerate(ed.eigenvectors, labels, k_op)
    d = np.einsum("ij,ik,kj->j", local.conj(), k_op, local).real
    om_norm = np.linalg.norm(decomp.system.omega, 2)
    k_norm = max(np.linalg.norm(k_op, 2), om_norm**2 * np.linalg.norm(decomp.b2_inv, 2))
    d = np.where(np.abs(d) <= D_ZERO_RTOL * k_norm, 0.0, d)
    w = decomp.noloss_basis @ local

    # cluster-aware rounding keeps the sort stable under roundoff in rho
    scale = max(1.0, float(np.max(np.abs(rho))))
    key_rho = np.round(rho / (1e-9 * scale)) * (1e-9 * scale)
    order = sorted(
        range(len(rho)), key=lambda k: (abs(key_rho[k]), -np.sign(key_rho[k]), d[k])
    )
    relabel = _relabel([labels[k] for k in order])
    nb = decomp.n_b
    return [
        LowLossMode(
            index=nb + pos + 1,
            rho=float(rho[k]),
            d=float(d[k]),
            w_ring=w[:, k].copy(),
            degenerate_group=relabel[pos],
        )
        for pos, k in enumerate(order)
    ]


def _check_beta(beta):
    if not beta > 0:
        raise InvalidInput(f"beta must be positive, got {beta}")


def eval_eigenvalue_asymptote(mode, beta):
    """Truncated expansion of the eigenvalue branch attached to `mode`."""
    _check_beta(beta)
    if isinstance(mode, HighLossMode):
        return complex(mode.rho, -mode.zeta_ring * beta)
    return complex(mode.rho, -mode.d / beta)


def quality_factor_asymptote(mode, beta):
    """Leading term of the modal quality factor (``math.inf`` if d_j = 0)."""
    _check_beta(beta)
    if isinstance(mode, HighLossMode):
        return 0.5 * abs(mode.rho) / mode.zeta_ring / beta
    if mode.d <= 0:
        return math.inf
    return 0.5 * abs(mode.rho) / mode.d * beta


def dissipation_asymptote(mode, beta):
    """Leading term of the dissipated power of a unit eigenvector."""
    _check_beta(beta)
    if isinstance(mode, HighLossMode):
        return mode.zeta_ring * beta
    return mode.d / beta


@dataclass(frozen=True)
class ModeDiagnostic:
    index: int
    rho: float
    d: float
    shift_residual: float  # ||(rho I - Omega) w||
    in_shift_kernel: bool
    kernel_residual: float  # ||Omega w||
    in_omega_kernel: bool


def degeneracy_report(modes, omega):
    """Check, mode by mode, the two structural equivalences

    * ``w in ker(rho I - Omega)``  iff  ``d = 0``
    * ``w not in ker Omega``  iff  ``rho != 0 or d != 0``

    and return the diagnostics. A failed equivalence raises
    :class:`EquivalenceViolated`.
    """
    omega = np.asarray(omega, dtype=complex)
    tol = KERNEL_TOL * max(1.0, np.linalg.norm(omega, 2))
    out = []
    for m in modes:
        if not isinstance(m, LowLossMode):
            continue
        w = m.w_ring
        r_shift = float(np.linalg.norm(m.rho * w - omega @ w))
        r_kern = float(np.linalg.norm(omega @ w))
        in_shift = r_shift <= tol
        in_kern = r_kern <= tol
        d_zero = abs(m.d) <= tol
        rho_zero = abs(m.rho) <= tol
        if in_shift != d_zero:
            raise EquivalenceViolated(
                f"mode {m.index}: shift residual {r_shift:.3e} but d={m.d:.3e}"
            )
        if (not in_kern) != (not rho_zero or not d_zero):
            raise EquivalenceViolated(
                f"mode {m.index}: kernel residual {r_kern:.3e}, rho={m.rho:.3e}, d={m.d:.3e}"
            )
        out.append(
            ModeDiagnostic(
                index=m.index,
                rho=m.rho,
                d=m.d,
                shift_residual=r_shift,
                in_shift_kernel=in_shift,
                kernel_residual=r_kern,
                in_omega_kernel=in_kern,
            )
        )
    return out
