"""
Eigenvalue branch tracking over a sweep of the loss parameter.

Branches are followed by optimal bipartite matching of consecutive
eigenvalue sets, labeled by matching their large-beta end against the
high-loss / low-loss asymptotes, and inspected for overdamping and for the
critical-damping point where two branches merge on the imaginary axis.
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ClassificationFailed, InvalidInput, NoMergeInBracket
from .high_loss import HighLossMode, eval_eigenvalue_asymptote
from .linalg import general_eig
from .system import assemble

MAX_DEPTH = 20
REFINE_BUDGET = 200  # midpoints per original grid interval
MOVE_FRACTION = 0.1
AMBIGUITY_TOL = 1e-12
BRACKET_WIDTH = 1e-10


@dataclass(frozen=True)
class SpectralBranch:
    branch_id: int
    klass: str  # 'high-loss' | 'low-loss' | 'unresolved'
    betas: np.ndarray
    zetas: np.ndarray
    matched_mode: Optional[object] = None
    overdamped_from: Optional[float] = None
    ambiguous_betas: Tuple[float, ...] = field(default=())

    @property
    def samples(self):
        return list(zip(self.betas.tolist(), self.zetas.tolist()))

    def at(self, beta):
        """Branch value at a sampled `beta`."""
        k = int(np.argmin(np.abs(self.betas - beta)))
        if not np.isclose(self.betas[k], beta, rtol=1e-12, atol=0):
            raise InvalidInput(f"beta={beta} is not a sample of branch {self.branch_id}")
        return complex(self.zetas[k])


@dataclass(frozen=True)
class CriticalPoint:
    beta0: float
    zeta0: complex
    merging_branches: Optional[Tuple[int, int]]
    refinement_residual: float


def eigenvalues(system, beta):
    """Eigenvalues of ``A(beta)`` in lexicographic (Re, Im) order."""
    return general_eig(assemble(system, beta)).eigenvalues


def assign(current, targets):
    """Optimal matching of `current` onto `targets` by total distance.

    Returns ``(perm, best, second)``: ``targets[perm]`` follows `current`;
    `second` is the cheapest assignment that differs from the optimum.
    """
    cost = np.abs(np.subtract.outer(np.asarray(current), np.asarray(targets)))
    rows, cols = linear_sum_assignment(cost)
    best = float(cost[rows, cols].sum())
    second = np.inf
    if len(rows) > 1:
        big = cost.max() * len(rows) * 10 + 1.0
        for r, c in zip(rows, cols):
            alt = cost.copy()
            alt[r, c] = big
            rr, cc = linear_sum_assignment(alt)
            second = min(second, float(alt[rr, cc].sum()))
    perm = np.empty(len(rows), dtype=int)
    perm[rows] = cols
    return perm, best, second


def _diameter(values):
    v = np.asarray(values)
    return float(np.max(np.abs(np.subtract.outer(v, v))))


class _Walker:
    def __init__(self, system):
        self.system = system
        self.ambiguous = []
        self.budget = 0

    def advance(self, b0, z0, b1, e1, depth=0):
        perm, best, second = assign(z0, e1)
        z1 = e1[perm]
        moved = float(np.max(np.abs(z1 - z0)))
        scale = max(1.0, float(np.max(np.abs(e1))))
        diam = max(_diameter(np.concatenate([z0, e1])), 1e-12 * scale)
        ambiguous = second - best < AMBIGUITY_TOL * scale
        if (ambiguous or moved > MOVE_FRACTION * diam) and depth < MAX_DEPTH and self.budget > 0:
            self.budget -= 1
            bm = 0.5 * (b0 + b1)
            zm = self.advance(b0, z0, bm, eigenvalues(self.system, bm), depth + 1)
            return self.advance(bm, zm, b1, e1, depth + 1)
        if ambiguous:
            self.ambiguous.append(b1)
        return z1


def _check_grid(beta_grid):
    g = np.asarray(beta_grid, dtype=float)
    if g.ndim != 1 or len(g) < 2:
        raise InvalidInput("beta grid needs at least 2 points")
    if not np.all(np.isfinite(g)) or g[0] < 0 or np.any(np.diff(g) <= 0):
        raise InvalidInput("beta grid must be finite, nonnegative and strictly increasing")
    return g


def sweep(system, beta_grid):
    """Track the N eigenvalue branches of ``A(beta)`` across `beta_grid`.

    Consecutive eigenvalue sets are matched by minimum total distance.
    An interval is bisected (up to depth 20) when the match is ambiguous or
    some eigenvalue moves more than 10% of the local spectral diameter.
    Ambiguities that survive refinement are recorded per branch in
    ``ambiguous_betas``. Only grid points are stored as samples.
    """
    grid = _check_grid(beta_grid)
    walker = _Walker(system)
    z = eigenvalues(system, grid[0])
    rows = [z]
    for b0, b1 in zip(grid[:-1], grid[1:]):
        walker.budget = REFINE_BUDGET
        z = walker.advance(b0, z, b1, eigenvalues(system, b1))
        rows.append(z)
    values = np.array(rows)
    amb = tuple(sorted(set(float(b) for b in walker.ambiguous)))
    return [
        SpectralBranch(
            branch_id=j + 1,
            klass="unresolved",
            betas=grid.copy(),
            zetas=values[:, j].copy(),
            ambiguous_betas=amb,
        )
        for j in range(system.n)
    ]


def _required_beta(omega_norm, high_modes):
    zr_min = min(m.zeta_ring for m in high_modes)
    return 10.0 * max(1.0, omega_norm / zr_min)


def classify(branches, high_modes, low_modes, omega_norm=None):
    """Label branches by matching their last sample to the asymptotes.

    Branch ids are renumbered to the matched mode index and the list is
    returned sorted by id.

    Raises
    ------
    ClassificationFailed
        If the largest sampled beta is below ``10 max(1, ||Omega|| / min zr)``
        (only checked when `omega_norm` is given) or if some matched
        residual exceeds ``0.5 |zeta| + 1``.
    """
    modes = list(high_modes) + list(low_modes)
    if len(modes) != len(branches):
        raise InvalidInput(f"{len(branches)} branches but {len(modes)} modes")
    b_max = float(branches[0].betas[-1])
    if omega_norm is not None and high_modes:
        need = _required_beta(omega_norm, high_modes)
        if b_max < need:
            raise ClassificationFailed(
                f"largest beta {b_max:g} is below the required {need:g}; extend the sweep"
            )
    if not b_max > 0:
        raise ClassificationFailed("sweep never leaves beta = 0")
    ends = np.array([br.zetas[-1] for br in branches])
    asym = np.array([eval_eigenvalue_asymptote(m, b_max) for m in modes])
    cost = np.abs(np.subtract.outer(ends, asym))
    rows, cols = linear_sum_assignment(cost)
    out = []
    for r, c in zip(rows, cols):
        res = cost[r, c]
        if res > 0.5 * abs(ends[r]) + 1.0:
            raise ClassificationFailed(
                f"branch {branches[r].branch_id} is {res:.3e} from its asymptote at beta={b_max:g}"
            )
        m = modes[c]
        out.append(
            replace(
                branches[r],
                branch_id=m.index,
                klass="high-loss" if isinstance(m, HighLossMode) else "low-loss",
                matched_mode=m,
            )
        )
    return sorted(out, key=lambda b: b.branch_id)


def matched_eigenpairs(system, beta, targets):
    """Eigenpairs of ``A(beta)`` matched one-to-one to complex `targets`.

    Returns ``(zetas, vectors)`` with ``zetas[k]`` closest (in the optimal
    assignment sense) to ``targets[k]`` and unit eigenvectors as columns.
    """
    ed = general_eig(assemble(system, beta))
    perm, _, _ = assign(np.asarray(targets), ed.eigenvalues)
    return ed.eigenvalues[perm], ed.eigenvectors[:, perm]


def detect_overdamping(branches, tol_re=1e-9):
    """Set ``overdamped_from`` on every branch.

    It is the smallest sampled beta from which on every sample satisfies
    ``|Re z| <= tol_re * max(1, |Im z|)``; ``None`` if the last sample fails.
    """
    out = []
    for br in branches:
        on_axis = np.abs(br.zetas.real) <= tol_re * np.maximum(1.0, np.abs(br.zetas.imag))
        start = None
        for k in range(len(on_axis) - 1, -1, -1):
            if not on_axis[k]:
                break
            start = float(br.betas[k])
        out.append(replace(br, overdamped_from=start))
    return out


def min_gap(system, beta):
    """Smallest pairwise distance between eigenvalues of ``A(beta)``, and the pair."""
    z = eigenvalues(system, beta)
    d = np.abs(np.subtract.outer(z, z))
    np.fill_diagonal(d, np.inf)
    i, j = np.unravel_index(np.argmin(d), d.shape)
    return float(d[i, j]), z[i], z[j]


def locate_critical_point(system, bracket, branches=None, n_scan=41):
    """Find the loss value where two eigenvalues merge on the imaginary axis.

    The minimum eigenvalue gap is scanned on a coarse grid, then the
    bracket around its smallest value is bisected on the sign of the gap's
    slope until it is narrower than 1e-10.

    Raises
    ------
    NoMergeInBracket
        If the gap does not collapse inside the bracket or the merged
        eigenvalue is off the imaginary axis.
    """
    lo, hi = (float(x) for x in bracket)
    if not 0 <= lo < hi:
        raise InvalidInput(f"invalid bracket {bracket}")
    scan = np.linspace(lo, hi, n_scan)
    gaps = np.array([min_gap(system, b)[0] for b in scan])
    k = int(np.argmin(gaps))
    a = scan[max(k - 1, 0)]
    c = scan[min(k + 1, n_scan - 1)]
    while c - a > BRACKET_WIDTH:
        m = 0.5 * (a + c)
        h = 0.25 * (c - a)
        if min_gap(system, m + h)[0] < min_gap(system, m - h)[0]:
            a = m
        else:
            c = m
    beta0 = 0.5 * (a + c)
    g0, z1, z2 = min_gap(system, beta0)
    zeta0 = 0.5 * (z1 + z2)

    scale = max(1.0, abs(zeta0))
    edge = min(gaps[0], gaps[-1])
    interior = lo + BRACKET_WIDTH < beta0 < hi - BRACKET_WIDTH
    if not interior or g0 > 1e-2 * edge or g0 > 1e-3 * scale:
        raise NoMergeInBracket(
            f"eigenvalue gap does not close in [{lo:g}, {hi:g}] (min {g0:.3e})"
        )
    if abs(zeta0.real) > 1e-8 * abs(zeta0):
        raise NoMergeInBracket(f"merge at {zeta0} is off the imaginary axis")

    ids = None
    if branches is not None:
        k = int(np.argmin(np.abs(branches[0].betas - beta0)))
        near = np.array([abs(br.zetas[k] - zeta0) for br in branches])
        pair = np.argsort(near, kind="stable")[:2]
        ids = tuple(sorted(int(branches[p].branch_id) for p in pair))
    return CriticalPoint(
        beta0=beta0, zeta0=complex(zeta0), merging_branches=ids, refinement_residual=g0,
    )


def check_spectral_symmetry(system, beta_samples):
    """Largest Hausdorff distance between ``sigma(A)`` and ``-conj sigma(A)``."""
    worst = 0.0
    for b in np.atleast_1d(beta_samples):
        z = eigenvalues(system, float(b))
        d = np.abs(np.subtract.outer(z, -np.conj(z)))
        worst = max(worst, float(d.min(axis=0).max()), float(d.min(axis=1).max()))
    return worst
