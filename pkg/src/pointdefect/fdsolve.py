"""Finite-difference box eigensolver.

``-1/2 psi'' + V psi = E psi`` on the interior nodes of ``[-L/2, L/2]``
with Dirichlet edges becomes a symmetric tridiagonal matrix with diagonal
``1/h^2 + V_i`` and off-diagonal ``-1/(2h^2)``.  Eigenvalues come from
bisection on the Sturm (inertia) count; eigenvectors from inverse
iteration on the shifted matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .errors import GridMismatch, NoConvergence
from .potential import SampledPotential, UniformGrid


@dataclass(frozen=True)
class TridiagonalOperator:
    diag: np.ndarray
    offdiag: np.ndarray
    length: float

    def __post_init__(self) -> None:
        if len(self.diag) < 3 or len(self.offdiag) != len(self.diag) - 1:
            raise ValueError("need N >= 3 diagonal entries and N-1 off-diagonal entries")
        if not (np.all(np.isfinite(self.diag)) and np.all(np.isfinite(self.offdiag))):
            raise ValueError("operator entries must be finite")

    @property
    def n(self) -> int:
        return len(self.diag)

    @property
    def h(self) -> float:
        return self.length / (self.n + 1)

    @property
    def grid(self) -> UniformGrid:
        return UniformGrid.box_interior(self.length, self.n)

    def gershgorin(self) -> tuple[float, float]:
        off = np.abs(self.offdiag)
        radius = np.zeros(self.n)
        radius[:-1] += off
        radius[1:] += off
        return float(np.min(self.diag - radius)), float(np.max(self.diag + radius))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.offdiag * x[1:]
        y[1:] += self.offdiag * x[:-1]
        return y

    def dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)


def discretize(
    pot: Optional[SampledPotential], length: float, n: int
) -> TridiagonalOperator:
    """Central-difference Hamiltonian with implicit Dirichlet edges."""
    if n < 3:
        raise ValueError("need at least 3 interior points")
    h = length / (n + 1)
    diag = np.full(n, 1.0 / h**2)
    if pot is not None:
        expected = UniformGrid.box_interior(length, n)
        g = pot.grid
        if g.n != n or not math.isclose(g.h, h, rel_tol=1e-12) or not math.isclose(
            g.x0, expected.x0, rel_tol=1e-12, abs_tol=1e-12 * length
        ):
            raise GridMismatch(f"potential grid {g} does not match box interior {expected}")
        diag = diag + pot.values
    return TridiagonalOperator(diag, np.full(n - 1, -0.5 / h**2), float(length))


def sturm_count(op: TridiagonalOperator, lam: float) -> int:
    """Number of eigenvalues strictly below ``lam`` (LDL^T inertia)."""
    d = op.diag.tolist()
    e2 = (op.offdiag**2).tolist()
    scale = max(float(np.max(np.abs(op.diag))), float(np.max(np.abs(op.offdiag))), abs(lam), 1.0)
    pivmin = float(np.finfo(float).eps) * scale
    count = 0
    piv = d[0] - lam
    if abs(piv) < pivmin:
        piv = pivmin
    if piv < 0:
        count += 1
    for i in range(1, len(d)):
        piv = (d[i] - lam) - e2[i - 1] / piv
        if abs(piv) < pivmin:
            piv = pivmin
        if piv < 0:
            count += 1
    return count


def _bisect_kth(op: TridiagonalOperator, k: int, lo: float, hi: float, tol: float) -> float:
    """The ``k``-th eigenvalue (0-based) given ``count(lo) <= k < count(hi)``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sturm_count(op, mid) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def lowest_eigenvalues(
    op: TridiagonalOperator, m: int, tol: float = 1e-12, above: Optional[float] = None
) -> list[float]:
    """The ``m`` smallest eigenvalues, or the ``m`` smallest above ``above``."""
    if not 1 <= m <= op.n:
        raise ValueError(f"m must be in [1, {op.n}], got {m}")
    if not tol > 0:
        raise ValueError("tol must be positive")
    glo, ghi = op.gershgorin()
    glo -= 1.0
    ghi += 1.0
    skip = 0
    if above is not None:
        glo = max(glo, above)
        skip = sturm_count(op, above)
    if skip + m > op.n:
        raise ValueError("not enough eigenvalues above the requested floor")
    values = []
    lo = glo
    for k in range(skip, skip + m):
        hi = ghi
        # tighten the upper bracket so later bisections start narrow
        val = _bisect_kth(op, k, lo, hi, tol)
        values.append(val)
        lo = max(lo, val - tol)
    return sorted(values)


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray
    residual: float
    h: float

    def x(self, length: float) -> np.ndarray:
        return UniformGrid.box_interior(length, len(self.vector)).points


def _shifted_solve(op: TridiagonalOperator, shift: float, b: np.ndarray) -> np.ndarray:
    ab = np.zeros((3, op.n))
    ab[0, 1:] = op.offdiag
    ab[1, :] = op.diag - shift
    ab[2, :-1] = op.offdiag
    return solve_banded((1, 1), ab, b, check_finite=False)


def eigenvector(
    op: TridiagonalOperator,
    lam: float,
    previous: Sequence[EigenPair] = (),
    tol: float = 1e-12,
    seed: int = 0,
    max_iter: int = 5,
) -> EigenPair:
    """Inverse iteration at shift ``lam``.

    Vectors in ``previous`` whose eigenvalues lie within ``1e3 * tol`` of
    ``lam`` (a near-degenerate cluster) are projected out each sweep.
    Normalized so that ``sum(psi_i^2) h = 1``; the first entry that is
    not negligible is made positive.
    """
    h = op.h
    cluster = [p.vector for p in previous if abs(p.value - lam) < 1e3 * tol]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(op.n)
    # a shift sitting exactly on an eigenvalue makes the factorization singular
    shift = lam + 4 * np.finfo(float).eps * max(1.0, abs(lam))
    scale = max(1.0, float(np.max(np.abs(op.diag))))
    target = tol + 1e3 * np.finfo(float).eps * scale
    residual = math.inf
    for _ in range(max_iter):
        for v in cluster:
            x -= (x @ v) * h * v
        x = _shifted_solve(op, shift, x)
        for v in cluster:
            x -= (x @ v) * h * v
        x /= math.sqrt(float(x @ x) * h)
        residual = float(np.linalg.norm(op.matvec(x) - lam * x) / np.linalg.norm(x))
        if residual < target:
            break
    else:
        raise NoConvergence(f"inverse iteration at lambda={lam!r} left residual {residual:g}")
    lead = np.flatnonzero(np.abs(x) > 1e-8 * np.max(np.abs(x)))[0]
    if x[lead] < 0:
        x = -x
    return EigenPair(float(lam), x, residual, h)


def solve(
    op: TridiagonalOperator, m: int, tol: float = 1e-12, above: Optional[float] = None, seed: int = 0
) -> list[EigenPair]:
    """Lowest ``m`` eigenpairs (optionally above an energy floor)."""
    pairs: list[EigenPair] = []
    for lam in lowest_eigenvalues(op, m, tol, above):
        pairs.append(eigenvector(op, lam, pairs, tol, seed))
    return pairs
