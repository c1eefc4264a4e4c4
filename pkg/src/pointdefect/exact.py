"""Exact box spectra for delta trains and ideal point interactions.

Between interactions the wavefunction is a free solution, so the pair
``w = (psi', psi)`` is carried across a gap ``d`` by

    P(d) = [[cos kd, -k sin kd], [sin(kd)/k, cos kd]],   k = sqrt(2E),

(hyperbolic for E < 0) and across a spike of strength ``v`` by
``[[1, 2v], [0, 1]]``.  Starting from the left-edge boundary vector and
propagating to the right edge gives a spectral function of E whose zeros
are the eigenvalues.  No small-k expansion is made anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .boundary import BoundaryData
from .connmat import BoundaryKind, ConnectionMatrix
from .errors import NegativeDistance, NonFinite, NotAnEigenvalue, UnsupportedInteraction
from .potential import DeltaTrain, SampledPotential, UniformGrid

_RESCALE_ABOVE = 1e150


@dataclass(frozen=True)
class PointInteraction:
    matrix: ConnectionMatrix
    x0: float = 0.0


Interaction = Union[None, DeltaTrain, PointInteraction]


@dataclass(frozen=True)
class BoxSystem:
    """Particle of unit mass on ``[-L/2, L/2]`` with one interaction inside."""

    length: float
    left_bc: BoundaryKind = BoundaryKind.DIRICHLET
    right_bc: BoundaryKind = BoundaryKind.DIRICHLET
    interaction: Interaction = None
    x0: float = 0.0

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise ValueError(f"box length must be positive, got {self.length!r}")
        if isinstance(self.interaction, SampledPotential):
            raise UnsupportedInteraction("sampled potentials are handled by fdsolve")
        half = self.length / 2.0
        for p in self._event_positions():
            if not -half < p < half:
                raise ValueError(f"interaction at {p} is not strictly inside the box")

    @property
    def site(self) -> float:
        """Location where boundary data are reported."""
        if isinstance(self.interaction, PointInteraction):
            return self.interaction.x0
        return self.x0

    def _event_positions(self) -> list[float]:
        if isinstance(self.interaction, DeltaTrain):
            return [s.position for s in self.interaction.spikes]
        if isinstance(self.interaction, PointInteraction):
            return [self.interaction.x0]
        return []

    def events(self) -> list[tuple[float, np.ndarray]]:
        """``(position, 2x2 matrix)`` for every interaction, left to right."""
        if isinstance(self.interaction, DeltaTrain):
            return [(s.position, delta_step(s.strength).m) for s in self.interaction.spikes]
        if isinstance(self.interaction, PointInteraction):
            return [(self.interaction.x0, self.interaction.matrix.as_array())]
        if self.interaction is None:
            return []
        raise UnsupportedInteraction(f"cannot handle interaction {type(self.interaction)}")

    def scan_complexity(self) -> int:
        if isinstance(self.interaction, DeltaTrain):
            return len(self.interaction.spikes)
        return 1 if self.interaction is not None else 0


@dataclass(frozen=True)
class TransferMatrix:
    """2x2 map on ``(psi', psi)`` built at energy ``energy`` (None: E-independent)."""

    m: np.ndarray
    energy: Optional[float] = None

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.m))

    def apply(self, dpsi: float, psi: float) -> tuple[float, float]:
        out = self.m @ np.array([dpsi, psi])
        return float(out[0]), float(out[1])

    def as_array(self) -> np.ndarray:
        return self.m.copy()


def energy_to_q(energy):
    """Signed wavenumber ``sign(E) sqrt(2|E|)``."""
    energy = np.asarray(energy, dtype=float)
    return np.sign(energy) * np.sqrt(2.0 * np.abs(energy))


def q_to_energy(q):
    q = np.asarray(q, dtype=float)
    return 0.5 * q * np.abs(q)


def _propagator_entries(energy: np.ndarray, d: float):
    """``cos``-like, ``sin/k``-like and ``-k sin``-like entries; any sign of d."""
    q = energy_to_q(energy)
    k = np.abs(q)
    x = k * d
    pos = q >= 0
    with np.errstate(over="ignore", invalid="ignore"):
        # np.sinc is sin(pi t)/(pi t), regular at 0
        c = np.where(pos, np.cos(x), np.cosh(x))
        sinc_h = np.where(x == 0, 1.0, np.sinh(x) / np.where(x == 0, 1.0, x))
        s_over_k = d * np.where(pos, np.sinc(x / np.pi), sinc_h)
        k_s = np.where(pos, -k * np.sin(x), k * np.sinh(x))
    return c, s_over_k, k_s


def _free(energy, d: float) -> np.ndarray:
    c, s1, s2 = _propagator_entries(np.atleast_1d(energy), d)
    return np.array([[c[0], s2[0]], [s1[0], c[0]]])


def free_propagator(energy: float, d: float) -> TransferMatrix:
    if d < 0:
        raise NegativeDistance(f"propagation distance must be >= 0, got {d!r}")
    return TransferMatrix(_free(energy, d), float(energy))


def delta_step(v: float) -> TransferMatrix:
    if not math.isfinite(v):
        raise NonFinite(f"delta strength {v!r}")
    return TransferMatrix(np.array([[1.0, 2.0 * v], [0.0, 1.0]]))


def train_transfer(train: DeltaTrain, energy: float) -> TransferMatrix:
    """Map from just left of the first spike to just right of the last."""
    m = delta_step(train.spikes[0].strength).m
    for prev, spike in zip(train.spikes, train.spikes[1:]):
        m = _free(energy, spike.position - prev.position) @ m
        m = delta_step(spike.strength).m @ m
    return TransferMatrix(m, float(energy))


def _propagate(dpsi, psi, energy, d):
    if d == 0:
        return dpsi, psi
    c, s1, s2 = _propagator_entries(energy, d)
    return c * dpsi + s2 * psi, s1 * dpsi + c * psi


def _shoot(sys: BoxSystem, energy: np.ndarray, record: bool = False):
    """Propagate the left-edge vector across the box for an array of energies.

    Returns the right-edge ``(psi', psi)`` arrays and, if ``record``, the
    vectors just left and just right of every interaction.
    """
    energy = np.atleast_1d(np.asarray(energy, dtype=float))
    d0, p0 = sys.left_bc.start_vector()
    dpsi = np.full_like(energy, d0)
    psi = np.full_like(energy, p0)
    x = -sys.length / 2.0
    history = []
    for pos, m in sys.events():
        dpsi, psi = _propagate(dpsi, psi, energy, pos - x)
        left = (dpsi, psi)
        dpsi, psi = m[0, 0] * dpsi + m[0, 1] * psi, m[1, 0] * dpsi + m[1, 1] * psi
        if record:
            history.append((pos, left, (dpsi, psi)))
        else:
            norm = np.hypot(dpsi, psi)
            big = norm > _RESCALE_ABOVE
            if np.any(big):
                dpsi = np.where(big, dpsi / norm, dpsi)
                psi = np.where(big, psi / norm, psi)
        x = pos
    dpsi, psi = _propagate(dpsi, psi, energy, sys.length / 2.0 - x)
    return dpsi, psi, history


def _spectral_array(sys: BoxSystem, energy) -> np.ndarray:
    dpsi, psi, _ = _shoot(sys, energy)
    return psi if sys.right_bc is BoundaryKind.DIRICHLET else dpsi


def spectral_function(sys: BoxSystem, energy: float) -> float:
    """Right-edge residual of the solution launched from the left edge."""
    return float(_spectral_array(sys, energy)[0])


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple[float, ...]
    scan_step: float
    window: tuple[float, float]
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.eigenvalues)

    def __getitem__(self, i):
        return self.eigenvalues[i]


def _bisect_q(f, lo: float, hi: float, flo: float, tol: float) -> float:
    while q_to_energy(hi) - q_to_energy(lo) > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        fmid = f(mid)
        if fmid == 0.0:
            return mid
        if (fmid < 0) == (flo < 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _split_hidden_pair(f, lo: float, hi: float, sign: float):
    """Locate the extremum of ``sign*F`` in ``[lo, hi]``; return it if F crosses zero there.

    The extremum is found as the root of a central difference of F, which
    pins it far more sharply than a direct minimization (those stall near
    sqrt(eps) of the bracket, wider than the pair for very strong spikes).
    """
    h = 1e-7 * (hi - lo)
    slope = lambda q: f(q + h) - f(q - h)
    a, b = lo + h, hi - h
    if slope(a) * slope(b) < 0:
        qm = brentq(slope, a, b, xtol=1e-15 * max(1.0, abs(hi)), rtol=4 * np.finfo(float).eps)
    else:
        res = minimize_scalar(
            lambda q: sign * f(q), bounds=(lo, hi), method="bounded", options={"xatol": 1e-14 * max(1.0, abs(hi))}
        )
        qm = float(res.x)
    if sign * f(qm) <= 0.0:
        return float(qm)
    return None


def eigenvalues(
    sys: BoxSystem,
    window: tuple[float, float] = (0.0, 1.0),
    max_count: int = 8,
    tol: float = 1e-12,
) -> Spectrum:
    """All eigenvalues in ``window`` (lowest ``max_count``) by scan and bisection."""
    emin, emax = window
    if not emin < emax:
        raise ValueError(f"empty energy window {window}")
    if not tol > 0:
        raise ValueError("tol must be positive")

    def f(q: float) -> float:
        return float(_spectral_array(sys, q_to_energy(q))[0])

    qmin, qmax = float(energy_to_q(emin)), float(energy_to_q(emax))
    step = math.pi / (4.0 * sys.length * (1 + sys.scan_complexity()))
    n = max(3, int(math.ceil((qmax - qmin) / step)) + 1)
    qs = np.linspace(qmin, qmax, n)
    fs = _spectral_array(sys, q_to_energy(qs))

    roots: list[float] = []
    warnings: list[str] = []
    for i in range(n - 1):
        if fs[i] == 0.0:
            roots.append(qs[i])
        elif fs[i] * fs[i + 1] < 0:
            roots.append(_bisect_q(f, qs[i], qs[i + 1], fs[i], tol))
    if fs[-1] == 0.0:
        roots.append(qs[-1])

    # |F| dipping toward zero without a sign change hints at two roots in one cell
    for i in range(1, n - 1):
        a, b, c = fs[i - 1], fs[i], fs[i + 1]
        if a * b <= 0 or b * c <= 0 or not (abs(b) < abs(a) and abs(b) < abs(c)):
            continue
        lo, hi = qs[i - 1], qs[i + 1]
        warnings.append(f"ScanTooCoarse: possible root pair in E=[{q_to_energy(lo):.9g}, {q_to_energy(hi):.9g}]")
        fine_q = np.linspace(lo, hi, 9)
        fine_f = _spectral_array(sys, q_to_energy(fine_q))
        found = []
        for j in range(8):
            if fine_f[j] * fine_f[j + 1] < 0:
                found.append(_bisect_q(f, fine_q[j], fine_q[j + 1], fine_f[j], tol))
        if not found:
            mid = _split_hidden_pair(f, lo, hi, math.copysign(1.0, b))
            if mid is not None:
                found = [
                    _bisect_q(f, lo, mid, a, tol) if f(mid) != 0 else mid,
                    _bisect_q(f, mid, hi, f(mid), tol) if f(mid) != 0 else mid,
                ]
        roots.extend(found)

    energies = sorted(float(q_to_energy(q)) for q in roots)
    unique: list[float] = []
    for e in energies:
        if emin <= e <= emax and (not unique or e - unique[-1] > 2 * tol):
            unique.append(e)
    return Spectrum(tuple(unique[:max_count]), step, (emin, emax), tuple(warnings))


# --- eigenfunctions ---------------------------------------------------------


@dataclass(frozen=True)
class EigenFunction:
    energy: float
    x: np.ndarray
    psi: np.ndarray
    boundary: BoundaryData
    site: float
    norm: float = field(default=1.0)

    @property
    def k(self) -> float:
        return math.sqrt(2.0 * abs(self.energy))


def _segment_norm(dpsi0: float, psi0: float, energy: float, d: float) -> float:
    """Integral of psi^2 over a free segment of length ``d``."""
    if d <= 0:
        return 0.0
    q = float(energy_to_q(energy))
    if q > 0:
        k = q
        a, b = psi0, dpsi0 / k
        return (
            a * a * (d / 2.0 + math.sin(2 * k * d) / (4 * k))
            + b * b * (d / 2.0 - math.sin(2 * k * d) / (4 * k))
            + a * b * math.sin(k * d) ** 2 / k
        )
    if q < 0:
        kap = -q
        a, b = psi0, dpsi0 / kap
        return (
            a * a * (d / 2.0 + math.sinh(2 * kap * d) / (4 * kap))
            + b * b * (math.sinh(2 * kap * d) / (4 * kap) - d / 2.0)
            + a * b * math.sinh(kap * d) ** 2 / kap
        )
    return psi0 * psi0 * d + psi0 * dpsi0 * d * d + dpsi0 * dpsi0 * d**3 / 3.0


def eigenfunction(
    sys: BoxSystem,
    energy: float,
    grid: Union[UniformGrid, Sequence[float], np.ndarray, None] = None,
    tol: float = 1e-12,
) -> EigenFunction:
    """Normalized piecewise-analytic eigenfunction sampled on ``grid``.

    At an interaction site the sample takes the right-hand limit.  Boundary
    data are read just outside the interaction: at the point site, or just
    left of the first spike and just right of the last spike of a train.
    """
    if not _is_eigenvalue(sys, energy, tol):
        raise NotAnEigenvalue(f"E={energy!r} is not an eigenvalue within {10 * tol:g}")
    if grid is None:
        grid = UniformGrid(-sys.length / 2.0, sys.length / 2000.0, 2001)
    x = grid.points if isinstance(grid, UniformGrid) else np.asarray(grid, dtype=float)
    e_arr = np.array([energy])

    _, _, history = _shoot(sys, e_arr, record=True)
    half = sys.length / 2.0
    d0, p0 = sys.left_bc.start_vector()
    starts = [(-half, float(d0), float(p0))]
    for pos, _, right in history:
        starts.append((pos, float(right[0][0]), float(right[1][0])))
    ends = [pos for pos, _, _ in history] + [half]

    norm2 = sum(_segment_norm(dp, p, energy, end - x0) for (x0, dp, p), end in zip(starts, ends))
    scale = 1.0 / math.sqrt(norm2)

    seg_starts = np.array([s[0] for s in starts])
    idx = np.clip(np.searchsorted(seg_starts, x, side="right") - 1, 0, len(starts) - 1)
    q = float(energy_to_q(energy))
    k = abs(q)
    psi = np.empty_like(x)
    for j, (x0, dp, p) in enumerate(starts):
        mask = idx == j
        if not np.any(mask):
            continue
        t = x[mask] - x0
        kt = k * t
        if q > 0:
            psi[mask] = p * np.cos(kt) + dp * t * np.sinc(kt / np.pi)
        elif q < 0:
            shc = np.where(kt == 0, 1.0, np.sinh(kt) / np.where(kt == 0, 1.0, kt))
            psi[mask] = p * np.cosh(kt) + dp * t * shc
        else:
            psi[mask] = p + dp * t
    psi *= scale

    bd = _boundary_data(sys, energy, history, starts)
    bd = BoundaryData(*(v * scale for v in (bd.psi_minus, bd.dpsi_minus, bd.psi_plus, bd.dpsi_plus)))
    return EigenFunction(float(energy), x, psi, bd, sys.site, norm2)


def _is_eigenvalue(sys: BoxSystem, energy: float, tol: float) -> bool:
    probe = np.array([energy - 10 * tol, energy, energy + 10 * tol])
    f = _spectral_array(sys, probe)
    return bool(f[1] == 0.0 or f[0] * f[1] <= 0 or f[1] * f[2] <= 0)


def _boundary_data(sys: BoxSystem, energy: float, history, starts) -> BoundaryData:
    e_arr = np.array([energy])
    if not history:
        # free box: continue the left-edge solution to the site
        x0, dp, p = starts[0]
        dpsi, psi = _propagate(np.array([dp]), np.array([p]), e_arr, sys.site - x0)
        return BoundaryData(float(psi[0]), float(dpsi[0]), float(psi[0]), float(dpsi[0]))
    _, left, _ = history[0]
    _, _, right = history[-1]
    return BoundaryData(float(left[1][0]), float(left[0][0]), float(right[1][0]), float(right[0][0]))
