"""Delta-function trains, renormalized families and their smeared versions.

Units: hbar = m = 1, so the Hamiltonian is ``-1/2 d^2/dx^2 + V``.  A spike
``(x_j, v_j)`` contributes ``v_j * delta(x - x_j)`` to ``V`` and makes psi'
jump by ``2 v_j psi(x_j)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .connmat import (
    CONSTRUCTION_TOL,
    ConnectionMatrix,
    from_delta_strength,
    from_epsilon_strength,
    make_connection,
)
from .errors import (
    GridTooCoarse,
    LawConstraintViolation,
    NonFinite,
    NonPositiveSeparation,
    NonPositiveWidth,
    OverlappingSupports,
    SingularDenominator,
)

# h <= s / MIN_CELLS_PER_WIDTH keeps the bump resolved (N=8191 in a box of 10 with s=0.012 gives 9.8)
MIN_CELLS_PER_WIDTH = 8.0


@dataclass(frozen=True)
class DeltaSpike:
    position: float
    strength: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.position) and math.isfinite(self.strength)):
            raise NonFinite(f"spike {self!r} is not finite")


@dataclass(frozen=True)
class DeltaTrain:
    spikes: tuple[DeltaSpike, ...]

    def __post_init__(self) -> None:
        if not self.spikes:
            raise ValueError("a delta train needs at least one spike")
        pos = [s.position for s in self.spikes]
        if any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError(f"spike positions must be strictly increasing: {pos}")

    @classmethod
    def from_pairs(cls, pairs) -> "DeltaTrain":
        return cls(tuple(DeltaSpike(float(p), float(v)) for p, v in pairs))

    @property
    def positions(self) -> np.ndarray:
        return np.array([s.position for s in self.spikes])

    @property
    def strengths(self) -> np.ndarray:
        return np.array([s.strength for s in self.spikes])

    @property
    def total_strength(self) -> float:
        return float(sum(s.strength for s in self.spikes))

    @property
    def extent(self) -> tuple[float, float]:
        return self.spikes[0].position, self.spikes[-1].position

    def min_spacing(self) -> float:
        pos = self.positions
        return float(np.min(np.diff(pos))) if len(pos) > 1 else math.inf

    def mirrored(self, about: float = 0.0) -> "DeltaTrain":
        """Spatial reflection ``x -> 2*about - x``."""
        return DeltaTrain(
            tuple(DeltaSpike(2.0 * about - s.position, s.strength) for s in reversed(self.spikes))
        )

    def shifted(self, dx: float) -> "DeltaTrain":
        return DeltaTrain(tuple(DeltaSpike(s.position + dx, s.strength) for s in self.spikes))


def _check_separation(a: float) -> None:
    if not a > 0 or not math.isfinite(a):
        raise NonPositiveSeparation(f"separation a must be positive, got {a!r}")


def xi_train(v: float, u: float, a: float) -> DeltaTrain:
    """Three spikes ``v, u, v`` at ``-a, 0, a``."""
    _check_separation(a)
    return DeltaTrain.from_pairs([(-a, v), (0.0, u), (a, v)])


def train_from_strengths(strengths, a: float) -> DeltaTrain:
    """Equally spaced spikes centred on the origin with spacing ``a``."""
    n = len(strengths)
    offset = (n - 1) / 2.0
    return DeltaTrain.from_pairs([((j - offset) * a, v) for j, v in enumerate(strengths)])


# --- renormalized families -------------------------------------------------


def _check_constraint(alpha, beta, gamma, delta_p) -> None:
    residual = alpha * gamma - beta * delta_p - 1.0
    if abs(residual) > CONSTRUCTION_TOL:
        raise LawConstraintViolation(
            f"alpha*gamma - beta*delta - 1 = {residual:g}; must vanish"
        )


@dataclass(frozen=True)
class Constant:
    """Fixed strengths; collapses to an ordinary delta of strength ``2 v0 + u0``."""

    v0: float
    u0: float

    def strengths(self, a: float) -> tuple[float, ...]:
        return (self.v0, self.u0, self.v0)

    def target(self) -> ConnectionMatrix:
        return from_delta_strength(2.0 * self.v0 + self.u0)


@dataclass(frozen=True)
class Epsilon:
    """``v(a) = 1/(2c) - 1/(2a)``, ``u(a) = -1/a + c/a^2``: psi jumps by ``2 c psi'``."""

    c: float

    def __post_init__(self) -> None:
        if self.c == 0 or not math.isfinite(self.c):
            raise LawConstraintViolation("Epsilon law needs finite nonzero c")

    def strengths(self, a: float) -> tuple[float, ...]:
        c = self.c
        flank = 1.0 / (2.0 * c) - 1.0 / (2.0 * a)
        return (flank, -1.0 / a + c / a**2, flank)

    def target(self) -> ConnectionMatrix:
        return from_epsilon_strength(self.c)


@dataclass(frozen=True)
class Chi3:
    """Three-spike realization of a general interaction with ``delta != 0``."""

    alpha: float
    beta: float
    gamma: float
    delta: float

    def __post_init__(self) -> None:
        if self.delta == 0:
            raise LawConstraintViolation("Chi3 requires delta != 0")
        _check_constraint(self.alpha, self.beta, self.gamma, self.delta)

    def strengths(self, a: float) -> tuple[float, ...]:
        al, ga, de = self.alpha, self.gamma, self.delta
        return (
            (ga - 1.0) / (2.0 * de) - 1.0 / (2.0 * a),
            -1.0 / a - de / (2.0 * a**2),
            (al - 1.0) / (2.0 * de) - 1.0 / (2.0 * a),
        )

    def target(self) -> ConnectionMatrix:
        return make_connection(self.alpha, self.beta, self.gamma, self.delta)


@dataclass(frozen=True)
class Chi5:
    """Five-spike realization for ``delta = 0, beta != 0`` (so ``alpha*gamma = 1``)."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        if self.beta == 0:
            raise LawConstraintViolation("Chi5 requires beta != 0")
        _check_constraint(self.alpha, self.beta, self.gamma, 0.0)
        if self.alpha == -1.0 or self.gamma == -1.0:
            # the outer epsilon factors degenerate to c = 0; use Constant instead
            raise LawConstraintViolation("Chi5 requires alpha != -1 and gamma != -1")

    def strengths(self, a: float) -> tuple[float, ...]:
        al, be, ga = self.alpha, self.beta, self.gamma
        return (
            be / (al + 1.0) - 1.0 / (2.0 * a),
            -1.0 / a + (al + 1.0) / (2.0 * be * a**2),
            be / (al + 1.0) + be / (ga + 1.0) - be / 2.0 - 1.0 / a,
            -1.0 / a + (ga + 1.0) / (2.0 * be * a**2),
            be / (ga + 1.0) - 1.0 / (2.0 * a),
        )

    def target(self) -> ConnectionMatrix:
        return make_connection(self.alpha, self.beta, self.gamma, 0.0)


@dataclass(frozen=True)
class Chi5z:
    """Five-spike realization of the diagonal case ``beta = delta = 0``."""

    alpha: float
    gamma: float

    def __post_init__(self) -> None:
        _check_constraint(self.alpha, 0.0, self.gamma, 0.0)

    @property
    def rho(self) -> float:
        return math.sqrt(abs(self.alpha))

    def strengths(self, a: float) -> tuple[float, ...]:
        rho = self.rho
        pm = 1.0 if self.alpha < 0 else -1.0
        return (
            pm / (2.0 * rho) - 1.0 / (2.0 * a),
            -1.0 / a + pm * rho / (2.0 * a**2),
            -rho / 2.0 + pm / (2.0 * rho) - 1.0 / a,
            -1.0 / a - 1.0 / (2.0 * rho * a**2),
            -rho / 2.0 - 1.0 / (2.0 * a),
        )

    def target(self) -> ConnectionMatrix:
        return make_connection(self.alpha, 0.0, self.gamma, 0.0)


RenormalizedFamily = Union[Constant, Epsilon, Chi3, Chi5, Chi5z]


def family_at(family: RenormalizedFamily, a: float) -> DeltaTrain:
    """Realize ``family`` at spike separation ``a``."""
    _check_separation(a)
    return train_from_strengths(family.strengths(a), a)


def bd_coefficients(v: float, u: float, a: float) -> tuple[float, float]:
    """Low-energy jump coefficients ``(B, D)`` of the symmetric three-spike train.

    ``psi'(a+) - psi'(-a-) = B (psi(a) + psi(-a))`` and
    ``psi(a) - psi(-a) = D (psi'(a+) + psi'(-a-))``.
    """
    _check_separation(a)
    den_b = 1.0 + a * u
    den_d = 2.0 * a * v + 1.0
    if abs(den_b) < 1e-14 or abs(den_d) < 1e-14:
        raise SingularDenominator(f"1+au={den_b:g}, 2av+1={den_d:g}")
    return 2.0 * v + u / den_b, a / den_d


# --- finite-range smearing --------------------------------------------------


@dataclass(frozen=True)
class UniformGrid:
    x0: float
    h: float
    n: int

    def __post_init__(self) -> None:
        if not self.h > 0 or self.n < 2:
            raise ValueError(f"invalid grid h={self.h}, n={self.n}")

    @property
    def points(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.n)

    @classmethod
    def box_interior(cls, length: float, n: int) -> "UniformGrid":
        """The ``n`` interior nodes of ``[-L/2, L/2]`` with spacing ``L/(n+1)``."""
        h = length / (n + 1)
        return cls(-length / 2.0 + h, h, n)


@dataclass(frozen=True)
class SampledPotential:
    grid: UniformGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        if len(self.values) != self.grid.n:
            raise ValueError("values do not match grid size")
        if not np.all(np.isfinite(self.values)):
            raise NonFinite("sampled potential has non-finite values")

    def integral(self) -> float:
        return float(np.sum(self.values) * self.grid.h)


def bump(s: float) -> Callable[[np.ndarray], np.ndarray]:
    """Unit-area bump ``(2/s) cos^2(pi x / s)`` supported on ``|x| < s/2``."""
    if not s > 0:
        raise NonPositiveWidth(f"bump width must be positive, got {s!r}")

    def delta_s(x):
        x = np.asarray(x, dtype=float)
        inside = np.abs(x) < s / 2.0
        return np.where(inside, (2.0 / s) * np.cos(np.pi * x / s) ** 2, 0.0)

    return delta_s


def bump_antiderivative(x, s: float) -> np.ndarray:
    """Integral of the bump from ``-inf`` to ``x``, minus 1/2."""
    x = np.clip(np.asarray(x, dtype=float), -s / 2.0, s / 2.0)
    return x / s + np.sin(2.0 * np.pi * x / s) / (2.0 * np.pi)


def smear(train: DeltaTrain, s: float, grid: UniformGrid) -> SampledPotential:
    """Replace each spike by a bump of width ``s``, cell-averaged on ``grid``."""
    if not s > 0:
        raise NonPositiveWidth(f"bump width must be positive, got {s!r}")
    if s >= train.min_spacing():
        raise OverlappingSupports(f"s={s} >= minimum spike spacing {train.min_spacing()}")
    if grid.h * MIN_CELLS_PER_WIDTH > s:
        raise GridTooCoarse(f"h={grid.h:g} exceeds s/{MIN_CELLS_PER_WIDTH:g}={s / MIN_CELLS_PER_WIDTH:g}")
    x = grid.points
    lo_edge, hi_edge = x[0] - grid.h / 2.0, x[-1] + grid.h / 2.0
    lo_pos, hi_pos = train.extent
    if lo_pos - s / 2.0 < lo_edge or hi_pos + s / 2.0 > hi_edge:
        raise ValueError("grid does not cover the smeared supports")
    values = np.zeros(grid.n)
    for spike in train.spikes:
        left = bump_antiderivative(x - grid.h / 2.0 - spike.position, s)
        right = bump_antiderivative(x + grid.h / 2.0 - spike.position, s)
        values += spike.strength * (right - left) / grid.h
    return SampledPotential(grid, values)
