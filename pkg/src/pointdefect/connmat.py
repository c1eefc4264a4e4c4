"""Connection matrices of point interactions on the line.

A point interaction at ``x0`` is fixed by the real 2x2 matrix ``T`` that
carries the boundary vector ``(psi'(x0-), psi(x0-))`` to
``(psi'(x0+), psi(x0+))``.  Self-adjointness with time-reversal symmetry
makes ``T`` unimodular.  The customary parametrization writes

    T = [[-alpha, -beta], [-delta, -gamma]],   alpha*gamma - beta*delta = 1,

and this module keeps the entries of ``T`` as the canonical data and
derives ``(alpha, beta, gamma, delta)`` from them.

Two one-parameter subfamilies generate everything:

* ``DeltaStep(v)``  -> ``[[1, 2v], [0, 1]]``, the ordinary delta of strength v
  (continuous psi, psi' jumps by ``2 v psi``);
* ``EpsilonStep(c)`` -> ``[[1, 0], [2c, 1]]``, the discontinuity-inducing
  interaction (continuous psi', psi jumps by ``2 c psi'``).

:func:`decompose_general` writes an arbitrary ``T`` as a short product of
these, listed in the order a wave travelling toward ``+x`` meets them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import ConstraintViolation, NonFinite

CONSTRUCTION_TOL = 1e-9
CLASSIFY_TOL = 1e-12


def _check_finite(*values: float) -> None:
    for value in values:
        if not math.isfinite(value):
            raise NonFinite(f"non-finite value {value!r}")


class BoundaryKind(str, Enum):
    """Boundary condition at a box edge (or a decoupling limit at the defect)."""

    DIRICHLET = "dirichlet"  # psi = 0
    NEUMANN = "neumann"  # psi' = 0

    def start_vector(self) -> tuple[float, float]:
        """A nonzero (psi', psi) compatible with this condition."""
        return (1.0, 0.0) if self is BoundaryKind.DIRICHLET else (0.0, 1.0)


@dataclass(frozen=True)
class ConnectionMatrix:
    """Unimodular transfer relation ``(psi'+, psi+) = T (psi'-, psi-)``."""

    t11: float
    t12: float
    t21: float
    t22: float

    def __post_init__(self) -> None:
        _check_finite(self.t11, self.t12, self.t21, self.t22)
        # relative to entry size: products of large factors lose absolute digits
        scale = max(1.0, abs(self.t11 * self.t22), abs(self.t12 * self.t21))
        if abs(self.det - 1.0) > CONSTRUCTION_TOL * scale:
            raise ConstraintViolation(f"det T = {self.det!r}, expected 1")

    @classmethod
    def from_array(cls, m: Union[np.ndarray, Sequence[Sequence[float]]]) -> "ConnectionMatrix":
        m = np.asarray(m, dtype=float)
        return cls(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))

    @property
    def det(self) -> float:
        return self.t11 * self.t22 - self.t12 * self.t21

    @property
    def alpha(self) -> float:
        return -self.t11

    @property
    def beta(self) -> float:
        return -self.t12

    @property
    def delta_p(self) -> float:
        return -self.t21

    @property
    def gamma(self) -> float:
        return -self.t22

    def params(self) -> tuple[float, float, float, float]:
        """``(alpha, beta, gamma, delta)``."""
        return (self.alpha, self.beta, self.gamma, self.delta_p)

    def as_array(self) -> np.ndarray:
        return np.array([[self.t11, self.t12], [self.t21, self.t22]])

    def apply(self, dpsi: float, psi: float) -> tuple[float, float]:
        """Map left boundary data ``(psi'-, psi-)`` to ``(psi'+, psi+)``."""
        return (self.t11 * dpsi + self.t12 * psi, self.t21 * dpsi + self.t22 * psi)

    def is_identity(self, tol: float = CLASSIFY_TOL) -> bool:
        return (
            abs(self.t11 - 1.0) <= tol
            and abs(self.t22 - 1.0) <= tol
            and abs(self.t12) <= tol
            and abs(self.t21) <= tol
        )


IDENTITY = ConnectionMatrix(1.0, 0.0, 0.0, 1.0)


def make_connection(
    alpha: float, beta: float, gamma: float, delta_p: float, tol: float = CONSTRUCTION_TOL
) -> ConnectionMatrix:
    """Build ``T = [[-alpha, -beta], [-delta, -gamma]]`` after checking the constraint."""
    _check_finite(alpha, beta, gamma, delta_p)
    residual = alpha * gamma - beta * delta_p - 1.0
    if abs(residual) > tol:
        raise ConstraintViolation(
            f"alpha*gamma - beta*delta = {residual + 1.0!r}, expected 1 (tol {tol:g})"
        )
    return ConnectionMatrix(-alpha, -beta, -delta_p, -gamma)


def from_delta_strength(v: float) -> ConnectionMatrix:
    _check_finite(v)
    return ConnectionMatrix(1.0, 2.0 * v, 0.0, 1.0)


def from_epsilon_strength(c: float) -> ConnectionMatrix:
    _check_finite(c)
    return ConnectionMatrix(1.0, 0.0, 2.0 * c, 1.0)


def compose(first: ConnectionMatrix, second: ConnectionMatrix) -> ConnectionMatrix:
    """Interaction ``first`` followed (further along +x) by ``second``."""
    return ConnectionMatrix.from_array(second.as_array() @ first.as_array())


def compose_all(matrices: Iterable[ConnectionMatrix]) -> ConnectionMatrix:
    result = IDENTITY
    for m in matrices:
        result = compose(result, m)
    return result


@dataclass(frozen=True)
class DeltaStep:
    v: float

    def matrix(self) -> ConnectionMatrix:
        return from_delta_strength(self.v)


@dataclass(frozen=True)
class EpsilonStep:
    c: float

    def matrix(self) -> ConnectionMatrix:
        return from_epsilon_strength(self.c)


Factor = Union[DeltaStep, EpsilonStep]


@dataclass(frozen=True)
class DeltaFactorization:
    """Primitive factors in order of encounter along +x (rightmost matrix first)."""

    factors: tuple[Factor, ...]
    branch: str

    def __len__(self) -> int:
        return len(self.factors)

    def product(self) -> np.ndarray:
        result = np.eye(2)
        for f in self.factors:
            result = f.matrix().as_array() @ result
        return result


def decompose_general(t: ConnectionMatrix) -> DeltaFactorization:
    """Factor ``t`` into delta and epsilon steps.

    Branches: ``delta != 0`` gives delta-epsilon-delta; ``delta == 0,
    beta != 0`` gives epsilon-delta-epsilon; the diagonal case uses the
    six-factor form built on ``rho = sqrt(|alpha|)``.  The identity yields
    an empty factorization.
    """
    alpha, beta, gamma, delta_p = t.params()
    if delta_p != 0.0:
        return DeltaFactorization(
            (
                DeltaStep((gamma + 1.0) / (2.0 * delta_p)),
                EpsilonStep(-delta_p / 2.0),
                DeltaStep((alpha + 1.0) / (2.0 * delta_p)),
            ),
            "delta",
        )
    if beta != 0.0:
        return DeltaFactorization(
            (
                EpsilonStep((alpha + 1.0) / (2.0 * beta)),
                DeltaStep(-beta / 2.0),
                EpsilonStep((gamma + 1.0) / (2.0 * beta)),
            ),
            "beta",
        )
    if t.is_identity(tol=0.0):
        return DeltaFactorization((), "identity")
    rho = math.sqrt(abs(alpha))
    sgn = 1.0 if alpha < 0 else -1.0  # upper sign of the composite pair for alpha < 0
    return DeltaFactorization(
        (
            DeltaStep(-sgn / (2.0 * rho)),
            EpsilonStep(sgn * rho / 2.0),
            DeltaStep(-sgn / (2.0 * rho)),
            DeltaStep(rho / 2.0),
            EpsilonStep(-1.0 / (2.0 * rho)),
            DeltaStep(rho / 2.0),
        ),
        "diagonal",
    )


@dataclass(frozen=True)
class InteractionClass:
    tag: str  # "Free" | "DeltaOnly" | "EpsilonOnly" | "General"
    v: float | None = None
    c: float | None = None


def classify(t: ConnectionMatrix, tol: float = CLASSIFY_TOL) -> InteractionClass:
    if t.is_identity(tol):
        return InteractionClass("Free")
    unit_diag = abs(t.t11 - 1.0) <= tol and abs(t.t22 - 1.0) <= tol
    if unit_diag and abs(t.t21) <= tol:
        return InteractionClass("DeltaOnly", v=t.t12 / 2.0)
    if unit_diag and abs(t.t12) <= tol:
        return InteractionClass("EpsilonOnly", c=t.t21 / 2.0)
    return InteractionClass("General")


# --- seeded property suite ---------------------------------------------------

BRANCHES = ("delta", "beta", "diagonal_neg", "diagonal_pos")


def random_connection(rng: np.random.Generator, branch: str) -> ConnectionMatrix:
    """Random unimodular matrix falling into the requested factorization branch."""
    if branch == "delta":
        alpha, gamma = rng.uniform(-3.0, 3.0, size=2)
        delta_p = rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 3.0)
        beta = (alpha * gamma - 1.0) / delta_p
        return ConnectionMatrix(-alpha, -beta, -delta_p, -gamma)
    if branch == "beta":
        alpha = rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 3.0)
        beta = rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 3.0)
        return ConnectionMatrix(-alpha, -beta, 0.0, -1.0 / alpha)
    if branch in ("diagonal_neg", "diagonal_pos"):
        alpha = rng.uniform(0.1, 10.0) * (-1.0 if branch == "diagonal_neg" else 1.0)
        return ConnectionMatrix(-alpha, 0.0, 0.0, -1.0 / alpha)
    raise ValueError(f"unknown branch {branch!r}")


PINNED = ((-2.0, 1.0, -1.0, 1.0), ((2.0, -1.0), (-1.0, 1.0)))


def identity_suite(seed: int, trials: int) -> dict:
    """Max reconstruction errors of :func:`decompose_general` per branch.

    Also checks associativity of :func:`compose` and the pinned
    ``(alpha, beta, gamma, delta) = (-2, 1, -1, 1)`` case.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    report: dict = {"seed": seed, "trials": trials, "branches": {}}
    for branch in BRANCHES:
        worst = 0.0
        lengths = set()
        for _ in range(trials):
            t = random_connection(rng, branch)
            fac = decompose_general(t)
            lengths.add(len(fac))
            worst = max(worst, float(np.max(np.abs(fac.product() - t.as_array()))))
        report["branches"][branch] = {"max_error": worst, "factor_counts": sorted(lengths)}

    worst_assoc = 0.0
    worst_det = 0.0
    for _ in range(trials):
        a, b, c = (random_connection(rng, BRANCHES[i % 4]) for i in rng.integers(0, 4, size=3))
        left = compose(compose(a, b), c).as_array()
        right = compose(a, compose(b, c)).as_array()
        scale = max(1.0, float(np.max(np.abs(left))))
        worst_assoc = max(worst_assoc, float(np.max(np.abs(left - right))) / scale)
        worst_det = max(worst_det, abs(compose(a, b).det - 1.0))
    report["associativity"] = {"max_error": worst_assoc}
    report["determinant"] = {"max_error": worst_det}

    params, expected = PINNED
    t = make_connection(*params)
    fac = decompose_general(t)
    pinned_err = max(
        float(np.max(np.abs(t.as_array() - np.array(expected)))),
        float(np.max(np.abs(fac.product() - np.array(expected)))),
    )
    report["pinned"] = {"params": list(params), "max_error": pinned_err}
    errors = [b["max_error"] for b in report["branches"].values()]
    errors += [worst_assoc, worst_det, pinned_err]
    report["passed"] = bool(max(errors) < 1e-10)
    return report
