"""Boundary-data extraction, connection-matrix fits and a -> 0 studies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .boundary import BoundaryData
from .connmat import ConnectionMatrix
from .errors import DegenerateInputs, IllConditionedFit, WindowOutOfRange
from .exact import BoxSystem, PointInteraction, Spectrum, eigenvalues, train_transfer
from .potential import RenormalizedFamily, family_at

__all__ = [
    "BoundaryData",
    "FitReport",
    "ConvergenceRow",
    "ConvergenceTable",
    "TransferProbe",
    "EigenvalueProbe",
    "extract_boundary_data",
    "fit_connection_matrix",
    "convergence_study",
    "degeneracy_gaps",
]


def _fit_side(x, psi, k, x0, lo, hi, at):
    mask = (x >= lo) & (x <= hi)
    if np.count_nonzero(mask) < 3:
        raise WindowOutOfRange(f"fit window [{lo:g}, {hi:g}] holds fewer than 3 samples")
    t = x[mask] - x0
    basis = np.column_stack([np.cos(k * t), np.sin(k * t)])
    normal = basis.T @ basis
    if k * (hi - lo) < 2 * math.pi / 8 and np.linalg.cond(normal) > 1e8:
        raise IllConditionedFit(f"window [{lo:g}, {hi:g}] too short for k={k:g}")
    (amp_c, amp_s), *_ = np.linalg.lstsq(basis, psi[mask], rcond=None)
    ta = at - x0
    value = amp_c * math.cos(k * ta) + amp_s * math.sin(k * ta)
    slope = k * (amp_s * math.cos(k * ta) - amp_c * math.sin(k * ta))
    return float(value), float(slope)


def extract_boundary_data(
    x: np.ndarray,
    psi: np.ndarray,
    k: float,
    x0: float = 0.0,
    exclusion: float = 0.0,
    fit_width: Optional[float] = None,
    anchor: float = 0.0,
) -> BoundaryData:
    """Continue the free solution on each side of the defect back to the defect.

    Samples in ``[x0 + exclusion, x0 + exclusion + fit_width]`` (and the
    mirror window on the left) are fitted to ``A cos k(x-x0) + B sin k(x-x0)``;
    the fit then gives psi and psi' at ``x0 + anchor`` (right) and
    ``x0 - anchor`` (left).  For a train of half-width ``a`` pass
    ``anchor=a`` to read the data at the outermost spikes; ``anchor=0``
    extrapolates both sides to the centre.
    """
    if not 0 <= anchor <= exclusion:
        raise ValueError("anchor must lie in [0, exclusion]")
    x = np.asarray(x, dtype=float)
    psi = np.asarray(psi, dtype=float)
    if not k > 0:
        raise ValueError("k must be positive")
    if fit_width is None:
        fit_width = 0.1 * (x[-1] - x[0])
    right = (x0 + exclusion, x0 + exclusion + fit_width)
    left = (x0 - exclusion - fit_width, x0 - exclusion)
    if left[0] < x[0] or right[1] > x[-1]:
        raise WindowOutOfRange(f"fit windows {left}, {right} leave the sampled range")
    psi_m, dpsi_m = _fit_side(x, psi, k, x0, *left, at=x0 - anchor)
    psi_p, dpsi_p = _fit_side(x, psi, k, x0, *right, at=x0 + anchor)
    return BoundaryData(psi_m, dpsi_m, psi_p, dpsi_p)


@dataclass(frozen=True)
class FitReport:
    fitted: np.ndarray
    residual: float
    det_deviation: float
    n_states: int

    @property
    def params(self) -> tuple[float, float, float, float]:
        """``(alpha, beta, gamma, delta)`` read off the raw fit."""
        t = self.fitted
        return (-t[0, 0], -t[0, 1], -t[1, 1], -t[1, 0])

    def to_dict(self) -> dict:
        alpha, beta, gamma, delta = self.params
        return {
            "fitted": self.fitted.tolist(),
            "alpha": alpha,
            "beta": beta,
            "gamma": gamma,
            "delta": delta,
            "residual": self.residual,
            "det_deviation": self.det_deviation,
            "n_states": self.n_states,
        }


def fit_connection_matrix(data: Sequence[BoundaryData]) -> FitReport:
    """Least-squares ``T`` with ``out_i ~ T in_i``; det is reported, not imposed."""
    if len(data) < 2:
        raise ValueError("need at least two states")
    x_in = np.array([d.in_vector() for d in data])
    y_out = np.array([d.out_vector() for d in data])
    rows = x_in / np.linalg.norm(x_in, axis=1, keepdims=True)
    sv = np.linalg.svd(rows, compute_uv=False)
    if sv[-1] < 1e-6 * sv[0]:
        raise DegenerateInputs("incoming boundary vectors are parallel; add more states")
    t_transpose, *_ = np.linalg.lstsq(x_in, y_out, rcond=None)
    fitted = t_transpose.T
    err = y_out - x_in @ t_transpose
    weight = np.sum(x_in**2, axis=1) + np.sum(y_out**2, axis=1)
    residual = float(np.sqrt(np.mean(np.sum(err**2, axis=1) / weight)))
    return FitReport(fitted, residual, abs(float(np.linalg.det(fitted)) - 1.0), len(data))


# --- convergence studies ----------------------------------------------------


@dataclass(frozen=True)
class TransferProbe:
    energy: float = 0.045


@dataclass(frozen=True)
class EigenvalueProbe:
    index: int = 2  # 1-based
    length: float = 10.0
    window: tuple[float, float] = (0.0, 1.0)
    tol: float = 1e-12


Probe = Union[TransferProbe, EigenvalueProbe]


@dataclass(frozen=True)
class ConvergenceRow:
    a: float
    label: str
    observable: float
    reference: float
    abs_error: float
    rel_error: float


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple[ConvergenceRow, ...]
    kind: str
    columns: tuple[str, ...] = field(
        default=("a", "observable", "reference", "abs_error", "rel_error"), init=False
    )

    def errors(self) -> np.ndarray:
        return np.array([r.abs_error for r in self.rows])

    def is_monotone(self) -> bool:
        err = self.errors()
        return bool(np.all(np.diff(err) < 0))


def convergence_study(
    family: RenormalizedFamily,
    a_list: Sequence[float],
    reference: Union[ConnectionMatrix, Spectrum, float, None] = None,
    probe: Probe = TransferProbe(),
) -> ConvergenceTable:
    """Tabulate how a family's train approaches its point-interaction limit."""
    a_list = [float(a) for a in a_list]
    if not a_list or any(a <= 0 for a in a_list) or any(b >= a for a, b in zip(a_list, a_list[1:])):
        raise ValueError("a_list must be positive and strictly decreasing")
    rows = []
    if isinstance(probe, TransferProbe):
        target = reference if isinstance(reference, ConnectionMatrix) else family.target()
        ref = target.as_array()
        ref_scale = float(np.max(np.abs(ref)))
        for a in a_list:
            m = train_transfer(family_at(family, a), probe.energy).m
            dev = np.abs(m - ref)
            i, j = np.unravel_index(np.argmax(dev), dev.shape)
            rows.append(
                ConvergenceRow(
                    a, f"T[{i + 1},{j + 1}]", float(m[i, j]), float(ref[i, j]),
                    float(dev[i, j]), float(dev[i, j]) / ref_scale,
                )
            )
        return ConvergenceTable(tuple(rows), "transfer")

    idx = probe.index - 1
    if isinstance(reference, Spectrum):
        ref_value = reference.eigenvalues[idx]
    elif isinstance(reference, (int, float)):
        ref_value = float(reference)
    else:
        target = reference if isinstance(reference, ConnectionMatrix) else family.target()
        point = BoxSystem(probe.length, interaction=PointInteraction(target))
        ref_value = eigenvalues(point, probe.window, probe.index, probe.tol).eigenvalues[idx]
    for a in a_list:
        sys = BoxSystem(probe.length, interaction=family_at(family, a))
        value = eigenvalues(sys, probe.window, probe.index, probe.tol).eigenvalues[idx]
        err = abs(value - ref_value)
        rows.append(ConvergenceRow(a, f"E{probe.index}", value, ref_value, err, err / abs(ref_value)))
    return ConvergenceTable(tuple(rows), "eigenvalue")


def degeneracy_gaps(spec: Union[Spectrum, Sequence[float]]) -> list[tuple[int, float]]:
    """Relative splitting ``(E_2i - E_2i-1) / E_2i-1`` of consecutive pairs."""
    values = list(spec.eigenvalues if isinstance(spec, Spectrum) else spec)
    if len(values) < 2:
        raise ValueError("need at least two eigenvalues")
    return [
        (i // 2 + 1, (values[i + 1] - values[i]) / values[i])
        for i in range(0, len(values) - 1, 2)
    ]
