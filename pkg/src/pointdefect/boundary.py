from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class BoundaryData:
    """Values of psi and psi' on either side of the defect site."""

    psi_minus: float
    dpsi_minus: float
    psi_plus: float
    dpsi_plus: float

    def scale(self, k: float) -> float:
        """Common magnitude ``max(|psi+-|, |psi'+-|/k)`` used for relative checks."""
        return max(
            abs(self.psi_minus),
            abs(self.psi_plus),
            abs(self.dpsi_minus) / k,
            abs(self.dpsi_plus) / k,
        )

    def in_vector(self) -> tuple[float, float]:
        return (self.dpsi_minus, self.psi_minus)

    def out_vector(self) -> tuple[float, float]:
        return (self.dpsi_plus, self.psi_plus)

    def is_finite(self) -> bool:
        return all(
            math.isfinite(v)
            for v in (self.psi_minus, self.dpsi_minus, self.psi_plus, self.dpsi_plus)
        )
