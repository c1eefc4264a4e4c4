"""Point interactions on the line realized as renormalized delta-function trains."""

__version__ = "0.1.0"

from .boundary import BoundaryData
from .connmat import (
    BoundaryKind,
    ConnectionMatrix,
    classify,
    compose,
    decompose_general,
    from_delta_strength,
    from_epsilon_strength,
    make_connection,
)
from .exact import BoxSystem, PointInteraction, eigenfunction, eigenvalues, train_transfer
from .potential import Chi3, Chi5, Chi5z, Constant, DeltaTrain, Epsilon, family_at, smear, xi_train

__all__ = [
    "BoundaryData",
    "BoundaryKind",
    "BoxSystem",
    "Chi3",
    "Chi5",
    "Chi5z",
    "ConnectionMatrix",
    "Constant",
    "DeltaTrain",
    "Epsilon",
    "PointInteraction",
    "classify",
    "compose",
    "decompose_general",
    "eigenfunction",
    "eigenvalues",
    "family_at",
    "from_delta_strength",
    "from_epsilon_strength",
    "make_connection",
    "smear",
    "train_transfer",
    "xi_train",
]
