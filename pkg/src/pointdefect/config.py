"""Run configuration: a TOML file with ``box``, ``interaction``, ``solver`` and ``output`` tables.

Example::

    [box]
    length = 10.0
    left_bc = "dirichlet"
    right_bc = "dirichlet"

    [interaction]
    kind = "epsilon"      # free | delta | epsilon | chi | train | family
    c = 5.0
    a = 0.333             # 0: ideal point interaction
    s = 0.0               # 0: ideal deltas (exact solver); > 0: smeared (fd)

    [solver]
    method = "exact"      # exact | fd
    grid_points = 8191
    energy_window = [0.0, 1.0]
    max_states = 4
    tolerance = 1e-12
    wavefunctions = false

    [output]
    format = "csv"        # csv | json
    path = "spectrum.csv"

Interaction parameters by kind: ``delta``: ``v``; ``epsilon``: ``c``;
``chi``: ``alpha, beta, gamma, delta``; ``train``: ``positions`` and
``strengths`` lists; ``family``: ``law`` (constant | epsilon | chi3 | chi5 |
chi5z) plus that law's parameters (``v0, u0`` / ``c`` / ``alpha, beta,
gamma, delta``).  ``x0`` shifts the interaction (default 0).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .connmat import BoundaryKind, ConnectionMatrix, make_connection
from .errors import ConfigError, PointDefectError
from .potential import (
    Chi3,
    Chi5,
    Chi5z,
    Constant,
    DeltaTrain,
    Epsilon,
    RenormalizedFamily,
    family_at,
)

KINDS = ("free", "delta", "epsilon", "chi", "train", "family")
LAWS = ("constant", "epsilon", "chi3", "chi5", "chi5z")


@dataclass
class BoxConfig:
    length: float = 10.0
    left_bc: str = "dirichlet"
    right_bc: str = "dirichlet"


@dataclass
class InteractionConfig:
    kind: str = "free"
    parameters: dict = field(default_factory=dict)
    a: float = 0.0
    s: float = 0.0
    x0: float = 0.0


@dataclass
class SolverConfig:
    method: str = "exact"
    grid_points: int = 8191
    energy_window: tuple = (0.0, 1.0)
    max_states: int = 4
    tolerance: float = 1e-12
    wavefunctions: bool = False


@dataclass
class OutputConfig:
    format: str = "csv"
    path: Optional[str] = None


@dataclass
class RunConfig:
    box: BoxConfig = field(default_factory=BoxConfig)
    interaction: InteractionConfig = field(default_factory=InteractionConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def echo(self) -> dict:
        d = asdict(self)
        d["solver"]["energy_window"] = list(d["solver"]["energy_window"])
        return d


def _number(section: dict, key: str, where: str, default=None, integer: bool = False):
    if key not in section:
        if default is None:
            raise ConfigError(f"{where}.{key}: missing")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {value!r}")
    if integer:
        if not isinstance(value, int):
            raise ConfigError(f"{where}.{key}: expected an integer")
        return value
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError(f"{where}.{key}: must be finite")
    return value


def _choice(section: dict, key: str, where: str, options, default):
    value = section.get(key, default)
    if value not in options:
        raise ConfigError(f"{where}.{key}: expected one of {list(options)}, got {value!r}")
    return value


_PARAMS = {
    "free": (),
    "delta": ("v",),
    "epsilon": ("c",),
    "chi": ("alpha", "beta", "gamma", "delta"),
}
_LAW_PARAMS = {
    "constant": ("v0", "u0"),
    "epsilon": ("c",),
    "chi3": ("alpha", "beta", "gamma", "delta"),
    "chi5": ("alpha", "beta", "gamma"),
    "chi5z": ("alpha", "gamma"),
}


def parse_config(data: dict) -> RunConfig:
    """Validate a config mapping; every error names the offending field."""
    for name in data:
        if name not in ("box", "interaction", "solver", "output"):
            raise ConfigError(f"{name}: unknown section")
    box_d = data.get("box", {})
    box = BoxConfig(
        length=_number(box_d, "length", "box", 10.0),
        left_bc=_choice(box_d, "left_bc", "box", ("dirichlet", "neumann"), "dirichlet"),
        right_bc=_choice(box_d, "right_bc", "box", ("dirichlet", "neumann"), "dirichlet"),
    )
    if box.length <= 0:
        raise ConfigError("box.length: must be positive")

    it_d = data.get("interaction", {})
    kind = _choice(it_d, "kind", "interaction", KINDS, "free")
    params: dict[str, Any] = {}
    if kind in _PARAMS:
        for key in _PARAMS[kind]:
            params[key] = _number(it_d, key, "interaction")
    elif kind == "family":
        law = _choice(it_d, "law", "interaction", LAWS, None)
        params["law"] = law
        for key in _LAW_PARAMS[law]:
            params[key] = _number(it_d, key, "interaction")
    else:
        for key in ("positions", "strengths"):
            values = it_d.get(key)
            if not isinstance(values, list) or not values:
                raise ConfigError(f"interaction.{key}: expected a non-empty list of numbers")
            if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in values):
                raise ConfigError(f"interaction.{key}: expected numbers")
            params[key] = [float(v) for v in values]
        if len(params["positions"]) != len(params["strengths"]):
            raise ConfigError("interaction.strengths: length differs from interaction.positions")
    interaction = InteractionConfig(
        kind=kind,
        parameters=params,
        a=_number(it_d, "a", "interaction", 0.0),
        s=_number(it_d, "s", "interaction", 0.0),
        x0=_number(it_d, "x0", "interaction", 0.0),
    )
    if interaction.a < 0:
        raise ConfigError("interaction.a: must be >= 0")
    if interaction.s < 0:
        raise ConfigError("interaction.s: must be >= 0")
    if kind == "chi":
        p = params
        if abs(p["alpha"] * p["gamma"] - p["beta"] * p["delta"] - 1.0) > 1e-9:
            raise ConfigError("interaction.alpha: chi parameters violate alpha*gamma - beta*delta = 1")
    if kind == "family" and interaction.a <= 0:
        raise ConfigError("interaction.a: family interactions need a > 0")

    sv_d = data.get("solver", {})
    window = sv_d.get("energy_window", [0.0, 1.0])
    if (
        not isinstance(window, list)
        or len(window) != 2
        or any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in window)
        or not window[0] < window[1]
    ):
        raise ConfigError("solver.energy_window: expected [Emin, Emax] with Emin < Emax")
    solver = SolverConfig(
        method=_choice(sv_d, "method", "solver", ("exact", "fd"), "exact"),
        grid_points=_number(sv_d, "grid_points", "solver", 8191, integer=True),
        energy_window=(float(window[0]), float(window[1])),
        max_states=_number(sv_d, "max_states", "solver", 4, integer=True),
        tolerance=_number(sv_d, "tolerance", "solver", 1e-12),
        wavefunctions=bool(sv_d.get("wavefunctions", False)),
    )
    if solver.max_states < 1:
        raise ConfigError("solver.max_states: must be >= 1")
    if solver.tolerance <= 0:
        raise ConfigError("solver.tolerance: must be positive")
    if solver.grid_points < 3:
        raise ConfigError("solver.grid_points: must be >= 3")
    if solver.method == "fd":
        if kind != "free" and interaction.s <= 0:
            raise ConfigError("interaction.s: fd requires s>0")
        if kind in ("epsilon", "chi") and interaction.a <= 0:
            raise ConfigError("interaction.a: fd requires a>0 for epsilon/chi interactions")
        if box.left_bc != "dirichlet" or box.right_bc != "dirichlet":
            raise ConfigError("box.left_bc: fd supports Dirichlet edges only")
    elif interaction.s != 0:
        raise ConfigError("interaction.s: exact requires s=0")

    out_d = data.get("output", {})
    output = OutputConfig(
        format=_choice(out_d, "format", "output", ("csv", "json"), "csv"),
        path=out_d.get("path"),
    )
    return RunConfig(box, interaction, solver, output)


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"config: cannot read {path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config: invalid TOML: {exc}") from exc
    return parse_config(data)


def family_from_params(law: str, p: dict) -> RenormalizedFamily:
    try:
        if law == "constant":
            return Constant(p["v0"], p["u0"])
        if law == "epsilon":
            return Epsilon(p["c"])
        if law == "chi3":
            return Chi3(p["alpha"], p["beta"], p["gamma"], p["delta"])
        if law == "chi5":
            return Chi5(p["alpha"], p["beta"], p["gamma"])
        if law == "chi5z":
            return Chi5z(p["alpha"], p["gamma"])
    except KeyError as exc:
        raise ConfigError(f"interaction.{exc.args[0]}: missing for law {law}") from exc
    except PointDefectError as exc:
        raise ConfigError(f"interaction.law: {exc}") from exc
    raise ConfigError(f"interaction.law: unknown law {law!r}")


def chi_family(m: ConnectionMatrix) -> RenormalizedFamily:
    """The train law that realizes a general connection matrix."""
    alpha, beta, gamma, delta = m.params()
    if delta != 0:
        return Chi3(alpha, beta, gamma, delta)
    if beta != 0:
        if alpha == -1.0:
            return Constant(0.0, -beta / 2.0)
        return Chi5(alpha, beta, gamma)
    return Chi5z(alpha, gamma)


def target_matrix(cfg: RunConfig) -> Optional[ConnectionMatrix]:
    """The ideal point interaction the configured interaction stands for."""
    from .connmat import IDENTITY, from_delta_strength, from_epsilon_strength

    kind, p = cfg.interaction.kind, cfg.interaction.parameters
    if kind == "free":
        return IDENTITY
    if kind == "delta":
        return from_delta_strength(p["v"])
    if kind == "epsilon":
        return from_epsilon_strength(p["c"])
    if kind == "chi":
        return make_connection(p["alpha"], p["beta"], p["gamma"], p["delta"])
    if kind == "family":
        return family_from_params(p["law"], p).target()
    return None


def build_interaction(cfg: RunConfig):
    """``None``, a :class:`DeltaTrain` or a ``PointInteraction`` for the config."""
    from .exact import PointInteraction

    it = cfg.interaction
    kind, p = it.kind, it.parameters
    try:
        if kind == "free":
            return None
        if kind == "delta":
            return DeltaTrain.from_pairs([(it.x0, p["v"])])
        if kind == "train":
            return DeltaTrain.from_pairs(zip(p["positions"], p["strengths"]))
        if kind == "family":
            return family_at(family_from_params(p["law"], p), it.a).shifted(it.x0)
        matrix = target_matrix(cfg)
        if it.a == 0:
            return PointInteraction(matrix, it.x0)
        fam = Epsilon(p["c"]) if kind == "epsilon" else chi_family(matrix)
        return family_at(fam, it.a).shifted(it.x0)
    except ConfigError:
        raise
    except (PointDefectError, ValueError) as exc:
        raise ConfigError(f"interaction.kind: {exc}") from exc


def boundary_kind(name: str) -> BoundaryKind:
    return BoundaryKind(name)


def resolve_path(cfg: RunConfig, override: Optional[str], default: str) -> Path:
    return Path(override or cfg.output.path or default)
