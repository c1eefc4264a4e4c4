"""Command-line front end.

Units throughout: hbar = 1, particle mass = 1, so H = -1/2 d^2/dx^2 + V and
E = k^2 / 2.

Exit codes: 0 ok, 1 property failure, 2 config error, 3 solver error,
4 degenerate inputs for a connection-matrix fit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .analysis import (
    EigenvalueProbe,
    TransferProbe,
    convergence_study,
    degeneracy_gaps,
    extract_boundary_data,
    fit_connection_matrix,
)
from .config import (
    LAWS,
    RunConfig,
    boundary_kind,
    build_interaction,
    family_from_params,
    load_config,
    target_matrix,
)
from .connmat import from_epsilon_strength, identity_suite
from .errors import ConfigError, DegenerateInputs, PointDefectError
from .exact import BoxSystem, PointInteraction, eigenfunction, eigenvalues
from .fdsolve import discretize, solve
from .potential import DeltaTrain, Epsilon, UniformGrid, family_at, smear

log = logging.getLogger("pointdefect")

EXIT_OK, EXIT_PROPERTY, EXIT_CONFIG, EXIT_SOLVER, EXIT_DEGENERATE = 0, 1, 2, 3, 4


class SolverFailure(Exception):
    pass


# --- output helpers -----------------------------------------------------------


def fmt(value) -> str:
    """Shortest round-trip text for floats."""
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def provenance(command: str, config: Optional[dict] = None, solver: Optional[dict] = None) -> dict:
    return {
        "tool": "pointdefect",
        "version": __version__,
        "command": command,
        "units": "hbar=1, m=1",
        "config": config or {},
        "solver": solver or {},
    }


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header: Sequence[str], rows, prov: dict) -> str:
    buf = io.StringIO()
    buf.write("# provenance: " + json.dumps(prov, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


@dataclass
class ResultBundle:
    eigenvalues: list
    provenance: dict
    wavefunctions: Optional[dict] = None  # {"x": [...], "psi_1": [...], ...}
    boundary: list = field(default_factory=list)
    fit: Optional[dict] = None

    def to_dict(self) -> dict:
        d = {"eigenvalues": self.eigenvalues, "provenance": self.provenance}
        if self.wavefunctions is not None:
            d["wavefunctions"] = self.wavefunctions
        if self.boundary:
            d["boundary"] = self.boundary
        if self.fit is not None:
            d["fit"] = self.fit
        return d


# --- solving ------------------------------------------------------------------


@dataclass
class SolvedState:
    energy: float
    x: np.ndarray
    psi: np.ndarray
    boundary: object  # BoundaryData


def outer_half_width(interaction, x0: float) -> float:
    if isinstance(interaction, DeltaTrain):
        lo, hi = interaction.extent
        return max(x0 - lo, hi - x0)
    return 0.0


def run_solver(cfg: RunConfig, n_states: int, want_states: bool, seed: int):
    """Eigenvalues (and optionally states with boundary data) for a config."""
    interaction = build_interaction(cfg)
    length = cfg.box.length
    sv = cfg.solver
    x0 = cfg.interaction.x0
    meta = {"method": sv.method, "tolerance": sv.tolerance, "energy_window": list(sv.energy_window)}
    try:
        if sv.method == "exact":
            system = BoxSystem(
                length, boundary_kind(cfg.box.left_bc), boundary_kind(cfg.box.right_bc), interaction, x0
            )
            spec = eigenvalues(system, sv.energy_window, n_states, sv.tolerance)
            meta["scan_step"] = spec.scan_step
            meta["warnings"] = list(spec.warnings)
            values = list(spec.eigenvalues)
            states = []
            if want_states:
                grid = UniformGrid(-length / 2.0, length / 2000.0, 2001)
                for e in values:
                    ef = eigenfunction(system, e, grid, sv.tolerance)
                    states.append(SolvedState(e, ef.x, ef.psi, ef.boundary))
            return values, states, meta, interaction

        n = sv.grid_points
        grid = UniformGrid.box_interior(length, n)
        pot = smear(interaction, cfg.interaction.s, grid) if interaction is not None else None
        op = discretize(pot, length, n)
        floor = sv.energy_window[0]
        pairs = solve(op, n_states, sv.tolerance, above=floor, seed=seed)
        pairs = [p for p in pairs if p.value <= sv.energy_window[1]]
        meta["grid_points"] = n
        meta["h"] = op.h
        values = [p.value for p in pairs]
        states = []
        if want_states:
            half = outer_half_width(interaction, x0)
            excl = half + cfg.interaction.s
            for p in pairs:
                k = math.sqrt(2.0 * p.value)
                bd = extract_boundary_data(grid.points, p.vector, k, x0, excl, 0.1 * length, anchor=half)
                states.append(SolvedState(p.value, grid.points, p.vector, bd))
        return values, states, meta, interaction
    except ConfigError:
        raise
    except (PointDefectError, ValueError, np.linalg.LinAlgError) as exc:
        raise SolverFailure(str(exc)) from exc


def _bd_dict(bd) -> dict:
    return {
        "psi_minus": bd.psi_minus,
        "dpsi_minus": bd.dpsi_minus,
        "psi_plus": bd.psi_plus,
        "dpsi_plus": bd.dpsi_plus,
    }


# --- commands -----------------------------------------------------------------


def cmd_spectrum(args) -> int:
    cfg = load_config(args.config)
    fmt_ = args.format or cfg.output.format
    out = Path(args.out or cfg.output.path or f"spectrum.{fmt_}")
    want = cfg.solver.wavefunctions
    values, states, meta, _ = run_solver(cfg, cfg.solver.max_states, want, args.seed)
    prov = provenance("spectrum", cfg.echo(), meta)
    bundle = ResultBundle(values, prov)
    if want:
        bundle.wavefunctions = {"x": states[0].x.tolist() if states else []}
        for i, st in enumerate(states, 1):
            bundle.wavefunctions[f"psi_{i}"] = st.psi.tolist()
        bundle.boundary = [_bd_dict(st.boundary) for st in states]
    if fmt_ == "json":
        write_atomic(out, json_text(bundle.to_dict()))
    else:
        write_atomic(out, csv_text(["index", "energy"], enumerate(values, 1), prov))
        if want and states:
            wf = out.with_name(out.stem + "_wavefunctions.csv")
            header = ["x"] + [f"psi_{i}" for i in range(1, len(states) + 1)]
            rows = zip(states[0].x, *(st.psi for st in states))
            write_atomic(wf, csv_text(header, rows, prov))
    log.info("wrote %d eigenvalues to %s", len(values), out)
    return EXIT_OK


def cmd_fig1(args) -> int:
    c, length, a, s, n = args.c, args.length, args.a, args.s, args.grid_points
    out = Path(args.out or "fig1")
    config = {"c": c, "L": length, "a": a, "s": s, "N": n, "seed": args.seed}
    try:
        train = family_at(Epsilon(c), a)
        grid = UniformGrid.box_interior(length, n)
        pot = smear(train, s, grid)
        op = discretize(pot, length, n)
        pairs = solve(op, 4, 1e-12, above=0.0, seed=args.seed)
        exact_train = eigenvalues(BoxSystem(length, interaction=train), (0.0, 2.0), 4)
        limit_sys = BoxSystem(length, interaction=PointInteraction(from_epsilon_strength(c)))
        limit = eigenvalues(limit_sys, (0.0, 2.0), 4)
    except PointDefectError as exc:
        raise SolverFailure(str(exc)) from exc
    if len(exact_train) < 4 or len(limit) < 4:
        raise SolverFailure("fewer than four states found below E=2")
    prov = provenance("fig1", config, {"method": "fd+exact", "h": op.h})
    x = grid.points

    for i, p in enumerate(pairs, 1):
        ref = eigenfunction(limit_sys, limit[i - 1], x)
        # align the limit state's sign with the numerical one
        sign = 1.0 if float(np.dot(ref.psi, p.vector)) >= 0 else -1.0
        rows = zip(x, p.vector, sign * ref.psi)
        write_atomic(out / f"state_{i}.csv", csv_text(["x", "psi", "psi_limit"], rows, prov))

    rows = [
        (i, p.value, exact_train[i - 1], limit[i - 1]) for i, p in enumerate(pairs, 1)
    ]
    write_atomic(
        out / "eigenvalues.csv",
        csv_text(["index", "fd", "exact_train", "reference_limit"], rows, prov),
    )
    write_atomic(out / "potential.csv", csv_text(["x", "V"], zip(x, pot.values), prov))
    zoom = np.abs(x) <= 1.5 * a
    write_atomic(
        out / "potential_zoom.csv", csv_text(["x", "V"], zip(x[zoom], pot.values[zoom]), prov)
    )
    fd_gaps = degeneracy_gaps([p.value for p in pairs])
    tr_gaps = degeneracy_gaps(exact_train)
    lim_gaps = degeneracy_gaps(limit)
    rows = [(g[0], g[1], t[1], l[1]) for g, t, l in zip(fd_gaps, tr_gaps, lim_gaps)]
    write_atomic(out / "gaps.csv", csv_text(["pair", "fd", "exact_train", "reference_limit"], rows, prov))
    log.info("fig1 data written to %s", out)
    return EXIT_OK


def parse_family(spec: str):
    """``law:key=value,...`` e.g. ``epsilon:c=5`` or ``chi3:alpha=-2,beta=1,gamma=-1,delta=1``."""
    law, _, rest = spec.partition(":")
    if law not in LAWS:
        raise ConfigError(f"family: unknown law {law!r}; expected one of {list(LAWS)}")
    params = {}
    for item in filter(None, rest.split(",")):
        key, eq, value = item.partition("=")
        if not eq:
            raise ConfigError(f"family: expected key=value, got {item!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"family.{key.strip()}: not a number: {value!r}") from exc
    return law, params, family_from_params(law, params)


def parse_probe(spec: str, length: float):
    kind, _, arg = spec.partition(":")
    try:
        if kind == "transfer":
            return TransferProbe(float(arg) if arg else 0.045)
        if kind == "eigenvalue":
            return EigenvalueProbe(int(arg) if arg else 2, length=length)
    except ValueError as exc:
        raise ConfigError(f"probe: bad argument {arg!r}") from exc
    raise ConfigError(f"probe: expected transfer[:E] or eigenvalue[:index], got {spec!r}")


def cmd_converge(args) -> int:
    law, params, fam = parse_family(args.family)
    try:
        a_list = [float(v) for v in args.a.split(",")]
    except ValueError as exc:
        raise ConfigError(f"a: cannot parse {args.a!r}") from exc
    if any(b >= a for a, b in zip(a_list, a_list[1:])) or any(a <= 0 for a in a_list):
        raise ConfigError("a: values must be positive and strictly decreasing")
    probe = parse_probe(args.probe, args.length)
    try:
        table = convergence_study(fam, a_list, None, probe)
    except PointDefectError as exc:
        raise SolverFailure(str(exc)) from exc
    prov = provenance(
        "converge", {"family": law, "params": params, "a": a_list, "probe": args.probe, "L": args.length}
    )
    rows = [(r.a, r.observable, r.reference, r.abs_error, r.rel_error) for r in table.rows]
    rows.append(("monotone", str(table.is_monotone()).lower(), "", "", ""))
    out = Path(args.out or "converge.csv")
    if (args.format or "csv") == "json":
        payload = {
            "rows": [r.__dict__ for r in table.rows],
            "monotone": table.is_monotone(),
            "provenance": prov,
        }
        write_atomic(out, json_text(payload))
    else:
        write_atomic(out, csv_text(list(table.columns), rows, prov))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise ConfigError("trials: must be >= 1")
    report = identity_suite(args.seed, args.trials)
    report["provenance"] = provenance("verify", {"seed": args.seed, "trials": args.trials})
    write_atomic(Path(args.out or "verify.json"), json_text(report))
    if not args.quiet:
        for name, b in report["branches"].items():
            print(f"{name:14s} max_error={b['max_error']:.3e}")
        print("PASS" if report["passed"] else "FAIL")
    return EXIT_OK if report["passed"] else EXIT_PROPERTY


def cmd_extract(args) -> int:
    cfg = load_config(args.config)
    if args.states < 2:
        raise ConfigError("states: must be >= 2")
    _, states, meta, _ = run_solver(cfg, args.states, True, args.seed)
    if len(states) < 2:
        raise SolverFailure(f"only {len(states)} state(s) in the energy window")
    try:
        report = fit_connection_matrix([st.boundary for st in states])
    except DegenerateInputs as exc:
        print(f"error: {exc} (try a larger --states or a wider solver.energy_window)", file=sys.stderr)
        return EXIT_DEGENERATE
    payload = {"fit": report.to_dict(), "boundary": [_bd_dict(st.boundary) for st in states]}
    target = target_matrix(cfg)
    if target is not None:
        t = target.as_array()
        payload["target"] = {
            "matrix": t.tolist(),
            "alpha": target.alpha,
            "beta": target.beta,
            "gamma": target.gamma,
            "delta": target.delta_p,
        }
        payload["deviation"] = (report.fitted - t).tolist()
    payload["eigenvalues"] = [st.energy for st in states]
    payload["provenance"] = provenance("extract", cfg.echo(), meta)
    write_atomic(Path(args.out or cfg.output.path or "extract.json"), json_text(payload))
    return EXIT_OK


# --- entry point ----------------------------------------------------------------


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # accepted before or after the subcommand; the subcommand copy must not
    # reset values given before it, hence SUPPRESS defaults there
    common = argparse.ArgumentParser(add_help=False)
    kw = {"default": argparse.SUPPRESS} if suppress else {}
    common.add_argument("--config", help="TOML run configuration", **kw)
    common.add_argument("--out", help="output file (or directory for fig1)", **kw)
    common.add_argument("--seed", type=int, **(kw or {"default": 0}))
    common.add_argument("--format", choices=("csv", "json"), **kw)
    common.add_argument("--quiet", action="store_true", **kw)
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pointdefect",
        description="Point interactions as renormalized delta trains (units: hbar = m = 1).",
        parents=[_global_flags(suppress=False)],
    )
    common = _global_flags(suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", parents=[common], help="box eigenvalues for a config")
    p.set_defaults(func=cmd_spectrum, needs_config=True)

    p = sub.add_parser("fig1", parents=[common], help="smeared epsilon potential in a box")
    p.add_argument("--c", type=float, default=5.0)
    p.add_argument("--length", "-L", type=float, default=10.0)
    p.add_argument("--a", type=float, default=0.333)
    p.add_argument("--s", type=float, default=0.012)
    p.add_argument("--grid-points", "-N", type=int, default=8191)
    p.set_defaults(func=cmd_fig1, needs_config=False)

    p = sub.add_parser("converge", parents=[common], help="a -> 0 convergence table")
    p.add_argument("--family", required=True, help="law:key=value,... e.g. epsilon:c=5")
    p.add_argument("--a", required=True, help="comma-separated decreasing separations")
    p.add_argument("--probe", default="transfer:0.045", help="transfer[:E] or eigenvalue[:index]")
    p.add_argument("--length", "-L", type=float, default=10.0)
    p.set_defaults(func=cmd_converge, needs_config=False)

    p = sub.add_parser("verify", parents=[common], help="factorization identity suite")
    p.add_argument("--trials", type=int, default=1000)
    p.set_defaults(func=cmd_verify, needs_config=False)

    p = sub.add_parser("extract", parents=[common], help="fit a connection matrix from states")
    p.add_argument("--states", type=int, default=4)
    p.set_defaults(func=cmd_extract, needs_config=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    try:
        if args.needs_config and not args.config:
            raise ConfigError("--config: required for this command")
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
