"""Command-line entry point: ``relgreen <command> --config run.yaml``.

Exit codes: 0 success (flagged cells included), 2 config/schema error
(raised before any computation), 3 fatal numerical error.
"""
from __future__ import annotations

import argparse
import dataclasses
import itertools
import json
import math
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional

import numpy as np

from . import __version__
from .boundary import BoxGeometry, FreeGreen, ResolventGreen, box_amplitude, find_box_poles, wall_amplitude
from .config import RunConfig, axis_values, config_echo, load_config
from .core import free_amplitude_1d, kappa, resolvent_1d
from .dk import BUILTIN_MAPS, effective_potential, profile_function
from .errors import ConfigError, DerivativeUnavailableError, RelGreenError
from .geometry import BUILTIN_COORDINATES, SlicedPathState, connection, sliced_action_term
from .lattice import GridSpec, SlicingSpec, convergence_study, transfer_matrix_amplitude
from .output import Envelope, Table, green_table, to_csv, to_json

COMMANDS = {
    "free": "free amplitude on an (x_b, x_a, E) grid",
    "wall": "amplitude with an impenetrable wall",
    "box": "amplitude inside a two-wall box",
    "spectrum": "box poles with the analytic comparison column",
    "veff": "profile function and effective potential of a radial map",
    "geometry": "frame, metric, connections and sliced-action terms",
    "oracle": "transfer-matrix runs with a convergence report",
}


def _flag(err: Exception) -> str:
    name = type(err).__name__
    return name[:-5] if name.endswith("Error") else name


def _energies(block) -> np.ndarray:
    return axis_values(block.energy) + 1j * block.energy_imag


def _base_green(pot, particle, tol):
    V = pot.build()
    if V.is_constant:
        return FreeGreen(particle, V.asymptotic_values[0])
    return ResolventGreen(V, particle, tol)


def _amplitude_grid(block, evaluate: Callable) -> Table:
    table = green_table()
    for x_b, x_a, E in itertools.product(axis_values(block.x_b), axis_values(block.x_a), _energies(block)):
        try:
            g, flag = evaluate(float(x_b), float(x_a), complex(E)), ""
        except (RelGreenError, ValueError) as err:
            g, flag = None, _flag(err)
        table.add(x_b, x_a, E.real, E.imag, None if g is None else g.real, None if g is None else g.imag, flag)
    return table


def cmd_free(cfg: RunConfig) -> dict:
    p = cfg.units.particle()
    return _amplitude_grid(cfg.free, lambda xb, xa, E: free_amplitude_1d(xb, xa, E, p)).to_dict()


def cmd_wall(cfg: RunConfig) -> dict:
    blk = cfg.wall
    g0 = _base_green(blk.potential, cfg.units.particle(), cfg.tol or 1e-10)
    return _amplitude_grid(blk, lambda xb, xa, E: wall_amplitude(g0, blk.a, xb, xa, E)).to_dict()


def cmd_box(cfg: RunConfig) -> dict:
    blk = cfg.box
    g0 = _base_green(blk.potential, cfg.units.particle(), cfg.tol or 1e-10)
    box = BoxGeometry(blk.a, blk.b)
    return _amplitude_grid(blk, lambda xb, xa, E: box_amplitude(g0, box, xb, xa, E)).to_dict()


def cmd_spectrum(cfg: RunConfig) -> dict:
    blk = cfg.spectrum
    p = cfg.units.particle()
    v0 = blk.potential.build().asymptotic_values[0]
    g0 = FreeGreen(p, v0)
    box = BoxGeometry(blk.a, blk.b)
    poles = find_box_poles(g0, box, (blk.e_min, blk.e_max), blk.n_scan, cfg.tol or 1e-12)
    table = Table("spectrum", ["n", "mode", "energy", "residual", "analytic", "rel_diff"],
                  ["", "", "energy", "", "energy", ""])
    for e in poles:
        mode = int(round(abs(kappa(e.energy - v0, p)) * box.length / math.pi))
        exact = v0 + math.sqrt(p.rest_energy ** 2 + (p.hbar * p.light_speed * mode * math.pi / box.length) ** 2)
        table.add(e.n, mode, e.energy, e.residual, exact, abs(e.energy - exact) / abs(exact))
    if poles.note:
        table.notes.append(poles.note)
    return table.to_dict()


def cmd_veff(cfg: RunConfig) -> dict:
    blk = cfg.veff
    p = cfg.units.particle()
    if isinstance(blk.map, str):
        m = BUILTIN_MAPS[blk.map]()
        if not blk.fd_fallback:
            m = dataclasses.replace(m, fd_fallback=False)
    else:
        m = blk.map.build(blk.fd_fallback)
    table = Table("veff", ["q", "f", "V_eff", "flag"], ["coordinate", "", "energy", ""])
    for q in axis_values(blk.q):
        try:
            table.add(q, profile_function(m, float(q)), effective_potential(m, float(q), blk.rho, p), "")
        except DerivativeUnavailableError:
            raise
        except (ValueError, ArithmeticError) as err:
            table.add(q, None, None, _flag(err))
    return table.to_dict()


def _read_path_points(path: str) -> List[List[float]]:
    text = Path(path).read_text()
    if path.endswith(".json"):
        data = json.loads(text)
        return data["points"] if isinstance(data, dict) else data
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            rows.append([float(t) for t in line.replace(",", " ").split()])
    return rows


def cmd_geometry(cfg: RunConfig) -> dict:
    blk = cfg.geometry
    p = cfg.units.particle()
    maker = BUILTIN_COORDINATES[blk.map]
    m = maker(blk.dim) if blk.map == "identity" else maker()
    D = m.dim
    ix = range(D)
    cols = ([f"q{i}" for i in ix] + ["sqrt_g"] + [f"g{i}{j}" for i in ix for j in ix]
            + [f"trace{i}" for i in ix] + [f"raised{i}" for i in ix])
    points = Table("geometry-points", cols, ["coordinate"] * D + [""] * (len(cols) - D))
    for q in blk.points:
        c = connection(m, q)
        points.add(*q, c.metric.sqrt_g, *c.metric.g.ravel(), *c.trace, *c.raised)
    tables = [points.to_dict()]
    if blk.path is not None:
        pb = blk.path
        pts = pb.points if pb.points is not None else _read_path_points(pb.file)
        n_sl = len(pts) - 1
        rho = [pb.rho] * n_sl if isinstance(pb.rho, float) else pb.rho
        A = None if pb.vector_potential is None else (lambda q, a=np.array(pb.vector_potential): a)
        state = SlicedPathState(np.array(pts), np.array(rho), pb.eps, complex(pb.energy, pb.energy_imag),
                                A, (lambda x, v=pb.potential: v), pb.charge)
        path = Table("sliced-action", ["n", "action_re", "action_im"], ["", "action", "action"])
        for n in range(1, state.n_slices + 1):
            a = complex(sliced_action_term(state, n, m, p, include_rest_mass=pb.include_rest_mass))
            path.add(n, a.real, a.imag)
        tables.append(path.to_dict())
    return {"tables": tables}


def cmd_oracle(cfg: RunConfig) -> dict:
    blk = cfg.oracle
    p = cfg.units.particle()
    V = blk.potential.build()
    E = complex(blk.energy, blk.energy_imag)
    grid = GridSpec(blk.spacing, blk.extent, blk.margin)
    slicing = SlicingSpec(blk.eps, blk.L_max)

    def reference(E, x_b, x_a):
        if V.is_constant:
            return free_amplitude_1d(x_b, x_a, E - V.asymptotic_values[0], p)
        return resolvent_1d(V, E, x_b, x_a, p, cfg.tol or 1e-10)

    ref = reference(E, blk.x_b, blk.x_a)
    conv = Table("convergence", ["level", "spacing", "eps", "G_re", "G_im", "rel_error", "delta", "ratio"],
                 ["", "length", "L", "amplitude", "amplitude", "", "amplitude", ""])
    for r in convergence_study(V, E, blk.x_b, blk.x_a, p, blk.levels, ref, grid, slicing):
        conv.add(r.level, r.spacing, r.eps, r.value.real, r.value.imag, r.error, r.delta, r.ratio)
    conv.notes.append(f"reference G = {ref.real!r} + {ref.imag!r}i")
    tables = [conv.to_dict()]
    if blk.random_points:
        rng = np.random.default_rng(cfg.seed)
        sweep = Table("random-sweep", ["E", "dx", "G_re", "G_im", "ref_re", "ref_im", "rel_error"],
                      ["energy", "length", "amplitude", "amplitude", "amplitude", "amplitude", ""])
        for _ in range(blk.random_points):
            e = float(rng.uniform(*blk.energy_range))
            dx = float(rng.uniform(*blk.separation_range))
            g = transfer_matrix_amplitude(V, e, dx, 0.0, p, GridSpec(margin=blk.margin), SlicingSpec(blk.eps))
            r0 = reference(e, dx, 0.0)
            sweep.add(e, dx, g.real, g.imag, r0.real, r0.imag, abs(g - r0) / abs(r0))
        tables.append(sweep.to_dict())
    return {"tables": tables}


HANDLERS: Dict[str, Callable[[RunConfig], dict]] = {
    "free": cmd_free, "wall": cmd_wall, "box": cmd_box, "spectrum": cmd_spectrum,
    "veff": cmd_veff, "geometry": cmd_geometry, "oracle": cmd_oracle,
}


def run(command: str, cfg: RunConfig) -> Envelope:
    """Execute one command on a validated config."""
    if getattr(cfg, command) is None:
        raise ConfigError(f"config schema error:\n  {command}: block required for the '{command}' command")
    t0 = time.perf_counter()
    payload = HANDLERS[command](cfg)
    return Envelope(command, config_echo(cfg), __version__, time.perf_counter() - t0, payload)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relgreen", description="Relativistic fixed-energy Green functions: batch runs with CSV/JSON output.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, summary in COMMANDS.items():
        sp = sub.add_parser(name, help=summary)
        sp.add_argument("--config", required=True, help="YAML or JSON run configuration")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"))
        sp.add_argument("--seed", type=int)
        sp.add_argument("--tol", type=float)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {"out": args.out, "format": args.format, "seed": args.seed, "tol": args.tol}
    try:
        cfg = load_config(args.config, overrides)
        if getattr(cfg, args.command) is None:
            raise ConfigError(f"config schema error:\n  {args.command}: block required for this command")
    except ConfigError as err:
        print(err, file=sys.stderr)
        return 2
    try:
        env = run(args.command, cfg)
    except RelGreenError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        return 3
    text = to_json(env) if cfg.format == "json" else to_csv(env)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
