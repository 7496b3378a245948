"""Command-line interface.

Subcommands:
  sweep      full (tau, delta) map for one molecule
  scan       1-D tau scan at fixed delta for one or more molecules
  single     one (tau, delta) cell, report printed to stdout
  lines      resonance-line overlays on the delta grid
  selfcheck  fast internal oracle checks

Exit codes: 0 success, 2 truncation failure, 3 configuration error.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .interference import resonance_lines
from .output import (
    emit_outputs,
    parse_config_file,
    write_lines_csv,
)
from .sweep import (
    ConfigError,
    RunConfig,
    SweepTruncationFailure,
    run_scan,
    run_single,
    run_sweep,
)

EXIT_OK = 0
EXIT_TRUNCATION = 2
EXIT_CONFIG = 3


def _add_common(p):
    p.add_argument("--config", help="key=value config file or JSON manifest")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--engine", choices=("sudden", "ode"), default=None)
    p.add_argument("--truncation", type=int, default=None,
                   help="basis cutoff override (J_max or N_max)")
    p.add_argument("--molecule", default=None)
    p.add_argument("--heatmaps", action="store_true",
                   help="also write 16-bit PGM heatmaps")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override any config key")


def _build_config(args) -> RunConfig:
    raw = {}
    if args.config:
        raw.update(parse_config_file(args.config))
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, _, value = item.partition("=")
        raw[key.strip()] = value.strip()
    if args.molecule:
        raw["molecule"] = args.molecule
    if args.workers is not None:
        raw["workers"] = args.workers
    if args.engine:
        raw["engine"] = args.engine
    if args.truncation is not None:
        raw["truncation"] = args.truncation
    if args.out:
        raw["output_dir"] = args.out
    cfg = RunConfig.from_dict(raw)
    if args.heatmaps and "pgm" not in cfg.formats:
        cfg.formats = tuple(cfg.formats) + ("pgm",)
    return cfg


def _emit(result, cfg, basename):
    paths = emit_outputs(result, cfg.output_dir, cfg.formats, basename)
    print(f"wrote {paths['csv']}" if "csv" in paths else "no csv requested")
    print(f"manifest: {paths['manifest']}")


def _cmd_sweep(args) -> int:
    cfg = _build_config(args)
    try:
        result = run_sweep(cfg)
    except SweepTruncationFailure as exc:
        _flush_failure(exc, cfg)
        return EXIT_TRUNCATION
    _emit(result, cfg, "sweep")
    return EXIT_OK


def _cmd_scan(args) -> int:
    cfg = _build_config(args)
    try:
        result = run_scan(cfg)
    except SweepTruncationFailure as exc:
        _flush_failure(exc, cfg)
        return EXIT_TRUNCATION
    _emit(result, cfg, "scan")
    return EXIT_OK


def _flush_failure(exc: SweepTruncationFailure, cfg):
    print(f"error: {exc}", file=sys.stderr)
    try:
        emit_outputs(exc.partial, cfg.output_dir, cfg.formats, "partial")
        print("partial results flushed with failure marker", file=sys.stderr)
    except OSError as io_exc:
        print(f"could not flush partial results: {io_exc}", file=sys.stderr)


def _cmd_single(args) -> int:
    cfg = _build_config(args)
    try:
        result = run_single(cfg, args.tau, args.delta)
    except SweepTruncationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRUNCATION
    mol = result.molecules[0]
    print(f"# {mol}  tau = {args.tau} ps  delta = {args.delta} rad")
    print(f"# <Jz> = {result.jz[0, 0, 0]:.6f} hbar   "
          f"E_abs = {result.e_abs[0, 0, 0]:.6f} rad/ps")
    print("level   Q           epsilon")
    for il, level in enumerate(result.levels):
        q = result.q[0, 0, 0, il]
        eps = result.eps[0, 0, 0, il]
        eps_txt = f"{eps:+.6f}" if not math.isnan(eps) else "undefined"
        print(f"{level:>5}   {q:.6e}  {eps_txt}")
    if args.out:
        _emit(result, cfg, "single")
    return EXIT_OK


def _cmd_lines(args) -> int:
    cfg = _build_config(args)
    spec = cfg.molecule_spec()
    deltas = np.arange(cfg.delta_min, cfg.delta_max + 1e-12,
                       cfg.delta_step or math.pi / 100.0)
    lines = []
    for j_to in args.j_to:
        for dm in (-2, 0, 2):
            lines.extend(resonance_lines(spec, j_to, dm,
                                         range(0, args.m_max + 1)))
    path = args.lines_out or "lines.csv"
    write_lines_csv(lines, deltas, path)
    print(f"wrote {path} ({len(lines)} lines x {len(deltas)} grid points)")
    return EXIT_OK


def _cmd_selfcheck(_args) -> int:
    ok = True
    for name, fn in _SELFCHECKS:
        try:
            fn()
            print(f"[ok]   {name}")
        except AssertionError as exc:
            ok = False
            print(f"[FAIL] {name}: {exc}")
    print(f"backend: {BACKEND}")
    return EXIT_OK if ok else 1


def _check_threej_orthogonality():
    from .angmom import wigner_3j

    for j1 in range(0, 4):
        for j2 in range(0, 4):
            for j3 in range(abs(j1 - j2), j1 + j2 + 1):
                for j3p in range(abs(j1 - j2), j1 + j2 + 1):
                    for m3 in range(-j3, j3 + 1):
                        for m3p in range(-j3p, j3p + 1):
                            total = sum(
                                (2 * j3 + 1)
                                * wigner_3j(j1, j2, j3, m1, m2, m3)
                                * wigner_3j(j1, j2, j3p, m1, m2, m3p)
                                for m1 in range(-j1, j1 + 1)
                                for m2 in range(-j2, j2 + 1)
                            )
                            expect = 1.0 if (j3, m3) == (j3p, m3p) else 0.0
                            assert abs(total - expect) < 1e-12, (
                                j1, j2, j3, j3p, m3, m3p, total,
                            )


def _check_kick_unitarity():
    from .molecule import get_preset
    from .propagator import initial_state, kick_sudden
    from .pulsetrain import PulseSpec

    state = initial_state(get_preset("n14n2"), (0, 0), 16)
    kicked = kick_sudden(state, PulseSpec(0.0, 0.3, 1.5, 0.03, "delta"))
    assert abs(kicked.norm - 1.0) < 1e-12, kicked.norm


def _check_phi():
    from .interference import phi_sum

    for n in (2, 8):
        for phase in (0.0, 0.1, 1.0, 2.0):
            literal = sum(
                math.cos((a - b) * phase) for a in range(n) for b in range(n)
            )
            assert abs(phi_sum(n, phase) - literal) < 1e-10


def _check_bessel():
    from .pulsetrain import bessel_jn

    total = bessel_jn(0, 2.0) ** 2 + 2 * sum(
        bessel_jn(n, 2.0) ** 2 for n in range(1, 30)
    )
    assert abs(total - 1.0) < 1e-12, total


def _check_thermal():
    from .molecule import get_preset, thermal_weights

    weights = thermal_weights(get_preset("n14n2"), 8.0, 8)
    total = sum(w for _, w in weights)
    assert abs(total - 1.0) < 1e-9, total


def _check_revival():
    import numpy as np

    from .molecule import MoleculeSpec
    from .propagator import free_evolve, initial_state

    rigid = MoleculeSpec("rigid", 1.0, 0.0, 1e-40)
    state = initial_state(rigid, (2, 0), 10)
    evolved = free_evolve(state, math.pi, rigid)
    assert np.abs(evolved.coeffs - state.coeffs).max() < 1e-12


_SELFCHECKS = (
    ("3-j orthogonality (j <= 3)", _check_threej_orthogonality),
    ("sudden kick unitarity", _check_kick_unitarity),
    ("interference sum vs literal double sum", _check_phi),
    ("Bessel strength sum rule", _check_bessel),
    ("thermal weights normalization", _check_thermal),
    ("rigid-rotor revival identity", _check_revival),
)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="chiraltrain",
        description="Chiral-pulse-train rotational excitation simulator",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="2-D (tau, delta) map")
    _add_common(p)
    p.set_defaults(fn=_cmd_sweep)

    p = sub.add_parser("scan", help="1-D tau scan at fixed delta")
    _add_common(p)
    p.set_defaults(fn=_cmd_scan)

    p = sub.add_parser("single", help="one (tau, delta) cell")
    _add_common(p)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.set_defaults(fn=_cmd_single)

    p = sub.add_parser("lines", help="resonance-line overlays")
    _add_common(p)
    p.add_argument("--j-to", type=int, nargs="+", default=[2, 3, 4, 5])
    p.add_argument("--m-max", type=int, default=4)
    p.add_argument("--lines-out", default=None)
    p.set_defaults(fn=_cmd_lines)

    p = sub.add_parser("selfcheck", help="fast internal consistency checks")
    p.set_defaults(fn=_cmd_selfcheck)

    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
