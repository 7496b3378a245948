"""Parallel (tau, delta) grid sweeps and 1-D scans.

Grid cells are independent: each cell builds its pulse train, propagates
every thermal initial state, and reduces the observables.  Cells are
distributed over a process pool; results land in a fixed-order buffer, so
the output is byte-identical for any worker count.  The only state shared
across workers are the per-process angular-momentum caches.

A truncation failure in any cell aborts the sweep and is reported with the
cell coordinates; completed cells are kept so partial results can be
flushed with a failure marker.
"""

from __future__ import annotations

import math
import multiprocessing as mp
import os
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from . import __version__
from ._kernels import BACKEND
from .molecule import (
    MoleculeSpec,
    FineStructure,
    RAD_PS_PER_CM,
    get_preset,
    revival_time,
    thermal_cutoff,
    thermal_weights,
)
from .observables import build_report, thermal_baseline
from .propagator import (
    TruncationError,
    default_truncation,
    initial_state,
    run_train,
)
from .pulsetrain import bessel_train, equal_train

__all__ = [
    "ConfigError",
    "RunConfig",
    "SweepResult",
    "SweepTruncationFailure",
    "run_sweep",
    "run_scan",
    "run_single",
]

_AU_POLARIZABILITY = 1.64877727436e-41


class ConfigError(ValueError):
    """Invalid run configuration (CLI exit code 3)."""


class SweepTruncationFailure(RuntimeError):
    """A cell hit the truncation diagnostic; carries the partial result."""

    def __init__(self, cell, message, partial):
        self.cell = cell
        self.partial = partial
        super().__init__(message)


@dataclass
class RunConfig:
    """Everything needed to reproduce a sweep or scan run."""

    molecule: str = "n14n2"
    molecules: tuple = ()          # scan comparisons; falls back to (molecule,)
    train_type: str = "equal"      # equal | bessel
    n_pulses: int = 8
    bessel_a: float = 2.0
    total_strength: float = 5.0
    sigma_ps: float = 0.030
    engine: str = "sudden"         # sudden | ode
    temperature: float = 8.0
    tau_min: float = 0.5
    tau_max: float = 9.0
    tau_step: float = 0.0          # 0 -> default t_rev/400
    delta_min: float = 0.0
    delta_max: float = math.pi
    delta_step: float = 0.0        # 0 -> default pi/100
    delta_fixed: float = 0.0       # scans only
    levels: tuple = ()             # report levels; () -> automatic
    truncation: int = 0            # 0 -> default formula
    initial_weight_floor: float = 1e-6
    kick_tol: float = 1e-16
    workers: int = 1
    output_dir: str = "."
    formats: tuple = ("csv",)      # csv, pgm
    # inline molecule definition (used when molecule == "custom")
    custom_B_cm: float = 0.0
    custom_D_cm: float = 0.0
    custom_delta_alpha_au: float = 6.7
    custom_weight_even: float = 1.0
    custom_weight_odd: float = 1.0
    custom_lambda_cm: float = 0.0
    custom_gamma_cm: float = 0.0

    def molecule_spec(self, name=None) -> MoleculeSpec:
        name = name or self.molecule
        if name != "custom":
            try:
                return get_preset(name)
            except KeyError as exc:
                raise ConfigError(str(exc)) from None
        if self.custom_B_cm <= 0:
            raise ConfigError("custom molecule needs custom_B_cm > 0")
        fine = None
        if self.custom_lambda_cm or self.custom_gamma_cm:
            fine = FineStructure(
                lambda_ss=self.custom_lambda_cm * RAD_PS_PER_CM,
                gamma_sr=self.custom_gamma_cm * RAD_PS_PER_CM,
            )
        return MoleculeSpec(
            name="custom",
            B=self.custom_B_cm * RAD_PS_PER_CM,
            D=self.custom_D_cm * RAD_PS_PER_CM,
            delta_alpha=self.custom_delta_alpha_au * _AU_POLARIZABILITY,
            spin_weights={0: self.custom_weight_even, 1: self.custom_weight_odd},
            fine_structure=fine,
        )

    def validate(self, kind: str):
        if self.train_type not in ("equal", "bessel"):
            raise ConfigError(f"unknown train_type {self.train_type!r}")
        if self.engine not in ("sudden", "ode"):
            raise ConfigError(f"unknown engine {self.engine!r}")
        if self.n_pulses < 1:
            raise ConfigError("n_pulses must be >= 1")
        if self.total_strength < 0:
            raise ConfigError("total_strength must be >= 0")
        if self.temperature < 0:
            raise ConfigError("temperature must be >= 0")
        # a zero-length scan is legal (empty result); an empty sweep is not
        if kind == "sweep" and self.tau_max < self.tau_min:
            raise ConfigError("empty tau range")
        if self.tau_step < 0 or self.delta_step < 0:
            raise ConfigError("steps must be positive")
        if kind == "sweep" and self.delta_max < self.delta_min:
            raise ConfigError("empty delta range")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        for name in self.molecules or (self.molecule,):
            spec = self.molecule_spec(name)
            if spec.is_caseb and self.engine == "ode":
                raise ConfigError(
                    f"engine=ode is not available for case-(b) species "
                    f"({spec.name})"
                )

    @classmethod
    def from_dict(cls, raw: dict) -> "RunConfig":
        cfg = cls()
        fields = {f: getattr(cfg, f) for f in cfg.__dataclass_fields__}
        for key, value in raw.items():
            if key not in fields:
                raise ConfigError(f"unknown config key {key!r}")
            default = fields[key]
            try:
                if isinstance(default, bool):
                    value = str(value).lower() in ("1", "true", "yes")
                elif isinstance(default, int):
                    value = int(value)
                elif isinstance(default, float):
                    value = float(value)
                elif isinstance(default, tuple):
                    if isinstance(value, str):
                        parts = [p.strip() for p in value.split(",") if p.strip()]
                    else:
                        parts = list(value)
                    if key in ("levels",):
                        value = tuple(int(p) for p in parts)
                    else:
                        value = tuple(str(p) for p in parts)
                else:
                    value = str(value)
            except (TypeError, ValueError):
                raise ConfigError(f"bad value for {key!r}: {value!r}") from None
            setattr(cfg, key, value)
        return cfg

    def resolved(self, kind: str) -> "RunConfig":
        """Fill resolution defaults that depend on the molecule."""
        cfg = RunConfig(**asdict(self))
        spec = cfg.molecule_spec((cfg.molecules or (cfg.molecule,))[0])
        if cfg.tau_step == 0.0:
            base = revival_time(spec) if not spec.is_caseb else math.pi / spec.B
            cfg.tau_step = base / 400.0
        if cfg.delta_step == 0.0:
            cfg.delta_step = math.pi / 100.0
        cfg.validate(kind)
        return cfg


@dataclass
class SweepResult:
    """Grid observables plus the manifest describing the run."""

    kind: str
    molecules: tuple
    taus: np.ndarray
    deltas: np.ndarray
    levels: tuple
    q: np.ndarray        # (mol, tau, delta, level)
    eps: np.ndarray      # (mol, tau, delta, level)
    jz: np.ndarray       # (mol, tau, delta)
    e_abs: np.ndarray    # (mol, tau, delta)
    manifest: dict = field(default_factory=dict)
    mask: np.ndarray | None = None   # False where a cell was not computed


def _axis(lo, hi, step):
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1 if hi >= lo else 0
    return lo + step * np.arange(n)


def _auto_levels(specs, temperature, total_strength) -> tuple:
    """Reported levels: thermal levels plus the typical excitation reach."""
    reach = 0
    for spec in specs:
        reach = max(reach, thermal_cutoff(spec, temperature))
    top = reach + 2 * max(2, math.ceil(math.sqrt(total_strength) + 1))
    caseb = any(spec.is_caseb for spec in specs)
    if caseb:
        return tuple(range(1, top + 1, 2))
    return tuple(range(0, top + 1))


# worker context, inherited through fork
_CTX: dict = {}


def _init_worker(ctx):
    global _CTX
    _CTX = ctx


def _prepare_molecule(cfg: RunConfig, name: str) -> dict:
    spec = cfg.molecule_spec(name)
    cut = thermal_cutoff(spec, cfg.temperature)
    weights = thermal_weights(spec, cfg.temperature, cut)
    floor = cfg.initial_weight_floor
    kept = [(lab, w) for lab, w in weights if w >= floor]
    if not kept:
        raise ConfigError("initial_weight_floor drops every initial state")
    renorm = sum(w for _, w in kept)
    kept = [(lab, w / renorm) for lab, w in kept]
    r_thermal = max(
        (lab[1] if spec.is_caseb else lab[0]) for lab, _ in kept
    )
    r_max = cfg.truncation or default_truncation(
        cfg.total_strength, r_thermal, spec.is_caseb
    )
    return {
        "spec": spec,
        "weights": kept,
        "baseline": thermal_baseline(spec, kept),
        "r_max": r_max,
        "dropped_weight": 1.0 - renorm,
    }


def _cell_report(mol_ctx, cfg: RunConfig, tau: float, delta: float, levels):
    spec = mol_ctx["spec"]
    shape = "gaussian" if cfg.engine == "ode" else "delta"
    if cfg.train_type == "equal":
        train = equal_train(cfg.n_pulses, tau, delta, cfg.total_strength,
                            sigma=cfg.sigma_ps, shape=shape)
    else:
        train = bessel_train(cfg.bessel_a, tau, delta, cfg.total_strength,
                             sigma=cfg.sigma_ps, shape=shape)
    finals = []
    for label, weight in mol_ctx["weights"]:
        state = initial_state(spec, label, mol_ctx["r_max"])
        finals.append((weight, run_train(state, train, spec,
                                         engine=cfg.engine, tol=cfg.kick_tol)))
    report = build_report(finals, spec, mol_ctx["baseline"], levels)
    q = np.array([report.populations[lvl] for lvl in levels])
    eps = np.array([report.directionality[lvl] for lvl in levels])
    return q, eps, report.jz, report.energy_absorbed


def _run_task(task):
    im, it, idl = task
    ctx = _CTX
    cfg = ctx["cfg"]
    try:
        q, eps, jz, eabs = _cell_report(
            ctx["mols"][im], cfg, float(ctx["taus"][it]),
            float(ctx["deltas"][idl]), ctx["levels"],
        )
        return task, (q, eps, jz, eabs), None
    except TruncationError as exc:
        return task, None, str(exc)


def _execute(cfg: RunConfig, kind: str, molecules, taus, deltas) -> SweepResult:
    t_start = time.time()
    mols = [_prepare_molecule(cfg, name) for name in molecules]
    levels = tuple(cfg.levels) or _auto_levels(
        [m["spec"] for m in mols], cfg.temperature, cfg.total_strength
    )
    shape = (len(molecules), len(taus), len(deltas))
    q = np.zeros(shape + (len(levels),))
    eps = np.full(shape + (len(levels),), np.nan)
    jz = np.zeros(shape)
    e_abs = np.zeros(shape)
    mask = np.zeros(shape, dtype=bool)

    tasks = [
        (im, it, idl)
        for im in range(len(molecules))
        for it in range(len(taus))
        for idl in range(len(deltas))
    ]
    ctx = {
        "cfg": cfg,
        "mols": mols,
        "levels": levels,
        "taus": taus,
        "deltas": deltas,
    }
    failure = None

    def store(task, payload):
        im, it, idl = task
        q[im, it, idl] = payload[0]
        eps[im, it, idl] = payload[1]
        jz[im, it, idl] = payload[2]
        e_abs[im, it, idl] = payload[3]
        mask[im, it, idl] = True

    workers = min(cfg.workers, max(1, len(tasks)))
    if workers <= 1 or len(tasks) == 1:
        _init_worker(ctx)
        for task in tasks:
            task, payload, err = _run_task(task)
            if err is not None:
                failure = (task, err)
                break
            store(task, payload)
    else:
        chunk = max(1, len(tasks) // (workers * 8))
        with mp.get_context("fork").Pool(
            workers, initializer=_init_worker, initargs=(ctx,)
        ) as pool:
            for task, payload, err in pool.imap_unordered(
                _run_task, tasks, chunksize=chunk
            ):
                if err is not None:
                    failure = (task, err)
                    pool.terminate()
                    break
                store(task, payload)

    manifest = {
        "config": asdict(cfg),
        "kind": kind,
        "version": __version__,
        "backend": BACKEND,
        "molecules": list(molecules),
        "levels": list(levels),
        "grid": {
            "tau": [float(taus[0]), float(taus[-1]), float(cfg.tau_step)]
            if len(taus) else [],
            "delta": [float(deltas[0]), float(deltas[-1]), float(cfg.delta_step)]
            if len(deltas) else [],
            "n_tau": len(taus),
            "n_delta": len(deltas),
        },
        "truncation": {m["spec"].name: m["r_max"] for m in mols},
        "initial_states": {m["spec"].name: len(m["weights"]) for m in mols},
        "dropped_thermal_weight": {
            m["spec"].name: m["dropped_weight"] for m in mols
        },
        "workers": cfg.workers,
        "wall_time_s": None,
        "status": "complete",
    }
    result = SweepResult(
        kind=kind,
        molecules=tuple(molecules),
        taus=taus,
        deltas=deltas,
        levels=levels,
        q=q,
        eps=eps,
        jz=jz,
        e_abs=e_abs,
        manifest=manifest,
        mask=mask,
    )
    manifest["wall_time_s"] = round(time.time() - t_start, 3)
    if failure is not None:
        (im, it, idl), err = failure
        manifest["status"] = "failed"
        manifest["failed_cell"] = {
            "molecule": molecules[im],
            "tau": float(taus[it]),
            "delta": float(deltas[idl]),
            "error": err,
        }
        raise SweepTruncationFailure(
            manifest["failed_cell"],
            f"truncation failure at tau={taus[it]:.4f} ps, "
            f"delta={deltas[idl]:.4f} rad ({molecules[im]}): {err}",
            result,
        )
    return result


def run_sweep(config: RunConfig) -> SweepResult:
    """Full (tau, delta) map for one molecule."""
    cfg = config.resolved("sweep")
    taus = _axis(cfg.tau_min, cfg.tau_max, cfg.tau_step)
    deltas = _axis(cfg.delta_min, cfg.delta_max, cfg.delta_step)
    return _execute(cfg, "sweep", (cfg.molecule,), taus, deltas)


def run_scan(config: RunConfig) -> SweepResult:
    """1-D tau scan at fixed delta for a list of molecules."""
    cfg = config.resolved("scan")
    taus = _axis(cfg.tau_min, cfg.tau_max, cfg.tau_step)
    deltas = np.array([cfg.delta_fixed])
    molecules = cfg.molecules or (cfg.molecule,)
    return _execute(cfg, "scan", tuple(molecules), taus, deltas)


def run_single(config: RunConfig, tau: float, delta: float) -> SweepResult:
    """One grid cell, as a 1x1 sweep."""
    cfg = RunConfig(**asdict(config))
    cfg.tau_min = cfg.tau_max = tau
    cfg.delta_min = cfg.delta_max = delta
    cfg.tau_step = cfg.delta_step = 1.0
    cfg.validate("sweep")
    return _execute(cfg, "single", (cfg.molecule,),
                    np.array([tau]), np.array([delta]))
