"""Result persistence: CSV tables, 16-bit PGM heatmaps, JSON manifests.

The CSV is the contract for external plotting: one row per grid cell and
reported level, floats written with 17 significant digits so that reading
the file back reproduces the exact binary values.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .sweep import ConfigError, SweepResult

__all__ = [
    "CSV_COLUMNS",
    "format_float",
    "write_sweep_csv",
    "read_sweep_csv",
    "write_heatmaps",
    "write_manifest",
    "write_lines_csv",
    "parse_config_file",
    "emit_outputs",
]

CSV_COLUMNS = ("molecule", "tau_ps", "delta_rad", "level",
               "Q", "epsilon", "jz", "e_abs_rad_ps")


def format_float(x: float) -> str:
    """17-significant-digit decimal form, round-trips to the same float."""
    return f"{x:.17g}"


def write_sweep_csv(result: SweepResult, path):
    """One row per (molecule, tau, delta, level); skips uncomputed cells."""
    with open(path, "w") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for im, mol in enumerate(result.molecules):
            for it, tau in enumerate(result.taus):
                for idl, delta in enumerate(result.deltas):
                    if result.mask is not None and not result.mask[im, it, idl]:
                        continue
                    jz = result.jz[im, it, idl]
                    eabs = result.e_abs[im, it, idl]
                    for il, level in enumerate(result.levels):
                        row = (
                            mol,
                            format_float(float(tau)),
                            format_float(float(delta)),
                            str(level),
                            format_float(float(result.q[im, it, idl, il])),
                            format_float(float(result.eps[im, it, idl, il])),
                            format_float(float(jz)),
                            format_float(float(eabs)),
                        )
                        fh.write(",".join(row) + "\n")


def read_sweep_csv(path):
    """Parse a sweep CSV back into a list of row dicts (floats restored)."""
    rows = []
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected CSV header {header}")
        for line in fh:
            parts = line.strip().split(",")
            rows.append({
                "molecule": parts[0],
                "tau_ps": float(parts[1]),
                "delta_rad": float(parts[2]),
                "level": int(parts[3]),
                "Q": float(parts[4]),
                "epsilon": float(parts[5]),
                "jz": float(parts[6]),
                "e_abs_rad_ps": float(parts[7]),
            })
    return rows


def _write_pgm(path, image: np.ndarray, lo: float, hi: float):
    """16-bit big-endian P5 PGM; image indexed [row, col]."""
    span = hi - lo
    if span <= 0:
        span = 1.0
    scaled = np.clip((image - lo) / span, 0.0, 1.0)
    scaled = np.nan_to_num(scaled, nan=0.0)
    data = (scaled * 65535.0).round().astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{image.shape[1]} {image.shape[0]}\n65535\n".encode())
        fh.write(data.tobytes())


def read_pgm_size(path):
    """(width, height) of a binary PGM, for dimension checks."""
    with open(path, "rb") as fh:
        magic = fh.readline().strip()
        if magic != b"P5":
            raise ValueError("not a binary PGM")
        dims = fh.readline().split()
        return int(dims[0]), int(dims[1])


def write_heatmaps(result: SweepResult, outdir) -> list:
    """Grayscale maps per observable: rows = tau axis, columns = delta axis.

    Q maps scale [0, max]; directionality maps scale [-1, 1] (NaN -> 0);
    jz and absorbed energy scale symmetric / [0, max].  The scale of every
    file is recorded in the result manifest.
    """
    os.makedirs(outdir, exist_ok=True)
    written = []
    scales = {}
    for im, mol in enumerate(result.molecules):
        for il, level in enumerate(result.levels):
            qmap = result.q[im, :, :, il]
            hi = float(qmap.max()) if qmap.size else 1.0
            name = f"{mol}_Q{level}.pgm"
            _write_pgm(os.path.join(outdir, name), qmap, 0.0, hi)
            scales[name] = [0.0, hi]
            written.append(name)
            emap = result.eps[im, :, :, il]
            name = f"{mol}_eps{level}.pgm"
            _write_pgm(os.path.join(outdir, name), emap, -1.0, 1.0)
            scales[name] = [-1.0, 1.0]
            written.append(name)
        jmap = result.jz[im]
        hi = float(np.abs(jmap).max()) or 1.0
        name = f"{mol}_jz.pgm"
        _write_pgm(os.path.join(outdir, name), jmap, -hi, hi)
        scales[name] = [-hi, hi]
        written.append(name)
        emap = result.e_abs[im]
        hi = float(emap.max()) if emap.size and emap.max() > 0 else 1.0
        name = f"{mol}_eabs.pgm"
        _write_pgm(os.path.join(outdir, name), emap, 0.0, hi)
        scales[name] = [0.0, hi]
        written.append(name)
    result.manifest["heatmaps"] = scales
    return written


def write_manifest(manifest: dict, path):
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_lines_csv(lines, deltas, path):
    """Resonance-line overlays sampled on the sweep delta grid."""
    with open(path, "w") as fh:
        fh.write("j_to,delta_m,m,delta_rad,tau_ps\n")
        for line in lines:
            for delta in deltas:
                fh.write(
                    f"{line.j_to},{line.delta_m},{line.m},"
                    f"{format_float(float(delta))},"
                    f"{format_float(line.tau_at(float(delta)))}\n"
                )


def parse_config_file(path) -> dict:
    """Flat key = value config (# comments) or a JSON manifest/config."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    stripped = text.lstrip()
    if stripped.startswith("{"):
        data = json.loads(text)
        # a manifest from a previous run reproduces that run
        if "config" in data and isinstance(data["config"], dict):
            return data["config"]
        return data
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        out[key.strip()] = value.strip()
    return out


def emit_outputs(result: SweepResult, outdir, formats=("csv",),
                 basename="sweep") -> dict:
    """Write the requested artifacts; returns {kind: path}."""
    os.makedirs(outdir, exist_ok=True)
    paths = {}
    if "csv" in formats:
        csv_path = os.path.join(outdir, f"{basename}.csv")
        write_sweep_csv(result, csv_path)
        paths["csv"] = csv_path
    if "pgm" in formats:
        for name in write_heatmaps(result, outdir):
            paths.setdefault("pgm", []).append(os.path.join(outdir, name))
    manifest_path = os.path.join(outdir, f"{basename}_manifest.json")
    write_manifest(result.manifest, manifest_path)
    paths["manifest"] = manifest_path
    return paths
