#!/usr/bin/env python3
"""Benchmark: compiled propagation kernel vs the pure-Python fallback.

Times the single-kick exponential and the whole-train driver on bases of
increasing size, for both backends, and prints the speedup table.

Run:  python benchmarks/bench_kernels.py
"""

import math
import time

import numpy as np

from chiraltrain._kernels import fallback
from chiraltrain.angmom import cos2beta_structure_caseb, cos2beta_structure_linear
from chiraltrain.molecule import (
    caseb_basis,
    energy_caseb,
    energy_linear,
    get_preset,
    linear_basis,
)

try:
    from chiraltrain._kernels import _core
except ImportError:
    _core = None


def _time(fn, min_seconds=0.4):
    fn()  # warm up
    n = 1
    while True:
        t0 = time.perf_counter()
        for _ in range(n):
            fn()
        elapsed = time.perf_counter() - t0
        if elapsed > min_seconds:
            return elapsed / n
        n = max(n + 1, int(n * min_seconds / max(elapsed, 1e-9)))


def bench_case(name, struct, energies, strength, n_pulses):
    data = struct.compose(0.37)
    v = np.zeros(struct.dim, dtype=complex)
    v[0] = 1.0
    gap = np.exp(-1j * energies * 1.7)
    angles = np.array([n * math.pi / 4 for n in range(n_pulses)])
    strengths = np.full(n_pulses, strength)
    shell = np.array([], dtype=np.int32)

    rows = []
    kick_fb = _time(lambda: fallback.expm_apply(
        struct.indptr, struct.indices, data, v, strength))
    train_fb = _time(lambda: fallback.propagate_train(
        struct.indptr, struct.indices, struct.data_const, struct.data_plus,
        struct.data_minus, angles, strengths, gap, shell, v))
    if _core is not None:
        kick_c = _time(lambda: _core.expm_apply(
            struct.indptr, struct.indices, data, v, strength))
        train_c = _time(lambda: _core.propagate_train(
            struct.indptr, struct.indices, struct.data_const,
            struct.data_plus, struct.data_minus, angles, strengths, gap,
            shell, v))
        rows.append((f"{name} kick", kick_fb, kick_c))
        rows.append((f"{name} {n_pulses}-pulse train", train_fb, train_c))
    else:
        rows.append((f"{name} kick", kick_fb, None))
        rows.append((f"{name} {n_pulses}-pulse train", train_fb, None))
    return rows


def main():
    n14 = get_preset("n14n2")
    o2 = get_preset("o16o2")
    cases = []
    for j_max in (20, 34):
        basis = linear_basis(0, 0, j_max)
        struct = cos2beta_structure_linear(basis)
        energies = np.array([energy_linear(n14, j) for j, _ in basis])
        cases += bench_case(f"linear J<={j_max} (dim {struct.dim})",
                            struct, energies, 0.625, 8)
    basis = caseb_basis(0, 21)
    struct = cos2beta_structure_caseb(basis)
    energies = np.array([energy_caseb(o2, j, n) for j, n, _ in basis])
    cases += bench_case(f"case-b N<=21 (dim {struct.dim})",
                        struct, energies, 2.5, 8)

    print(f"{'workload':<42} {'fallback':>10} {'compiled':>10} {'speedup':>8}")
    for name, t_fb, t_c in cases:
        if t_c is None:
            print(f"{name:<42} {t_fb * 1e3:>8.2f}ms {'n/a':>10} {'':>8}")
        else:
            print(f"{name:<42} {t_fb * 1e3:>8.2f}ms {t_c * 1e3:>8.2f}ms "
                  f"{t_fb / t_c:>7.1f}x")
    if _core is None:
        print("\ncompiled core not built; run `python setup.py build_ext "
              "--inplace` to compare")


if __name__ == "__main__":
    main()
