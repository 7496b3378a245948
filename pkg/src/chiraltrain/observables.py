"""Thermal-ensemble observables: populations, directionality, <Jz>, energy.

All reductions run over a weighted list of final states, one per initial
state of the classical thermal mixture: observables are computed per state
and weight-summed, never by averaging amplitudes.  Levels are labeled by J
for linear species and by N for case-(b) species (populations there sum
the J = N-1..N+1 sublevels).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .molecule import MoleculeSpec, energy_of_label

__all__ = [
    "EPSILON_FLOOR",
    "LevelReport",
    "population",
    "directionality",
    "jz_expect",
    "absorbed_energy",
    "thermal_baseline",
    "build_report",
]

# below this population the directionality ratio is numerically meaningless
EPSILON_FLOOR = 1e-6


def _level_of(label) -> int:
    """Reporting level: J for (J, M), N for (J, N, M)."""
    return label[0] if len(label) == 2 else label[1]


def _m_of(label) -> int:
    return label[-1]


@dataclass(frozen=True)
class LevelReport:
    """Per-level populations and directionality plus scalar observables.

    ``directionality[level]`` is NaN wherever the population is below
    ``EPSILON_FLOOR``.
    """

    populations: dict
    directionality: dict
    jz: float
    energy_absorbed: float


def population(weighted_states) -> dict:
    """Q per level: sum of weighted |C|^2 over the level's sublevels."""
    q: dict = {}
    for weight, state in weighted_states:
        probs = np.abs(state.coeffs) ** 2
        for i, label in enumerate(state.basis):
            lvl = _level_of(label)
            q[lvl] = q.get(lvl, 0.0) + weight * float(probs[i])
    return dict(sorted(q.items()))


def directionality(weighted_states) -> dict:
    """epsilon per level: (Q_L - Q_R)/(Q_L + Q_R), M=0 split evenly.

    Levels with population below EPSILON_FLOOR report NaN.
    """
    left: dict = {}
    right: dict = {}
    for weight, state in weighted_states:
        probs = np.abs(state.coeffs) ** 2
        for i, label in enumerate(state.basis):
            lvl = _level_of(label)
            m = _m_of(label)
            p = weight * float(probs[i])
            if m > 0:
                left[lvl] = left.get(lvl, 0.0) + p
            elif m < 0:
                right[lvl] = right.get(lvl, 0.0) + p
            else:
                left[lvl] = left.get(lvl, 0.0) + 0.5 * p
                right[lvl] = right.get(lvl, 0.0) + 0.5 * p
    out = {}
    for lvl in sorted(set(left) | set(right)):
        ql = left.get(lvl, 0.0)
        qr = right.get(lvl, 0.0)
        total = ql + qr
        out[lvl] = (ql - qr) / total if total > EPSILON_FLOOR else math.nan
    return out


def jz_expect(weighted_states) -> float:
    """Ensemble expectation of the angular-momentum projection on Z."""
    total = 0.0
    for weight, state in weighted_states:
        probs = np.abs(state.coeffs) ** 2
        ms = np.array([_m_of(label) for label in state.basis])
        total += weight * float(np.dot(ms, probs))
    return total


def absorbed_energy(weighted_states, molecule: MoleculeSpec,
                    baseline: float = 0.0) -> float:
    """Mean rotational energy (rad/ps) minus the thermal baseline."""
    total = 0.0
    for weight, state in weighted_states:
        probs = np.abs(state.coeffs) ** 2
        energies = np.array(
            [energy_of_label(molecule, label) for label in state.basis]
        )
        total += weight * float(np.dot(energies, probs))
    return total - baseline


def thermal_baseline(molecule: MoleculeSpec, weighted_labels) -> float:
    """Mean energy of the initial mixture [(label, weight), ...]."""
    return sum(w * energy_of_label(molecule, label) for label, w in weighted_labels)


def build_report(weighted_states, molecule: MoleculeSpec,
                 baseline: float = 0.0, levels=None) -> LevelReport:
    """Assemble a LevelReport, optionally restricted to selected levels."""
    q = population(weighted_states)
    eps = directionality(weighted_states)
    if levels is not None:
        q = {lvl: q.get(lvl, 0.0) for lvl in levels}
        eps = {lvl: eps.get(lvl, math.nan) for lvl in levels}
    return LevelReport(
        populations=q,
        directionality=eps,
        jz=jz_expect(weighted_states),
        energy_absorbed=absorbed_energy(weighted_states, molecule, baseline),
    )
