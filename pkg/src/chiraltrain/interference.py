"""First-order interference model of the train-driven Raman transitions.

For weak pulses the N-pulse transition amplitude is a geometric sum over
pulse indices; its squared modulus factorizes into the single-pulse
probability times the Fejer-kernel sum

    Phi(phi) = sin^2(N phi / 2) / sin^2(phi / 2),
    phi = dE * tau - dM * delta   (hbar = 1),

which peaks (value N^2) on the resonance lines

    tau = t_exc * (m + dM * delta / (2 pi)),   m integer,

and vanishes at detunings x = (m/N) t_exc off a line.  This module is the
analytic oracle the full simulation is checked against.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .angmom import rotmat_element_linear
from .molecule import MoleculeSpec, energy_linear, excitation_period

__all__ = [
    "ResonanceLine",
    "phi_sum",
    "resonance_lines",
    "first_order_transition_prob",
    "phi_main_peak_width",
]


@dataclass(frozen=True)
class ResonanceLine:
    """One resonance line tau(delta) = t_exc * (m + dM * delta / 2pi)."""

    j_to: int
    delta_m: int
    m: int
    t_exc: float

    def tau_at(self, delta: float) -> float:
        return self.t_exc * (self.m + self.delta_m * delta / (2.0 * math.pi))

    @property
    def slope(self) -> float:
        """d tau / d delta."""
        return self.t_exc * self.delta_m / (2.0 * math.pi)


def phi_sum(n_pulses: int, phase: float) -> float:
    """Fejer-kernel interference sum, exactly N^2 at phase in 2*pi*Z.

    Evaluated in closed form; near the removable singularity
    (|sin(phase/2)| < 1e-6) a quadratic expansion takes over.
    """
    if n_pulses < 1:
        raise ValueError("need at least one pulse")
    half = 0.5 * phase
    s = math.sin(half)
    if abs(s) < 1e-6:
        # eta = distance from the nearest multiple of 2*pi
        eta = 2.0 * math.asin(s)
        n2 = n_pulses * n_pulses
        return n2 * (1.0 - (n2 - 1.0) * eta * eta / 12.0)
    ratio = math.sin(n_pulses * half) / s
    return ratio * ratio


def resonance_lines(molecule: MoleculeSpec, j_to: int, delta_m: int,
                    m_range) -> list:
    """Lines of the J_to-2 -> J_to transition for the given dM branch."""
    if j_to < 2:
        raise ValueError("resonance lines need J_to >= 2")
    if delta_m not in (-2, 0, 2):
        raise ValueError("dM must be one of -2, 0, +2")
    t_exc = excitation_period(molecule, j_to)
    return [
        ResonanceLine(j_to=j_to, delta_m=delta_m, m=m, t_exc=t_exc)
        for m in m_range
    ]


def first_order_transition_prob(strength, j_from, m_from, j_to, m_to,
                                n_pulses, tau, delta,
                                molecule: MoleculeSpec) -> float:
    """P^2 |<to|cos²β_0|from>|^2 Phi for an N-pulse train (weak field).

    ``strength`` is the per-pulse P.  Valid for N*P < 1; a warning is
    emitted outside that regime.  dM = +-4 or odd transitions vanish at
    first order (the coupling is a rank-2 tensor).
    """
    if n_pulses * strength >= 1.0:
        warnings.warn(
            "first-order interference model used outside its weak-field "
            f"validity (N*P = {n_pulses * strength:.2f} >= 1)",
            stacklevel=2,
        )
    delta_m = m_to - m_from
    element = _coupling_element(j_from, m_from, j_to, m_to)
    if element == 0.0:
        return 0.0
    de = energy_linear(molecule, j_to) - energy_linear(molecule, j_from)
    phase = de * tau - delta_m * delta
    return strength ** 2 * element ** 2 * phi_sum(n_pulses, phase)


def _coupling_element(j_from, m_from, j_to, m_to) -> float:
    """<to|cos²β at angle 0|from> from the three rank-2 components."""
    value = -rotmat_element_linear(j_to, m_to, j_from, m_from, 0) / 3.0
    if (j_to, m_to) == (j_from, m_from):
        value += 1.0 / 3.0
    inv_sqrt6 = 1.0 / math.sqrt(6.0)
    value += inv_sqrt6 * rotmat_element_linear(j_to, m_to, j_from, m_from, -2)
    value += inv_sqrt6 * rotmat_element_linear(j_to, m_to, j_from, m_from, 2)
    return value


def phi_main_peak_width(n_pulses: int, rtol: float = 1e-12) -> float:
    """Full width at half maximum of the main Phi peak, in phase units."""
    target = 0.5 * n_pulses * n_pulses
    lo, hi = 0.0, math.pi / n_pulses  # first zero of Phi is at 2*pi/N
    while hi - lo > rtol:
        mid = 0.5 * (lo + hi)
        if phi_sum(n_pulses, mid) > target:
            lo = mid
        else:
            hi = mid
    return 2.0 * 0.5 * (lo + hi)
