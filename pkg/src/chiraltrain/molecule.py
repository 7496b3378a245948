"""Molecular data: spectroscopic constants, energy levels, thermal weights.

Internal units put hbar = 1, time in picoseconds, and energies / angular
frequencies in rad/ps.  Conversions from cm^-1 and from SI quantities
happen only here at the configuration boundary.

The rotational constants of the nitrogen isotopologues are fixed by their
revival times (8.38 ps and 8.98 ps); centrifugal distortion, polarizability
anisotropy and the oxygen fine-structure constants are literature defaults
and are documented as such (see README).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "FineStructure",
    "MoleculeSpec",
    "PRESETS",
    "get_preset",
    "RAD_PS_PER_CM",
    "KB_RAD_PS_PER_K",
    "energy_linear",
    "energy_caseb",
    "energy_of_label",
    "revival_time",
    "excitation_period",
    "thermal_weights",
    "thermal_cutoff",
    "linear_basis",
    "caseb_basis",
]

# 2*pi*c with c in cm/ps: converts cm^-1 to rad/ps
RAD_PS_PER_CM = 2.0 * math.pi * 2.99792458e-2
# k_B / hbar in rad/ps per kelvin
KB_RAD_PS_PER_K = 1.380649e-23 / 1.054571817e-34 * 1e-12

# 1 atomic unit of polarizability in SI (C m^2 / V)
_AU_POLARIZABILITY = 1.64877727436e-41


@dataclass(frozen=True)
class FineStructure:
    """Spin-spin (lambda) and spin-rotation (gamma) constants in rad/ps."""

    lambda_ss: float
    gamma_sr: float


@dataclass(frozen=True)
class MoleculeSpec:
    """Spectroscopic constants of one diatomic species.

    ``spin_weights`` maps the parity (0 = even, 1 = odd) of the rotational
    quantum number (J for closed-shell species, N for case (b)) to its
    nuclear-spin statistical weight.  ``fine_structure`` is present exactly
    for case-(b) species.
    """

    name: str
    B: float                       # rotational constant, rad/ps
    D: float                       # centrifugal distortion, rad/ps
    delta_alpha: float             # polarizability anisotropy, C m^2 / V
    spin_weights: dict = field(default_factory=lambda: {0: 1.0, 1: 1.0})
    fine_structure: FineStructure | None = None

    def __post_init__(self):
        if self.B <= 0:
            raise ValueError("B must be positive")
        if self.D < 0:
            raise ValueError("D must be non-negative")
        if any(w < 0 for w in self.spin_weights.values()):
            raise ValueError("spin weights must be non-negative")
        if self.is_caseb and self.spin_weights.get(0, 0.0) != 0.0:
            raise ValueError("case-(b) species allow odd N only")

    @property
    def is_caseb(self) -> bool:
        return self.fine_structure is not None

    @property
    def allowed_rot_parity(self) -> str:
        even = self.spin_weights.get(0, 0.0) > 0
        odd = self.spin_weights.get(1, 0.0) > 0
        if even and odd:
            return "both"
        return "even" if even else "odd"


def _n2_like(name: str, t_rev_ps: float, d_cm: float, even: float, odd: float):
    return MoleculeSpec(
        name=name,
        B=math.pi / t_rev_ps,
        D=d_cm * RAD_PS_PER_CM,
        delta_alpha=6.7 * _AU_POLARIZABILITY,
        spin_weights={0: even, 1: odd},
    )


_D14_CM = 5.76e-6                       # cm^-1, literature default
_D15_CM = _D14_CM * (8.38 / 8.98) ** 2  # scales with B^2

PRESETS: dict[str, MoleculeSpec] = {
    # B pinned by the published revival times; spin weights 2:1 / 1:3
    "n14n2": _n2_like("n14n2", 8.38, _D14_CM, even=2.0, odd=1.0),
    "n15n2": _n2_like("n15n2", 8.98, _D15_CM, even=1.0, odd=3.0),
    "n15n2_ortho": _n2_like("n15n2_ortho", 8.98, _D15_CM, even=0.0, odd=1.0),
    "n15n2_para": _n2_like("n15n2_para", 8.98, _D15_CM, even=1.0, odd=0.0),
    "o16o2": MoleculeSpec(
        name="o16o2",
        B=1.43767 * RAD_PS_PER_CM,
        D=4.84e-6 * RAD_PS_PER_CM,
        delta_alpha=7.25 * _AU_POLARIZABILITY,
        spin_weights={0: 0.0, 1: 1.0},
        fine_structure=FineStructure(
            lambda_ss=1.9845 * RAD_PS_PER_CM,
            gamma_sr=-0.00842 * RAD_PS_PER_CM,
        ),
    ),
}


def get_preset(name: str) -> MoleculeSpec:
    try:
        return PRESETS[name]
    except KeyError:
        raise KeyError(
            f"unknown molecule preset {name!r}; available: {sorted(PRESETS)}"
        ) from None


def energy_linear(spec: MoleculeSpec, j: int) -> float:
    """Rigid-rotor energy B*J(J+1) - D*J^2(J+1)^2 in rad/ps."""
    if j < 0:
        raise ValueError("J must be non-negative")
    x = j * (j + 1)
    return spec.B * x - spec.D * x * x


def energy_caseb(spec: MoleculeSpec, j: int, n: int) -> float:
    """Case-(b) level energy: rotation plus diagonal spin-spin/spin-rotation.

    Diagonal effective-Hamiltonian form for a 3-Sigma state (S=1):
      J=N+1: -(2/3) lambda N/(2N+3)   + gamma N
      J=N:   +(2/3) lambda            - gamma
      J=N-1: -(2/3) lambda (N+1)/(2N-1) - gamma (N+1)
    """
    if not spec.is_caseb:
        raise ValueError(f"{spec.name} has no fine structure")
    if n < 1 or n % 2 == 0:
        raise ValueError(f"N must be odd and positive, got {n}")
    if j not in (n - 1, n, n + 1):
        raise ValueError(f"J must be one of N-1, N, N+1; got J={j}, N={n}")
    lam = spec.fine_structure.lambda_ss
    gam = spec.fine_structure.gamma_sr
    x = n * (n + 1)
    base = spec.B * x - spec.D * x * x
    if j == n + 1:
        return base - (2.0 * lam / 3.0) * n / (2 * n + 3) + gam * n
    if j == n:
        return base + 2.0 * lam / 3.0 - gam
    return base - (2.0 * lam / 3.0) * (n + 1) / (2 * n - 1) - gam * (n + 1)


def energy_of_label(spec: MoleculeSpec, label) -> float:
    """Energy of a basis label: (J, M) for linear, (J, N, M) for case (b)."""
    if len(label) == 2:
        return energy_linear(spec, label[0])
    return energy_caseb(spec, label[0], label[1])


def revival_time(spec: MoleculeSpec) -> float:
    """Rotational revival time pi/B in ps (rigid linear rotor only)."""
    if spec.is_caseb:
        raise ValueError("no clean revival time for a case-(b) species")
    return math.pi / spec.B


def excitation_period(spec: MoleculeSpec, j: int) -> float:
    """Beat period 2*pi/(E_J - E_{J-2}) of the J-2 -> J Raman transition.

    For case-(b) species the rotation-only spacing (fine structure ignored)
    is used; it sets the line centers of the resonance pattern.
    """
    if j < 2:
        raise ValueError("excitation period needs J >= 2")
    if spec.is_caseb:
        e_hi = spec.B * j * (j + 1) - spec.D * (j * (j + 1)) ** 2
        jl = j - 2
        e_lo = spec.B * jl * (jl + 1) - spec.D * (jl * (jl + 1)) ** 2
        return 2.0 * math.pi / (e_hi - e_lo)
    return 2.0 * math.pi / (energy_linear(spec, j) - energy_linear(spec, j - 2))


def _level_labels(spec: MoleculeSpec, r_max: int):
    """Thermally relevant level labels up to the rotational cutoff.

    Yields ((J,), J) for linear species and ((J, N), N) for case (b),
    where the second item is the quantum number whose parity carries the
    spin weight.
    """
    if spec.is_caseb:
        for n in range(1, r_max + 1, 2):
            for j in (n - 1, n, n + 1):
                yield (j, n), n
    else:
        for j in range(0, r_max + 1):
            yield (j,), j


def _level_energy(spec: MoleculeSpec, level) -> float:
    if len(level) == 1:
        return energy_linear(spec, level[0])
    return energy_caseb(spec, level[0], level[1])


def thermal_weights(spec: MoleculeSpec, temperature: float, cutoff: int):
    """Normalized Boltzmann weights per initial sublevel.

    Returns a list of (label, weight) with label = (J, M) or (J, N, M).
    Each M sublevel of a level shares the level weight equally.  Raises if
    the cutoff truncates more than 1e-6 of the total thermal population;
    the error message reports the missing tail mass.
    """
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    weights = {}
    if temperature == 0.0:
        best = None
        for level, rq in _level_labels(spec, cutoff if cutoff > 1 else 1):
            if spec.spin_weights.get(rq % 2, 0.0) <= 0:
                continue
            e = _level_energy(spec, level)
            if best is None or e < best[1]:
                best = (level, e)
        if best is None:
            raise ValueError("no thermally allowed level below cutoff")
        level = best[0]
        j = level[0]
        for m in range(-j, j + 1):
            weights[level + (m,)] = 1.0 / (2 * j + 1)
        return sorted(weights.items())

    kt = KB_RAD_PS_PER_K * temperature

    def level_weight(level, rq):
        g = spec.spin_weights.get(rq % 2, 0.0)
        if g <= 0:
            return 0.0
        j = level[0]
        return g * (2 * j + 1) * math.exp(-_level_energy(spec, level) / kt)

    def levels_at(r):
        if spec.is_caseb:
            if r % 2 == 1:
                return [((j, r), r) for j in (r - 1, r, r + 1)]
            return []
        return [((r,), r)]

    total_in = 0.0
    per_level = []
    for level, rq in _level_labels(spec, cutoff):
        w = level_weight(level, rq)
        per_level.append((level, w))
        total_in += w
    # tail beyond the cutoff
    tail = 0.0
    for r in range(cutoff + 1, cutoff + 400):
        step_total = sum(level_weight(level, rq) for level, rq in levels_at(r))
        tail += step_total
        if r > cutoff + 5 and step_total < 1e-20 * max(total_in, 1e-300):
            break
    total = total_in + tail
    if total_in <= 0.0:
        raise ValueError("no thermal population below cutoff")
    if tail / total >= 1e-6:
        raise ValueError(
            f"thermal cutoff {cutoff} too small: truncated tail mass "
            f"{tail / total:.3e} of total"
        )
    # normalize over the included levels so the weights sum to exactly 1
    for level, w in per_level:
        if w <= 0.0:
            continue
        j = level[0]
        for m in range(-j, j + 1):
            weights[level + (m,)] = w / total_in / (2 * j + 1)
    return sorted(weights.items())


def thermal_cutoff(spec: MoleculeSpec, temperature: float) -> int:
    """Smallest rotational cutoff whose truncated tail mass is < 1e-6."""
    if temperature <= 0.0:
        return 2 if not spec.is_caseb else 1
    r = 1
    while r < 400:
        try:
            thermal_weights(spec, temperature, r)
            return r
        except ValueError:
            r += 1
    raise RuntimeError("thermal cutoff search failed")


def linear_basis(j_parity: int, m_parity: int, j_max: int):
    """Truncated |J,M> lattice closed under the dJ, dM = 0,+-2 rules."""
    if j_max < 0:
        raise ValueError("j_max must be >= 0")
    out = []
    for j in range(j_parity % 2, j_max + 1, 2):
        m0 = -j + ((j + m_parity) % 2)
        for m in range(m0, j + 1, 2):
            out.append((j, m))
    return tuple(out)


def caseb_basis(m_parity: int, n_max: int):
    """Truncated |J,N,M> case-(b) lattice (odd N, J = N-1..N+1)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    out = []
    for n in range(1, n_max + 1, 2):
        for j in (n - 1, n, n + 1):
            m0 = -j + ((j + m_parity) % 2)
            for m in range(m0, j + 1, 2):
                out.append((j, n, m))
    return tuple(out)
