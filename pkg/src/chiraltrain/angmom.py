"""Exact angular-momentum algebra.

Wigner 3-j and 6-j symbols are evaluated from Racah's single-sum formula
using exact big-integer factorials and rational arithmetic; the result is
converted to floating point only at the very end, so there is no
cancellation error.  Quantum numbers are carried as doubled integers
(``HalfInt``) so that half-integer momenta cost nothing extra.

On top of the symbols, this module builds the matrix elements of the
squared direction cosine cos²β between a linearly polarized field axis
(rotated by an angle chi about Z) and the molecular axis, in two bases:

* linear rotor ``|J,M>`` states,
* Hund's case (b) ``|J,N,M>`` states with S=1, Lambda=0 and odd N.

The coupling matrices are Hermitian and sparse (at most a handful of
entries per row under the dJ,dN in {0,±2}, dM in {0,±2} selection rules).
The chi-dependence enters only as scalar phases e^{±2i*chi} multiplying the
dM = -2/+2 blocks, so a per-basis ``CouplingStructure`` is cached and a
matrix for any angle is assembled in O(nnz).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "HalfInt",
    "CouplingMatrix",
    "CouplingStructure",
    "wigner_3j",
    "wigner_6j",
    "rotmat_element_linear",
    "rotmat_element_caseb",
    "cos2beta_matrix_linear",
    "cos2beta_matrix_caseb",
    "cos2beta_structure_linear",
    "cos2beta_structure_caseb",
]


@dataclass(frozen=True)
class HalfInt:
    """An exact integer or half-integer, stored as twice its value.

    ``HalfInt(3)`` is 3/2; use :meth:`of` to build one from a numeric value.
    """

    twice: int

    @classmethod
    def of(cls, value) -> "HalfInt":
        """Coerce an int, float or HalfInt to a HalfInt (must be exact)."""
        if isinstance(value, HalfInt):
            return value
        doubled = 2 * value
        rounded = round(doubled)
        if abs(doubled - rounded) > 1e-9:
            raise ValueError(f"{value!r} is not an integer or half-integer")
        return cls(int(rounded))

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __float__(self) -> float:
        return self.twice / 2.0

    def __neg__(self) -> "HalfInt":
        return HalfInt(-self.twice)

    def __add__(self, other) -> "HalfInt":
        return HalfInt(self.twice + HalfInt.of(other).twice)

    def __sub__(self, other) -> "HalfInt":
        return HalfInt(self.twice - HalfInt.of(other).twice)

    def __repr__(self) -> str:
        if self.twice % 2 == 0:
            return f"HalfInt({self.twice // 2})"
        return f"HalfInt({self.twice}/2)"


def _dbl(x) -> int:
    """Doubled-integer representation of an int/float/HalfInt momentum."""
    if isinstance(x, HalfInt):
        return x.twice
    doubled = 2 * x
    rounded = round(doubled)
    if abs(doubled - rounded) > 1e-9:
        raise ValueError(f"{x!r} is not an integer or half-integer")
    return int(rounded)


_FACT: list[int] = [1]


def _fact(n: int) -> int:
    """Exact factorial with a growing table (n is always small here)."""
    while len(_FACT) <= n:
        _FACT.append(_FACT[-1] * len(_FACT))
    return _FACT[n]


def _triangle_ok(d1: int, d2: int, d3: int) -> bool:
    """Triangle rule in doubled representation, including integer perimeter."""
    if (d1 + d2 + d3) % 2 != 0:
        return False
    return abs(d1 - d2) <= d3 <= d1 + d2


def _delta_frac(d1: int, d2: int, d3: int) -> Fraction:
    """Squared triangle coefficient Delta(j1 j2 j3) as an exact rational."""
    return Fraction(
        _fact((d1 + d2 - d3) // 2)
        * _fact((d1 - d2 + d3) // 2)
        * _fact((-d1 + d2 + d3) // 2),
        _fact((d1 + d2 + d3) // 2 + 1),
    )


# Memoization caches, keyed on canonicalized doubled arguments.  Reads and
# idempotent inserts on a dict are safe under the GIL; sweep worker
# processes each hold an independent copy.
_CACHE_3J: dict[tuple, float] = {}
_CACHE_6J: dict[tuple, float] = {}


def _canonical_3j(d1, d2, d3, m1, m2, m3):
    """Smallest equivalent argument tuple and the phase relating it.

    Even column permutations and simultaneous m-negation leave the value
    invariant up to (-1)^(j1+j2+j3); odd permutations carry the same phase.
    """
    perimeter_odd = ((d1 + d2 + d3) // 2) % 2 == 1
    cols = [(d1, m1), (d2, m2), (d3, m3)]
    best = None
    best_sign = 1
    even_perms = [(0, 1, 2), (1, 2, 0), (2, 0, 1)]
    odd_perms = [(0, 2, 1), (2, 1, 0), (1, 0, 2)]
    for perms, perm_odd in ((even_perms, False), (odd_perms, True)):
        for p in perms:
            arranged = [cols[i] for i in p]
            for flip in (False, True):
                mult = -1 if flip else 1
                key = tuple(col[0] for col in arranged) + tuple(
                    mult * col[1] for col in arranged
                )
                odd_ops = int(perm_odd) + int(flip)
                sign = -1 if perimeter_odd and odd_ops % 2 else 1
                if best is None or key < best:
                    best = key
                    best_sign = sign
    return best, best_sign


def wigner_3j(j1, j2, j3, m1, m2, m3) -> float:
    """Standard Wigner 3-j symbol; exactly 0 for invalid couplings.

    Arguments may be ints, floats or HalfInt.  Evaluated by Racah's
    single-sum formula over exact rationals, floated at the end.
    """
    d1, d2, d3 = _dbl(j1), _dbl(j2), _dbl(j3)
    e1, e2, e3 = _dbl(m1), _dbl(m2), _dbl(m3)
    if d1 < 0 or d2 < 0 or d3 < 0:
        return 0.0
    if e1 + e2 + e3 != 0:
        return 0.0
    if abs(e1) > d1 or abs(e2) > d2 or abs(e3) > d3:
        return 0.0
    # each j - m must be an integer
    if (d1 - e1) % 2 or (d2 - e2) % 2 or (d3 - e3) % 2:
        return 0.0
    if not _triangle_ok(d1, d2, d3):
        return 0.0

    key, sign = _canonical_3j(d1, d2, d3, e1, e2, e3)
    cached = _CACHE_3J.get(key)
    if cached is None:
        cached = _raw_3j(*key)
        _CACHE_3J[key] = cached
    return sign * cached


def _raw_3j(d1, d2, d3, e1, e2, e3) -> float:
    """Racah sum for a validity-checked 3-j in doubled representation."""
    # integer factorial arguments of the alternating sum
    x1 = (d3 - d2 + e1) // 2  # j3 - j2 + m1
    x2 = (d3 - d1 - e2) // 2  # j3 - j1 - m2
    x3 = (d1 + d2 - d3) // 2  # j1 + j2 - j3
    x4 = (d1 - e1) // 2       # j1 - m1
    x5 = (d2 + e2) // 2       # j2 + m2
    t_min = max(0, -x1, -x2)
    t_max = min(x3, x4, x5)
    if t_min > t_max:
        return 0.0
    total = Fraction(0)
    for t in range(t_min, t_max + 1):
        den = (
            _fact(t)
            * _fact(x1 + t)
            * _fact(x2 + t)
            * _fact(x3 - t)
            * _fact(x4 - t)
            * _fact(x5 - t)
        )
        term = Fraction((-1) ** t, den)
        total += term
    if total == 0:
        return 0.0
    radicand = _delta_frac(d1, d2, d3) * Fraction(
        _fact((d1 + e1) // 2)
        * _fact((d1 - e1) // 2)
        * _fact((d2 + e2) // 2)
        * _fact((d2 - e2) // 2)
        * _fact((d3 + e3) // 2)
        * _fact((d3 - e3) // 2)
    )
    phase = -1 if ((d1 - d2 - e3) // 2) % 2 else 1
    return phase * float(total) * math.sqrt(float(radicand))


def _canonical_6j(d1, d2, d3, f1, f2, f3):
    """Smallest of the 24 symmetry-equivalent argument tuples (phase-free)."""
    top = (d1, d2, d3)
    bot = (f1, f2, f3)
    variants = []
    for p in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (1, 2, 0), (2, 0, 1), (2, 1, 0)):
        t = tuple(top[i] for i in p)
        b = tuple(bot[i] for i in p)
        # swapping upper and lower entries of any two columns
        for swap in ((), (0, 1), (0, 2), (1, 2)):
            tt = list(t)
            bb = list(b)
            for col in swap:
                tt[col], bb[col] = bb[col], tt[col]
            variants.append(tuple(tt) + tuple(bb))
    return min(variants)


def wigner_6j(j1, j2, j3, l1, l2, l3) -> float:
    """Standard Wigner 6-j symbol; 0 when any of the four triads fails."""
    d1, d2, d3 = _dbl(j1), _dbl(j2), _dbl(j3)
    f1, f2, f3 = _dbl(l1), _dbl(l2), _dbl(l3)
    if min(d1, d2, d3, f1, f2, f3) < 0:
        return 0.0
    for tri in ((d1, d2, d3), (d1, f2, f3), (f1, d2, f3), (f1, f2, d3)):
        if not _triangle_ok(*tri):
            return 0.0
    key = _canonical_6j(d1, d2, d3, f1, f2, f3)
    cached = _CACHE_6J.get(key)
    if cached is None:
        cached = _raw_6j(*key)
        _CACHE_6J[key] = cached
    return cached


def _raw_6j(d1, d2, d3, f1, f2, f3) -> float:
    """Racah sum for a validity-checked 6-j in doubled representation."""
    s1 = (d1 + d2 + d3) // 2
    s2 = (d1 + f2 + f3) // 2
    s3 = (f1 + d2 + f3) // 2
    s4 = (f1 + f2 + d3) // 2
    t1 = (d1 + d2 + f1 + f2) // 2
    t2 = (d2 + d3 + f2 + f3) // 2
    t3 = (d1 + d3 + f1 + f3) // 2
    total = Fraction(0)
    for t in range(max(s1, s2, s3, s4), min(t1, t2, t3) + 1):
        den = (
            _fact(t - s1)
            * _fact(t - s2)
            * _fact(t - s3)
            * _fact(t - s4)
            * _fact(t1 - t)
            * _fact(t2 - t)
            * _fact(t3 - t)
        )
        total += Fraction((-1) ** t * _fact(t + 1), den)
    if total == 0:
        return 0.0
    radicand = (
        _delta_frac(d1, d2, d3)
        * _delta_frac(d1, f2, f3)
        * _delta_frac(f1, d2, f3)
        * _delta_frac(f1, f2, d3)
    )
    return float(total) * math.sqrt(float(radicand))


def rotmat_element_linear(j, m, jp, mp, m0) -> float:
    """<J,M| D^(2)*_{M0,0} |J',M'> between linear-rotor states.

    Vanishes unless M = M' + M0, |dJ| <= 2 with J + J' even, and the
    (J 2 J') triangle holds.
    """
    j, m, jp, mp, m0 = (int(x) for x in (j, m, jp, mp, m0))
    if m != mp + m0:
        return 0.0
    value = (
        wigner_3j(j, 2, jp, 0, 0, 0)
        * wigner_3j(j, 2, jp, -m, m0, mp)
        * math.sqrt((2 * j + 1) * (2 * jp + 1))
    )
    if value == 0.0:
        return 0.0
    return value if m % 2 == 0 else -value


def rotmat_element_caseb(j, n, m, jp, np_, mp, m0) -> float:
    """<J,N,M| D^(2)*_{M0,0} |J',N',M'> for S=1, Lambda=0 case-(b) states.

    Wigner-Eckart reduction through the 6-j symbol; the spin is a spectator.
    """
    if m != mp + m0:
        return 0.0
    value = (
        wigner_3j(j, 2, jp, -m, m0, mp)
        * wigner_3j(n, 2, np_, 0, 0, 0)
        * wigner_6j(np_, jp, 1, j, n, 2)
        * math.sqrt((2 * j + 1) * (2 * jp + 1) * (2 * n + 1) * (2 * np_ + 1))
    )
    if value == 0.0:
        return 0.0
    return value if (j + jp - m + 1) % 2 == 0 else -value


@dataclass(frozen=True)
class CouplingMatrix:
    """Sparse Hermitian coupling matrix over an ordered basis (CSR layout)."""

    basis: tuple
    indptr: np.ndarray
    indices: np.ndarray
    data: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def nnz(self) -> int:
        return len(self.data)

    def entry(self, row: int, col: int) -> complex:
        lo, hi = self.indptr[row], self.indptr[row + 1]
        for k in range(lo, hi):
            if self.indices[k] == col:
                return complex(self.data[k])
        return 0.0

    def entries(self):
        """Iterate (row, col, amplitude) over stored entries."""
        for row in range(self.dim):
            for k in range(self.indptr[row], self.indptr[row + 1]):
                yield row, int(self.indices[k]), complex(self.data[k])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=np.complex128)
        for row, col, val in self.entries():
            out[row, col] = val
        return out


class CouplingStructure:
    """Angle-independent decomposition of the cos²β coupling over a basis.

    cos²β(chi) = const + e^{+2i chi} * plus + e^{-2i chi} * minus,
    where the three components share one CSR sparsity pattern.
    """

    def __init__(self, basis, indptr, indices, const, plus, minus):
        self.basis = basis
        self.indptr = indptr
        self.indices = indices
        self.data_const = const
        self.data_plus = plus
        self.data_minus = minus

    @property
    def dim(self) -> int:
        return len(self.basis)

    def compose(self, angle: float, out: np.ndarray | None = None) -> np.ndarray:
        """CSR data array of cos²β at polarization angle ``angle``."""
        ph = complex(math.cos(2 * angle), math.sin(2 * angle))
        if out is None:
            out = np.empty_like(self.data_const)
        np.multiply(self.data_plus, ph, out=out)
        out += self.data_minus * ph.conjugate()
        out += self.data_const
        return out

    def matrix(self, angle: float) -> CouplingMatrix:
        return CouplingMatrix(
            basis=self.basis,
            indptr=self.indptr,
            indices=self.indices,
            data=self.compose(angle),
        )


def _neighbors_linear(a):
    j, m = a
    for dj in (-2, 0, 2):
        for dm in (-2, 0, 2):
            yield (j + dj, m + dm)


def _neighbors_caseb(a):
    j, n, m = a
    for dn in (-2, 0, 2):
        for dj in (-2, -1, 0, 1, 2):
            for dm in (-2, 0, 2):
                yield (j + dj, n + dn, m + dm)


def _build_structure(basis, element, neighbors) -> CouplingStructure:
    """Assemble the shared-pattern CSR components from an element callback.

    ``element(a, b, m0)`` returns <a| D^(2)*_{m0,0} |b> for basis labels;
    ``neighbors(a)`` enumerates candidate partners under the selection rules.
    """
    if not basis:
        raise ValueError("empty basis")
    index = {label: i for i, label in enumerate(basis)}
    dim = len(basis)
    inv_sqrt6 = 1.0 / math.sqrt(6.0)
    indptr = np.zeros(dim + 1, dtype=np.int32)
    cols: list[int] = []
    const_data: list[complex] = []
    plus_data: list[complex] = []
    minus_data: list[complex] = []
    for i, a in enumerate(basis):
        row: list[tuple[int, float, float, float]] = []
        for b in neighbors(a):
            j = index.get(b)
            if j is None:
                continue
            const = -element(a, b, 0) / 3.0
            if i == j:
                const += 1.0 / 3.0
            plus = inv_sqrt6 * element(a, b, -2)
            minus = inv_sqrt6 * element(a, b, 2)
            if const == 0.0 and plus == 0.0 and minus == 0.0:
                continue
            row.append((j, const, plus, minus))
        row.sort(key=lambda item: item[0])
        for j, c, p, q in row:
            cols.append(j)
            const_data.append(c)
            plus_data.append(p)
            minus_data.append(q)
        indptr[i + 1] = len(cols)
    return CouplingStructure(
        basis=tuple(basis),
        indptr=indptr,
        indices=np.asarray(cols, dtype=np.int32),
        const=np.asarray(const_data, dtype=np.complex128),
        plus=np.asarray(plus_data, dtype=np.complex128),
        minus=np.asarray(minus_data, dtype=np.complex128),
    )


_STRUCTURE_CACHE: dict[tuple, CouplingStructure] = {}


def cos2beta_structure_linear(basis) -> CouplingStructure:
    """Cached cos²β structure over a |J,M> basis (labels (J, M))."""
    basis = tuple(basis)
    if not basis:
        raise ValueError("empty basis")
    key = ("linear", basis)
    struct = _STRUCTURE_CACHE.get(key)
    if struct is None:
        struct = _build_structure(
            basis,
            lambda a, b, m0: rotmat_element_linear(a[0], a[1], b[0], b[1], m0),
            _neighbors_linear,
        )
        _STRUCTURE_CACHE[key] = struct
    return struct


def cos2beta_structure_caseb(basis) -> CouplingStructure:
    """Cached cos²β structure over a |J,N,M> case-(b) basis (odd N only)."""
    basis = tuple(basis)
    if not basis:
        raise ValueError("empty basis")
    for label in basis:
        if label[1] % 2 == 0:
            raise ValueError(f"case-(b) basis contains even N: {label}")
    key = ("caseb", basis)
    struct = _STRUCTURE_CACHE.get(key)
    if struct is None:
        struct = _build_structure(
            basis,
            lambda a, b, m0: rotmat_element_caseb(
                a[0], a[1], a[2], b[0], b[1], b[2], m0
            ),
            _neighbors_caseb,
        )
        _STRUCTURE_CACHE[key] = struct
    return struct


def cos2beta_matrix_linear(basis, pulse_angle: float) -> CouplingMatrix:
    """Hermitian matrix of <J,M|cos²β|J',M'> at the given polarization angle."""
    return cos2beta_structure_linear(basis).matrix(pulse_angle)


def cos2beta_matrix_caseb(basis, pulse_angle: float) -> CouplingMatrix:
    """Hermitian matrix of <J,N,M|cos²β|J',N',M'> at the given angle."""
    return cos2beta_structure_caseb(basis).matrix(pulse_angle)
