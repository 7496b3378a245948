"""Pure-Python reference kernels (numpy/scipy).

Same contract as the compiled core: scaled Taylor evaluation of
exp(1j * strength * H) applied to a vector (H in CSR arrays), and the
whole-train driver alternating kicks with free-evolution phases.
"""

import numpy as np
from scipy.sparse import csr_matrix

_MAX_TERMS = 120


def _hnorm(indptr, data):
    """Infinity norm of H from the CSR data (decides the substep count)."""
    if not len(data):
        return 0.0
    # |x|_1-style complex magnitude proxy, matching the compiled core
    mags = np.abs(data.real) + np.abs(data.imag)
    csum = np.concatenate(([0.0], np.cumsum(mags)))
    return float((csum[indptr[1:]] - csum[indptr[:-1]]).max())


def _mass(x):
    return float(np.abs(x.real).sum() + np.abs(x.imag).sum())


def _expm_into(h, acc, strength, tol, hnorm):
    steps = max(1, int(np.ceil(abs(strength) * hnorm)))
    scale = 1j * strength / steps
    for _ in range(steps):
        term = acc.copy()
        total = acc
        for k in range(1, _MAX_TERMS + 1):
            term = h.dot(term) * (scale / k)
            total += term
            if _mass(term) <= tol * _mass(total):
                break
        else:
            raise RuntimeError("Taylor series for the kick did not converge")
        acc = total
    return acc


def expm_apply(indptr, indices, data, v, strength, tol=1e-16):
    """Apply exp(1j * strength * H) to v for sparse Hermitian H (CSR)."""
    n = len(v)
    acc = np.array(v, dtype=np.complex128)
    if strength == 0.0 or not len(data):
        return acc
    data = np.asarray(data, dtype=np.complex128)
    h = csr_matrix((data, indices, indptr), shape=(n, n))
    return _expm_into(h, acc, strength, tol, _hnorm(indptr, data))


def propagate_train(indptr, indices, const, plus, minus, angles, strengths,
                    gap_phase, shell, v, tol=1e-16):
    """Alternate sudden kicks and uniform free-evolution phases.

    Same contract as the compiled version: returns (final vector, maximum
    over kicks of the population in the shell index set).
    """
    n = len(v)
    acc = np.array(v, dtype=np.complex128)
    shell = np.asarray(shell, dtype=np.int64)
    h = csr_matrix((np.zeros(len(const), dtype=np.complex128), indices, indptr),
                   shape=(n, n))
    max_shell = 0.0
    n_pulses = len(angles)
    for p in range(n_pulses):
        if strengths[p] != 0.0:
            phase = np.exp(2j * angles[p])
            data = const + phase * plus + np.conj(phase) * minus
            h.data[:] = data
            acc = _expm_into(h, acc, strengths[p], tol, _hnorm(indptr, data))
        if len(shell):
            pop = float(
                (acc[shell].real ** 2 + acc[shell].imag ** 2).sum()
            )
            max_shell = max(max_shell, pop)
        if p < n_pulses - 1:
            acc *= gap_phase
    return acc, max_shell
