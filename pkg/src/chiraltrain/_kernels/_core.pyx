# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled propagation kernels.

exp(1j*strength*H) @ v on a CSR matrix (scaled Taylor series), plus a
whole-train driver that alternates kicks and free-evolution phases without
returning to Python between pulses.  Complex arithmetic is written out over
real/imaginary parts so the C compiler emits plain mul/add instead of
__muldc3 calls.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ceil, cos, fabs, sin

cnp.import_array()

cdef int MAX_TERMS = 120


cdef int _expm_inplace(cnp.int32_t[::1] indptr, cnp.int32_t[::1] indices,
                       double[::1] data, double[::1] acc,
                       double[::1] term, double[::1] nxt,
                       Py_ssize_t n, double strength, double tol) except -1:
    """acc <- exp(1j*strength*H) acc using term/nxt as scratch."""
    cdef Py_ssize_t i, k, kk, col, lo, hi
    cdef double[::1] swap
    cdef double rowsum, hnorm = 0.0
    cdef double term_mass, acc_mass
    cdef double sre, sim, dre, dim_, tre, tim, cre, cim
    cdef int steps, step, converged

    if strength == 0.0:
        return 0
    for i in range(n):
        rowsum = 0.0
        for kk in range(indptr[i], indptr[i + 1]):
            rowsum += fabs(data[2 * kk]) + fabs(data[2 * kk + 1])
        if rowsum > hnorm:
            hnorm = rowsum
    steps = <int>ceil(hnorm * fabs(strength))
    if steps < 1:
        steps = 1

    for step in range(steps):
        for i in range(2 * n):
            term[i] = acc[i]
        converged = 0
        for k in range(1, MAX_TERMS + 1):
            cre = 0.0
            cim = strength / steps / k
            term_mass = 0.0
            acc_mass = 0.0
            for i in range(n):
                sre = 0.0
                sim = 0.0
                lo = indptr[i]
                hi = indptr[i + 1]
                for kk in range(lo, hi):
                    col = indices[kk]
                    dre = data[2 * kk]
                    dim_ = data[2 * kk + 1]
                    tre = term[2 * col]
                    tim = term[2 * col + 1]
                    sre += dre * tre - dim_ * tim
                    sim += dre * tim + dim_ * tre
                tre = sre * cre - sim * cim
                tim = sre * cim + sim * cre
                nxt[2 * i] = tre
                nxt[2 * i + 1] = tim
                acc[2 * i] += tre
                acc[2 * i + 1] += tim
                term_mass += fabs(tre) + fabs(tim)
                acc_mass += fabs(acc[2 * i]) + fabs(acc[2 * i + 1])
            swap = term
            term = nxt
            nxt = swap
            if term_mass <= tol * acc_mass:
                converged = 1
                break
        if not converged:
            raise RuntimeError("Taylor series for the kick did not converge")
    return 0


def expm_apply(cnp.int32_t[::1] indptr, cnp.int32_t[::1] indices,
               data_c, v_c, double strength, double tol=1e-16):
    """Apply exp(1j * strength * H) to v for sparse Hermitian H (CSR)."""
    cdef Py_ssize_t n = len(v_c)
    data_arr = np.ascontiguousarray(data_c, dtype=np.complex128).view(np.float64)
    acc_arr = np.array(v_c, dtype=np.complex128)
    if strength == 0.0 or len(data_c) == 0:
        return acc_arr
    term_arr = np.empty(n, dtype=np.complex128)
    next_arr = np.empty(n, dtype=np.complex128)
    _expm_inplace(indptr, indices, data_arr,
                  acc_arr.view(np.float64), term_arr.view(np.float64),
                  next_arr.view(np.float64), n, strength, tol)
    return acc_arr


def propagate_train(cnp.int32_t[::1] indptr, cnp.int32_t[::1] indices,
                    const_c, plus_c, minus_c,
                    angles_c, strengths_c, gap_phase_c, shell_c,
                    v_c, double tol=1e-16):
    """Alternate sudden kicks and uniform free-evolution phases.

    Pulse p applies exp(1j*strengths[p]*H(angles[p])) with
    H(a) = const + e^{2ia} plus + e^{-2ia} minus, then (between pulses)
    multiplies by gap_phase.  Returns (final vector, max over kicks of the
    population in the shell index set).
    """
    cdef Py_ssize_t n = len(v_c)
    cdef Py_ssize_t nnz = len(const_c)
    acc_arr = np.array(v_c, dtype=np.complex128)
    term_arr = np.empty(n, dtype=np.complex128)
    next_arr = np.empty(n, dtype=np.complex128)
    data_arr = np.empty(nnz, dtype=np.complex128)

    const_f = np.ascontiguousarray(const_c, dtype=np.complex128).view(np.float64)
    plus_f = np.ascontiguousarray(plus_c, dtype=np.complex128).view(np.float64)
    minus_f = np.ascontiguousarray(minus_c, dtype=np.complex128).view(np.float64)
    gap_f = np.ascontiguousarray(gap_phase_c, dtype=np.complex128).view(np.float64)
    angles = np.ascontiguousarray(angles_c, dtype=np.float64)
    strengths = np.ascontiguousarray(strengths_c, dtype=np.float64)
    shell = np.ascontiguousarray(shell_c, dtype=np.int32)

    cdef double[::1] acc = acc_arr.view(np.float64)
    cdef double[::1] term = term_arr.view(np.float64)
    cdef double[::1] nxt = next_arr.view(np.float64)
    cdef double[::1] data = data_arr.view(np.float64)
    cdef double[::1] const = const_f
    cdef double[::1] plus = plus_f
    cdef double[::1] minus = minus_f
    cdef double[::1] gap = gap_f
    cdef double[::1] ang = angles
    cdef double[::1] strg = strengths
    cdef cnp.int32_t[::1] sh = shell

    cdef Py_ssize_t p, i, kk, n_pulses = len(angles)
    cdef double c2, s2, pre, pim, mre, mim, tre, tim
    cdef double shell_pop, max_shell = 0.0

    for p in range(n_pulses):
        if strg[p] != 0.0:
            c2 = cos(2.0 * ang[p])
            s2 = sin(2.0 * ang[p])
            for kk in range(nnz):
                pre = plus[2 * kk]
                pim = plus[2 * kk + 1]
                mre = minus[2 * kk]
                mim = minus[2 * kk + 1]
                # const + (c2 + i s2)(pre + i pim) + (c2 - i s2)(mre + i mim)
                data[2 * kk] = const[2 * kk] + c2 * (pre + mre) - s2 * (pim - mim)
                data[2 * kk + 1] = (const[2 * kk + 1]
                                    + c2 * (pim + mim) + s2 * (pre - mre))
            _expm_inplace(indptr, indices, data, acc, term, nxt, n,
                          strg[p], tol)
        shell_pop = 0.0
        for i in range(len(shell_c)):
            kk = sh[i]
            shell_pop += acc[2 * kk] ** 2 + acc[2 * kk + 1] ** 2
        if shell_pop > max_shell:
            max_shell = shell_pop
        if p < n_pulses - 1:
            for i in range(n):
                tre = acc[2 * i]
                tim = acc[2 * i + 1]
                acc[2 * i] = tre * gap[2 * i] - tim * gap[2 * i + 1]
                acc[2 * i + 1] = tre * gap[2 * i + 1] + tim * gap[2 * i]
    return acc_arr, max_shell
