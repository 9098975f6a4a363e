# cython: boundscheck=False, wraparound=False, cdivision=True
"""Ryser permanent with Gray-code updates, compiled hot loop.

The 2^N subset walk dominates every boson-sampling probability; this kernel
keeps it in C. The pure-numpy fallback lives in ``permanent_py``.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def permanent_ryser(cnp.complex128_t[:, :] a):
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j
    cdef unsigned long long k, gray, two_n
    cdef int sign
    cdef double complex total = 0.0
    cdef double complex prod
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] sums_arr = np.zeros(n, dtype=np.complex128)
    cdef cnp.complex128_t[:] sums = sums_arr

    if n == 0:
        return 1.0 + 0.0j

    two_n = 1ULL << n
    k = 1
    while k < two_n:
        gray = k ^ (k >> 1)
        # bit that toggled between gray(k-1) and gray(k)
        j = 0
        while not ((k >> j) & 1ULL):
            j += 1
        if (gray >> j) & 1ULL:
            for i in range(n):
                sums[i] = sums[i] + a[i, j]
        else:
            for i in range(n):
                sums[i] = sums[i] - a[i, j]
        # parity of |S| = popcount(gray)
        sign = 1
        for i in range(n):
            if (gray >> i) & 1ULL:
                sign = -sign
        prod = 1.0
        for i in range(n):
            prod = prod * sums[i]
        if sign > 0:
            total = total + prod
        else:
            total = total - prod
        k += 1

    if n % 2 == 1:
        total = -total
    return complex(total)
